#include "diracsoc/cli/records.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "diracsoc/soc.hpp"

namespace diracsoc::cli {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

JsonObject& JsonObject::put(const std::string& key, Value v) {
  for (auto& [k, old] : fields_)
    if (k == key) {
      old = std::move(v);
      return *this;
    }
  fields_.emplace_back(key, std::move(v));
  return *this;
}

std::string JsonObject::dump() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : fields_) {
    if (!first) out += ',';
    first = false;
    out += escape(k);
    out += ':';
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, std::nullptr_t>) out += "null";
          else if constexpr (std::is_same_v<T, bool>) out += x ? "true" : "false";
          else if constexpr (std::is_same_v<T, std::int64_t>) out += std::to_string(x);
          else if constexpr (std::is_same_v<T, double>) out += format_number(x);
          else if constexpr (std::is_same_v<T, std::string>) out += escape(x);
          else out += x ? x->dump() : "null";
        },
        v);
  }
  out += '}';
  return out;
}

SuiteLog::SuiteLog(std::string suite, const RunConfig& config) : suite_(std::move(suite)), config_(config) {
  const auto& k = config.constants;
  common_constants_.set("hbar", k.hbar).set("c", k.c).set("m", k.m).set("e", k.e).set("epsilon", k.epsilon);
  branch_.set("gammas", "dirac")
      .set("sigma", make_diffusion(k).branch)
      .set("sqrt_ww", "principal")
      .set("spin_reference", "e0 (rest-frame spin up)");
}

JsonObject& SuiteLog::check(const std::string& check_name, const std::string& potential, double residual,
                            double tolerance, bool pass) {
  JsonObject r;
  r.set("suite", suite_)
      .set("check_name", check_name)
      .set("potential", potential)
      .set("grid", config_.grid().describe())
      .set("backend", std::string(to_string(config_.backend)))
      .set("residual", residual)
      .set("tolerance", tolerance)
      .set("pass", pass)
      .set("config_hash", config_.hash())
      .set("seed", static_cast<std::int64_t>(config_.seed))
      .set("constants", common_constants_)
      .set("branch", branch_);
  if (!pass) ++failures_;
  records_.push_back(std::move(r));
  return records_.back();
}

JsonObject& SuiteLog::report(const std::string& check_name, const std::string& potential) {
  JsonObject& r = check(check_name, potential, std::nan(""), std::nan(""), true);
  r.set("report_only", true);
  return r;
}

void SuiteLog::write(const std::filesystem::path& out_dir, const std::string& command_line) const {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / (suite_ + ".jsonl"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write to " + (out_dir / (suite_ + ".jsonl")).string());
    for (const auto& r : records_) out << r.dump() << '\n';
  }
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  JsonObject meta;
  meta.set("suite", suite_)
      .set("timestamp", std::string(stamp))
      .set("command", command_line)
      .set("config_hash", config_.hash())
      .set("records", static_cast<std::int64_t>(records_.size()))
      .set("failures", static_cast<std::int64_t>(failures_));
  std::ofstream out(out_dir / (suite_ + ".meta.json"), std::ios::binary);
  out << meta.dump() << '\n';
}

}  // namespace diracsoc::cli
