#ifndef DIRACSOC_CLI_RECORDS_HPP
#define DIRACSOC_CLI_RECORDS_HPP

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "diracsoc/cli/config.hpp"

namespace diracsoc::cli {

// Minimal ordered JSON object. Doubles are written with 17 significant
// digits; non-finite doubles become null.
class JsonObject {
 public:
  using Value = std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, std::shared_ptr<JsonObject>>;

  // integers widen to int64, floating point to double, strings to std::string
  template <class T>
  JsonObject& set(const std::string& key, const T& v) {
    if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::nullptr_t>)
      return put(key, Value(v));
    else if constexpr (std::is_integral_v<T>)
      return put(key, Value(static_cast<std::int64_t>(v)));
    else if constexpr (std::is_floating_point_v<T>)
      return put(key, Value(static_cast<double>(v)));
    else if constexpr (std::is_same_v<T, JsonObject>)
      return put(key, Value(std::make_shared<JsonObject>(v)));
    else
      return put(key, Value(std::string(v)));
  }

  std::string dump() const;

 private:
  JsonObject& put(const std::string& key, Value v);
  std::vector<std::pair<std::string, Value>> fields_;
};

std::string format_number(double v);  // %.17g

// One suite's worth of check records, written as <out>/<suite>.jsonl with
// run metadata (timestamps, argv) in <out>/<suite>.meta.json.
class SuiteLog {
 public:
  SuiteLog(std::string suite, const RunConfig& config);

  // Adds a record with the common provenance fields and returns it so the
  // caller can attach details.
  JsonObject& check(const std::string& check_name, const std::string& potential, double residual, double tolerance,
                    bool pass);
  // Informational record that never fails (pass = true, report_only = true).
  JsonObject& report(const std::string& check_name, const std::string& potential);

  std::size_t size() const { return records_.size(); }
  std::size_t failures() const { return failures_; }
  const std::string& suite() const { return suite_; }

  void write(const std::filesystem::path& out_dir, const std::string& command_line) const;

 private:
  std::string suite_;
  const RunConfig& config_;
  JsonObject common_constants_;
  JsonObject branch_;
  std::deque<JsonObject> records_;  // stable references for check()
  std::size_t failures_ = 0;
};

}  // namespace diracsoc::cli

#endif  // DIRACSOC_CLI_RECORDS_HPP
