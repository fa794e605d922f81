#include "diracsoc/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace diracsoc::cli {

namespace {

// key -> default text
const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d{
      {"constants.hbar", "1"},
      {"constants.c", "1"},
      {"constants.m", "1"},
      {"constants.e", "1"},
      {"constants.epsilon", "+1"},
      {"grid.dims", "2"},
      {"grid.extent", "8pi"},
      {"grid.points", "256"},
      {"potential.name", "free"},
      {"backend", "spectral"},
      {"seed", "20240611"},
      {"identity.fields", "20"},
      {"identity.gauge_fields", "5"},
      {"identity.max_mode", "4"},
      {"identity.envelope", "0.05"},
      {"dispersion.points", "32"},
      {"dispersion.kmax", "3"},
      {"evolve.deltas", "0, 1e-6, -1e-6, 1e-3, -1e-3, 0.1, -0.1, 1, -1"},
      {"evolve.k1", "0.75"},
      {"evolve.dtau", "0.01"},
      {"evolve.steps", "1000"},
      {"simulate.paths", "100000"},
      {"simulate.ds", "1e-3"},
      {"simulate.steps", "100"},
      {"simulate.action_paths", "2000"},
      {"simulate.dump_paths", "0"},
      {"clifford.corrupt", "0"},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  double scale = 1.0;
  // "8pi", "pi", "0.5 pi"
  if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
    scale = std::numbers::pi;
    t = trim(t.substr(0, t.size() - 2));
    if (t.empty()) t = "1";
  }
  if (!t.empty() && t[0] == '+') t.erase(0, 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
  return v * scale;
}

long long parse_integer(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  if (!t.empty() && t[0] == '+') t.erase(0, 1);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, item));
  if (out.empty()) throw ConfigError("'" + key + "': expected a comma-separated list");
  return out;
}

bool known_key(const std::string& key) {
  if (defaults().count(key)) return true;
  if (key.rfind("potential.", 0) == 0 && key.size() > 10) return true;
  if (key.rfind("tolerance.", 0) == 0) return tolerance_defaults().count(key.substr(10)) > 0;
  return false;
}

}  // namespace

const std::map<std::string, double>& tolerance_defaults() {
  static const std::map<std::string, double> t{
      {"clifford_forms", 1e-12},
      {"identity", 1e-8},
      {"identity_fd4", 1e-3},
      {"fd4_slope", 0.3},
      {"gauge", 1e-8},
      {"spinor", 1e-10},
      {"dispersion_det", 1e-9},
      {"stationary", 1e-12},
      {"frequency", 1e-8},
      {"legacy", 1e-10},
      {"weak", 1e-12},
      {"hjb", 1e-10},
      {"hjb_slope", 1e-6},
      {"hopf_cole_exp", 1e-10},
      {"hopf_cole_random", 1e-8},
      {"generator_sigmas", 3.0},
      {"moments", 5.0},
  };
  return t;
}

ConfigBuilder::ConfigBuilder() : settings_(defaults()) {
  for (const auto& [k, v] : tolerance_defaults()) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    settings_["tolerance." + k] = os.str();
  }
}

void ConfigBuilder::set(const std::string& key, const std::string& value) {
  if (!known_key(key)) throw ConfigError("unknown configuration key '" + key + "'");
  if (key == "potential.name") {
    // a new potential starts from an empty parameter set
    for (auto it = settings_.begin(); it != settings_.end();)
      it = it->first.rfind("potential.", 0) == 0 ? settings_.erase(it) : std::next(it);
  }
  settings_[key] = trim(value);
}

void ConfigBuilder::read(std::istream& in, const std::string& origin) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ConfigBuilder::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  read(in, path.string());
}

RunConfig ConfigBuilder::resolve() const {
  const auto& s = settings_;
  auto real = [&](const std::string& k) { return parse_real(k, s.at(k)); };
  auto integer = [&](const std::string& k) { return parse_integer(k, s.at(k)); };
  auto positive = [&](const std::string& k) {
    const double v = real(k);
    if (!(v > 0.0)) throw ConfigError("'" + k + "' must be positive");
    return v;
  };
  auto count = [&](const std::string& k, long long lo) {
    const long long v = integer(k);
    if (v < lo) throw ConfigError("'" + k + "' must be at least " + std::to_string(lo));
    return v;
  };

  RunConfig c;
  c.settings_ = s;
  c.constants.hbar = positive("constants.hbar");
  c.constants.c = positive("constants.c");
  c.constants.m = positive("constants.m");
  c.constants.e = real("constants.e");
  const long long eps = integer("constants.epsilon");
  if (eps != 1 && eps != -1) throw ConfigError("'constants.epsilon' must be +1 or -1");
  c.constants.epsilon = static_cast<int>(eps);

  c.grid_dims = static_cast<int>(count("grid.dims", 1));
  c.grid_extent = positive("grid.extent");
  c.grid_points = static_cast<int>(count("grid.points", 8));
  try {
    (void)c.grid();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  try {
    c.potential.kind = parse_potential_kind(s.at("potential.name"));
    for (const auto& [k, v] : s)
      if (k.rfind("potential.", 0) == 0 && k != "potential.name") c.potential.params[k.substr(10)] = parse_real(k, v);
    (void)PotentialModel(c.potential);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }

  try {
    c.backend = parse_backend(s.at("backend"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const long long seed = integer("seed");
  if (seed < 0) throw ConfigError("'seed' must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);

  c.identity_fields = static_cast<int>(count("identity.fields", 1));
  c.identity_gauge_fields = static_cast<int>(count("identity.gauge_fields", 1));
  c.identity_max_mode = static_cast<int>(count("identity.max_mode", 0));
  c.identity_envelope = positive("identity.envelope");
  c.dispersion_points = static_cast<int>(count("dispersion.points", 1));
  c.dispersion_kmax = positive("dispersion.kmax");
  c.evolve_deltas = parse_list("evolve.deltas", s.at("evolve.deltas"));
  c.evolve_k1 = real("evolve.k1");
  c.evolve_dtau = positive("evolve.dtau");
  c.evolve_steps = static_cast<int>(count("evolve.steps", 1));
  c.simulate_paths = count("simulate.paths", 2);
  c.simulate_ds = positive("simulate.ds");
  c.simulate_steps = static_cast<int>(count("simulate.steps", 1));
  c.simulate_action_paths = count("simulate.action_paths", 2);
  c.simulate_dump_paths = count("simulate.dump_paths", 0);
  c.corrupt_gammas = integer("clifford.corrupt") != 0;

  for (const auto& [name, fallback] : tolerance_defaults()) {
    const double v = real("tolerance." + name);
    if (!(v > 0.0)) throw ConfigError("'tolerance." + name + "' must be positive");
    c.tolerance[name] = v;
  }
  return c;
}

SpacetimeGrid RunConfig::grid() const { return SpacetimeGrid(grid_dims, grid_extent, grid_points); }

double RunConfig::tol(const std::string& name) const {
  auto it = tolerance.find(name);
  if (it == tolerance.end()) throw std::logic_error("no tolerance named '" + name + "'");
  return it->second;
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  for (const auto& [k, v] : settings_) os << k << " = " << v << '\n';
  return os.str();
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

RunConfig default_config() { return ConfigBuilder().resolve(); }

}  // namespace diracsoc::cli
