#ifndef DIRACSOC_CLI_CONFIG_HPP
#define DIRACSOC_CLI_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracsoc/emfield.hpp"
#include "diracsoc/grid.hpp"

namespace diracsoc::cli {

// Bad or missing configuration; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Run configuration. The text form is flat `dotted.key = value` lines with
// `#` comments; every key has a default, unknown keys are rejected.
//
//   constants.hbar/c/m/e, constants.epsilon (+1 | -1)
//   grid.dims, grid.extent, grid.points
//   potential.name, potential.<param>     (used by the simulate action estimate)
//   backend (spectral | fd4), seed
//   tolerance.<check>                     (see tolerance_defaults())
//   identity.*, dispersion.*, evolve.*, simulate.*, clifford.corrupt
struct RunConfig {
  PhysicalConstants constants;
  int grid_dims = 2;
  double grid_extent = 0.0;
  int grid_points = 256;
  PotentialSpec potential;
  Backend backend = Backend::spectral;
  std::uint64_t seed = 0;
  std::string out = "out";

  int identity_fields = 20;
  int identity_gauge_fields = 5;
  int identity_max_mode = 4;
  double identity_envelope = 0.05;

  int dispersion_points = 32;
  double dispersion_kmax = 3.0;

  std::vector<double> evolve_deltas;
  double evolve_k1 = 0.75;
  double evolve_dtau = 0.01;
  int evolve_steps = 1000;

  std::int64_t simulate_paths = 100000;
  double simulate_ds = 1e-3;
  int simulate_steps = 100;
  std::int64_t simulate_action_paths = 2000;
  std::int64_t simulate_dump_paths = 0;

  bool corrupt_gammas = false;  // test mode for verify-clifford

  std::map<std::string, double> tolerance;

  SpacetimeGrid grid() const;
  double tol(const std::string& name) const;

  // Sorted `key = value` lines of every resolved setting except the output
  // directory; identical runs produce identical text.
  std::string canonical() const;
  // FNV-1a (64 bit) of canonical(), as 16 hex digits.
  std::string hash() const;

 private:
  friend class ConfigBuilder;
  std::map<std::string, std::string> settings_;
};

const std::map<std::string, double>& tolerance_defaults();

// Collects raw settings from files and flags, then resolves and validates.
class ConfigBuilder {
 public:
  ConfigBuilder();
  void read(std::istream& in, const std::string& origin);
  void read_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  RunConfig resolve() const;

 private:
  std::map<std::string, std::string> settings_;
};

RunConfig default_config();

}  // namespace diracsoc::cli

#endif  // DIRACSOC_CLI_CONFIG_HPP
