#pragma once

#include "gbd/generators.hpp"
#include "gbd/interpolation.hpp"
#include "gbd/slicing.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gbd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitInput = 2;

/// Bad configuration or unreadable input.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string field_path;
  std::string corpus_name;  // alternative to field_path
  std::vector<std::vector<double>> basis;  // basis vectors; empty: canonical
  std::vector<int> pair_signs;
  std::vector<double> thresholds;
  std::vector<double> eps{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  double p = 1.0;
  double h = 1e-3;
  double delta = 1e-2;
  std::string mode = "auto";  // auto | sampled | exact
  double probe_step = 0.0;    // ≤ 0: ε/8
  int n_candidates = 16;
  int n_anchors = 64;  // anchor-diag sample size
  std::uint64_t seed = 0;
  double eta = 0.01;
  double R = 0.0;  // ≤ 0: unbounded
  int threads = 0;  // 0: GBD_SLICE_THREADS, else 1
  std::string out_dir;
  bool dump = true;
  // korn
  int korn_d = 2;
  std::string korn_method = "eig";
  int korn_starts = 200;
  std::string korn_cache;
};

/// Reads a JSON config; unknown keys are rejected.
RunConfig load_config(const std::string& path);
void validate(const RunConfig& cfg);

/// Files produced by a command, by name, in creation order.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  std::string summary;  // human-readable, printed to stdout
  bool violation = false;

  const std::string& file(const std::string& name) const;
};

GeneratorSpec load_field(const RunConfig& cfg);
DirectionSet directions(const RunConfig& cfg, int d);

Outputs cmd_energy(const RunConfig& cfg);
Outputs cmd_approximate(const RunConfig& cfg);
Outputs cmd_korn(const RunConfig& cfg);
Outputs cmd_anchor_diag(const RunConfig& cfg);
Outputs cmd_corpus_list(const RunConfig& cfg);

/// Parses arguments, runs the subcommand, writes outputs and returns the exit
/// code (0 ok, 1 bound violation, 2 input error).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gbd::cli
