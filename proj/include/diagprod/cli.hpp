#ifndef DIAGPROD_CLI_HPP
#define DIAGPROD_CLI_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "diagprod/coupling.hpp"
#include "diagprod/tiling.hpp"

namespace diagprod {

/// Raised for unreadable config files, unknown keys, malformed values, and
/// settings that contradict each other. The executable maps it (together
/// with the std::invalid_argument hypothesis diagnostics coming from the
/// group and context constructors) to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * One run = one config. Values come from a key-value file (`key = value`
 * per line, `#` comments) overlaid by command-line flags; the flags win.
 * Keys: profile.family (identity|power), profile.alpha, kappa, lambda,
 * depth, cap, level, eps, samples, seed, mode (materialized|synthetic),
 * out, c1, c2, ab, backend.<m> (a group descriptor such as "dihedral 4"
 * overriding the synthesized cyclic order at level m).
 */
struct RunConfig {
  std::string profile_family = "power";
  double profile_alpha = 1.0;
  int64_t kappa = 2;
  int64_t lambda = 2;
  int depth = 12;
  uint64_t cap = 1000000;
  int level = 1;
  double eps = 0.5;
  uint64_t samples = 100000;
  uint64_t seed = 1;
  std::string mode = "materialized";
  std::string out_dir = ".";
  SyntheticParams params;
  std::map<int, std::string> backend_override;

  ProfileSpec profile() const;  // throws ConfigError on an unknown family
};

RunConfig load_config(const std::string& path);
/// Applies one key-value pair; load_config calls this per line and flag
/// overlays reuse it. Throws ConfigError on unknown keys or bad values.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

/// Synthesized schedule for the configured profile, validated first.
ParameterSchedule configured_schedule(const RunConfig& cfg);
/**
 * Materializes the context the tiles at cfg.level live in: level 0 is the
 * direct product D_2 = Z/2 x Z/2 and level m in [1, L(level)] carries the
 * dihedral group of rotation order l_m (or the backend.<m> override). The
 * synthesized prefix must pin down every k_m up to kappa^level, otherwise
 * the truncation window is ambiguous and a ConfigError asks for a larger
 * depth.
 */
DeltaContext configured_context(const RunConfig& cfg,
                                const ParameterSchedule& sched);

// Subcommand bodies. Artifacts are written under cfg.out_dir with a
// temp-file-then-rename so partial output never shadows a finished file;
// identical (config, seed) pairs produce byte-identical files. Failures
// surface as exceptions for the executable to map: ConfigError and
// std::invalid_argument to 2, CapExceeded to 3, InvariantViolation to 4.

/// synth.csv: rows m, k_m, l_m for m = 0..depth ("inf" once terminated).
void run_synth(const RunConfig& cfg);
/// tile_<n>.txt and shift_<n>.txt (serialized elements, canonical order,
/// one per line) plus stats.csv with n, |T_n|, R_n, eps_n, R'_n, eps'_n.
void run_build(const RunConfig& cfg);
/// Re-reads the build artifacts and re-checks them from scratch: tiles
/// match a fresh enumeration, every shift level multiplies onto a disjoint
/// cover, and the boundary ratio is exactly 2/kappa^n. Logs one summary
/// line per level to stderr; throws InvariantViolation on any mismatch.
void run_verify(const RunConfig& cfg);
/// simulate.csv (per-generator displacement histograms and escape counts)
/// and moments.csv (empirical E[phi_eps(d/c)] over the c grid).
void run_simulate(const RunConfig& cfg);
/// series.csv: one row per truncation level with both summability series,
/// their partial sums and tails, and the comparator column.
void run_report(const RunConfig& cfg);

}  // namespace diagprod

#endif  // DIAGPROD_CLI_HPP
