#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diagprod/tiling.hpp"

namespace diagprod {

/**
 * Finite truncation of the coupling space: addresses (i_0, ..., i_N) with
 * i_0 indexing T_0 and i_n indexing the level-n shift set, in bijection
 * with T_N (product sigma_N ... sigma_1 tau_0) and with the integers
 * [0, |T_N| - 1] (mixed radix, digit n weighted by |T_{n-1}|).
 */
class CouplingSpace {
 public:
  CouplingSpace(DeltaContext ctx, TileTower tower);

  const DeltaContext& context() const { return ctx_; }
  const TileTower& tower() const { return tower_; }
  int top_level() const { return tower_.top_level(); }
  int64_t tile_size(int n) const;
  int64_t shift_size(int n) const;  // |Sigma_n|, n >= 1
  int64_t space_size() const { return weight_.back(); }

 private:
  DeltaContext ctx_;
  TileTower tower_;
  std::vector<int64_t> weight_;  // weight_[n] = |T_{n-1}|, weight_[0] = 1
};

struct CouplingPoint {
  std::vector<int64_t> idx;  // idx[n] = level-n digit

  bool operator==(const CouplingPoint&) const = default;
};

DeltaElement addr_to_delta(const CouplingSpace& space, const CouplingPoint& x);
CouplingPoint delta_to_addr(const CouplingSpace& space, const DeltaElement& h);
int64_t addr_to_int(const CouplingSpace& space, const CouplingPoint& x);
CouplingPoint int_to_addr(const CouplingSpace& space, int64_t v);

/// Right action of a generator; empty when the element leaves T_N.
std::optional<CouplingPoint> act_delta(const CouplingSpace& space, const Gen& s,
                                       const CouplingPoint& x);

/// Translation by d on [0, |T_N| - 1]; empty past either end.
std::optional<CouplingPoint> act_z(const CouplingSpace& space, int d,
                                   const CouplingPoint& x);

/// How far a generator of the diagonal product moves the integer image:
/// |int(x s) - int(x)|. Empty when the action is out of truncation.
std::optional<int64_t> schreier_distance_z(const CouplingSpace& space,
                                           const CouplingPoint& x,
                                           const Gen& s);

struct DeltaDistance {
  int64_t upper = 0;
  std::optional<int> exact;  // breadth-first search under the caps
};

/// Word-metric cost of one integer step: the element z with x z = y for
/// y = x + d, reported as the metric upper bound plus exact length when the
/// search caps allow.
std::optional<DeltaDistance> schreier_distance_delta(const CouplingSpace& space,
                                                     const CouplingPoint& x,
                                                     int d,
                                                     int radius_cap = 64,
                                                     int node_cap = 100000);

/// phi_eps(x) = rho(ln x) / max(ln rho(ln x), 1)^(1+eps), zero below x = e.
double phi_eps(const ProfileSpec& profile, double eps, double x);
/// Same with the argument given as ln x, for sizes beyond double range.
double phi_eps_ln(const ProfileSpec& profile, double eps, double ln_x);

struct SeriesRow {
  int n = 0;
  double ln_psi_term = 0;  // rho(2 R_n) + ln 2 - ln|T_{n-1}|
  double psi_term = 0;
  double psi_partial = 0;
  double psi_tail = 0;  // suffix sum within the reported horizon
  double phi_term = 0;  // phi_eps(2 R'_n) * eps_{n-1}
  double phi_partial = 0;
  double phi_tail = 0;
  double phi_comparator = 0;  // kappa / ((n-1) ln kappa)^(1+eps), n >= 2
};

struct SeriesReport {
  std::string mode;
  double eps = 0;
  SyntheticConstants constants;
  /// Smallest index from which the psi terms strictly decrease onwards.
  int n0 = 0;
  std::vector<SeriesRow> rows;  // n = 1 .. horizon
};

SeriesReport series_report(const ProfileSpec& profile,
                           const ParameterSchedule& s, double eps, int n_max,
                           const SyntheticParams& p);

/// Horizon limited to the tower's top level; tile sizes and R'_n come from
/// the materialized tiles instead of the synthetic model.
SeriesReport series_report_materialized(const ProfileSpec& profile,
                                        const ParameterSchedule& s,
                                        const CouplingSpace& space, double eps,
                                        const SyntheticParams& p);

inline constexpr int kMomentGridSize = 11;  // c = 2^0 .. 2^10

struct DeltaGenStats {
  Gen gen;
  uint64_t domain = 0;
  uint64_t out_of_truncation = 0;
  std::map<int64_t, uint64_t> z_histogram;
  /// E[phi_eps(d/c)] over the domain, c sweeping the moment grid.
  std::array<double, kMomentGridSize> moments{};
};

struct ZGenStats {
  int d = 0;
  uint64_t domain = 0;
  uint64_t out_of_truncation = 0;
  std::map<int64_t, uint64_t> upper_histogram;
  std::map<int, uint64_t> exact_histogram;  // over the exact subsample
  uint64_t exact_attempted = 0;
  uint64_t exact_unknown = 0;  // caps hit before the search finished
};

struct SimulateOptions {
  double eps = 0.5;
  ProfileSpec profile = ProfileSpec::power(1.0);
  uint64_t samples = 100000;  // when sampling
  uint64_t seed = 1;
  uint64_t exhaustive_threshold = 1000000;
  uint64_t exact_samples = 512;  // exact-distance subsample per direction
  int radius_cap = 64;
  int node_cap = 100000;
};

struct SimulationReport {
  int level = 0;
  double eps = 0;
  uint64_t points = 0;
  bool exhaustive = false;
  uint64_t seed = 0;  // 0 when exhaustive
  std::vector<DeltaGenStats> delta_gens;
  std::vector<ZGenStats> z_gens;
};

/// Evaluates both partial actions pointwise: exhaustively when the space is
/// no larger than the threshold, otherwise over seeded uniform draws.
SimulationReport simulate(const CouplingSpace& space,
                          const SimulateOptions& opt);

}  // namespace diagprod
