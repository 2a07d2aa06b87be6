#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "diagprod/delta.hpp"
#include "diagprod/schedule.hpp"

namespace diagprod {

/// A requested materialization is larger than the configured cap.
struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A constructed object failed one of the checked structural invariants.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Elements whose range lies in [0, n-1], canonically sorted.
struct FolnerSet {
  int64_t n = 1;
  std::vector<DeltaElement> elements;
};

/// Support-condition membership test: t and supp(g0) within [0, n-1] and
/// supp(g'_m) within [k_m, n-1] for every level.
bool in_folner(const DeltaContext& ctx, const DeltaElement& x, int64_t n);

/// n * (|A||B|)^n * prod_m |G'_m|^{n-k_m} over the levels with k_m < n.
BigInt folner_cardinality(const DeltaContext& ctx, int64_t n);

FolnerSet enumerate_folner(const DeltaContext& ctx, int64_t n,
                           uint64_t cap = 1000000);

/// Number of elements with cursor at an end of the window (t in {0, n-1}).
uint64_t boundary_count(const DeltaContext& ctx, const FolnerSet& f);

/// How many elements of f leave it under right multiplication by one
/// generator. Writes never escape; each cursor direction loses exactly the
/// elements whose cursor sits at the corresponding end.
struct GeneratorEscape {
  Gen gen;
  uint64_t exits = 0;
};
std::vector<GeneratorEscape> escape_counts(const DeltaContext& ctx,
                                           const FolnerSet& f);

/**
 * The level-n shift set, split into kappa parts. Every element of part j
 * has cursor j*kappa^{n-1}; its g0 support avoids the j-th kappa^{n-1}
 * block of [0, kappa^n - 1] and each g'_m support avoids that block's
 * k_m-translate. When the tile index map steps up at n, the newly covered
 * level is supported on [k_m, kappa^n - 1].
 */
struct ShiftSet {
  int level = 1;
  std::vector<std::vector<DeltaElement>> parts;

  uint64_t size() const;
  /// Element at a global index (parts concatenated in order).
  const DeltaElement& at(uint64_t idx) const;
};

bool in_shift_part(const DeltaContext& ctx, const DeltaElement& x, int level,
                   int j);

ShiftSet build_shift(const DeltaContext& ctx, int level,
                     uint64_t cap = 1000000);

/// Tiles T_i = F_{kappa^i} for i = 0..N together with the shift sets that
/// generate them: tiles[i+1] is verified to be exactly the disjoint union
/// of sigma * tiles[i] over sigma in shifts[i].
struct TileTower {
  std::vector<FolnerSet> tiles;
  std::vector<ShiftSet> shifts;

  int top_level() const { return static_cast<int>(tiles.size()) - 1; }
};

/// Builds tiles T_0..T_N, verifying at each step that the shifted copies of
/// the previous tile are pairwise disjoint and cover F_{kappa^n} exactly.
/// Verification failures throw InvariantViolation.
TileTower build_tiles(const DeltaContext& ctx, int top_level,
                      uint64_t cap = 1000000);

/// Exact product-formula cardinality of T_n. Guarded by the cap since the
/// exponents grow like kappa^n.
BigInt tile_cardinality(const DeltaContext& ctx, int n,
                        uint64_t cap = 1000000);

/// Factorization h = sigma * rest with sigma in part j of the level-n shift
/// set and rest in T_{n-1}: j is the top base-kappa digit of the cursor,
/// rest is the restriction of h's data to the j-th block translated to the
/// origin, and sigma = h * rest^{-1} (verified to satisfy the part-j
/// support conditions).
struct ShiftFactor {
  int j = 0;
  DeltaElement sigma;
  DeltaElement rest;
};
ShiftFactor decompose_step(const DeltaContext& ctx, const DeltaElement& h,
                           int level);

/// Arithmetic progression {0, step, ..., (count-1)*step} used as the
/// level-n shift set on the integers; step is the previous tile size.
struct ZShift {
  int level = 0;
  BigInt step = 1;
  uint64_t count = 0;
};
ZShift z_shift(const TileTower& tower, int level);
/// |T'_n| = |T_n|; the integer tile is [0, size - 1].
BigInt z_tile_size(const TileTower& tower, int level);

/**
 * Synthetic lamp-size model ln|G_m| = c1 * l_m (the c2 slack widens the
 * derived constants only) with |A||B| = ab, used where real expander
 * families are out of reach.
 */
struct SyntheticParams {
  double c1 = 1.0;
  double c2 = 0.0;
  double ab = 4.0;
};

/// ln|T_n| = n ln kappa + kappa^n ln(ab) + sum over levels m = 1..L(n) of
/// (kappa^n - k_m)(c1 l_m - ln ab).
double synthetic_ln_tile(const ParameterSchedule& s, int n,
                         const SyntheticParams& p);

/**
 * Constants derived from the schedule by the geometric-sum recipes, taken
 * over the levels in use up to the requested depth:
 *   C_l    = max_j  sum_{m<=j} (3 l_m + 1) / l_j      (diameter sum)
 *   C_diam = 4500 C_l   (word-metric diameter bound diam F_n <= C_diam n l)
 *   C_R    = C_l        (series scale; the 4500 factor is reported apart)
 *   C_1    = max_j  sum_{1<=m<=j} (c1 l_m + c2) / l_j (upper log bound)
 *   C_2    = min_m (c1 l_m - c2 - ln ab) / l_m, guarded positive
 *   C_3    = ln kappa + ln ab + C_1
 * giving C_2 kappa^{n-1} l_{L(n)} <= ln|T_n| <= C_3 kappa^n l_{L(n)}.
 */
struct SyntheticConstants {
  double c_l = 0;
  double c_r = 0;
  double c_diam = 0;
  double c_1 = 0;
  double c_2 = 0;
  double c_3 = 0;
};
SyntheticConstants synthetic_constants(const ParameterSchedule& s, int n_max,
                                       const SyntheticParams& p);

/// Per-level quantification: R_n = C_R kappa^n l_{L(n)}, eps_n = 2/kappa^n,
/// R'_n = |T_n| and eps'_n = 2/|T_n| (both reported in log space).
struct TileStats {
  int n = 0;
  double ln_cardinality = 0;
  double r_n = 0;
  double eps_n = 0;
  double ln_r_prime = 0;
  double ln_eps_prime = 0;
  SyntheticConstants constants;
  SyntheticParams params;
  std::optional<BigInt> exact_cardinality;
  std::optional<int64_t> exact_diameter;
};

TileStats quantify(const ParameterSchedule& s, int n, const SyntheticParams& p);

/// As quantify, plus the exact cardinality from the materialized tile and,
/// when |T_n| <= diameter_cap, the exact word-metric diameter via a
/// box-confined breadth-first search (asserted <= C_diam kappa^n l_{L(n)}).
TileStats quantify_materialized(const DeltaContext& ctx,
                                const ParameterSchedule& s,
                                const TileTower& tower, int n,
                                const SyntheticParams& p,
                                uint64_t diameter_cap = 100);

/// Truncates the schedule at `depth` finite levels and marks it terminated:
/// the materialized group treats every deeper level as infinite.
ParameterSchedule truncate_schedule(const ParameterSchedule& s, int depth);

}  // namespace diagprod
