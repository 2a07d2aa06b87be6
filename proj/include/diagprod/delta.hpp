#ifndef DIAGPROD_DELTA_HPP
#define DIAGPROD_DELTA_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "diagprod/groups.hpp"

namespace diagprod {

/// Sparse lamp configuration: finitely many positions carrying non-identity
/// element ids of a fixed group, stored as a sorted position/value list.
struct LampConfig {
  std::vector<std::pair<int64_t, ElementId>> entries;

  bool empty() const { return entries.empty(); }
  size_t size() const { return entries.size(); }
  /// Value at `pos`; 0 (the identity) off the support.
  ElementId at(int64_t pos) const;
  /// Insert-or-assign; erases the entry when `value` is the identity.
  void set(int64_t pos, ElementId value);

  friend bool operator==(const LampConfig&, const LampConfig&) = default;
  auto operator<=>(const LampConfig&) const = default;
};

/// Closed integer interval; compute_range never returns an empty one (the
/// identity occupies [0,0]).
struct RangeInterval {
  int64_t lo = 0;
  int64_t hi = 0;
  int64_t length() const { return hi - lo; }
  bool contains(const RangeInterval& inner) const {
    return lo <= inner.lo && inner.hi <= hi;
  }
  friend bool operator==(const RangeInterval&, const RangeInterval&) = default;
};

/**
 * Shared immutable description of a diagonal product: the ladder of finite
 * write distances k_0 = 0 < k_1 < ... < k_M together with one group backend
 * per level. Levels with infinite k are simply absent (the degenerate
 * lamplighter case is M = 0). Construction checks the structural
 * hypotheses: k_0 = 0, level 0 is a direct product A x B (trivial derived
 * subgroup), k_{m+1} >= 2 k_m, and every backend carries marked subgroups of
 * the same sizes so that positions in the gens_a/gens_b lists identify
 * abstract generators across levels.
 */
class DeltaContext {
 public:
  DeltaContext(int kappa, std::vector<int64_t> k,
               std::vector<std::shared_ptr<const GroupBackend>> backends);

  int kappa() const { return kappa_; }
  /// Number of levels with finite k beyond level 0.
  int levels() const { return static_cast<int>(k_.size()) - 1; }
  int64_t k(int m) const { return k_.at(m); }
  const GroupBackend& backend(int m) const { return *backends_.at(m); }
  /// The level-0 group A x B in which g0 takes values.
  const GroupBackend& lamp_group() const { return *backends_[0]; }
  int a_size() const { return a_size_; }
  int b_size() const { return b_size_; }

  /// Largest m with k_m <= n (so k_l <= n < k_{l+1} when the next level is
  /// materialized; beyond k_M every level is present already).
  int little_l(int64_t n) const;

 private:
  int kappa_;
  std::vector<int64_t> k_;
  std::vector<std::shared_ptr<const GroupBackend>> backends_;
  int a_size_, b_size_;
};

/// Compact representation (t, g_0, g'_1..g'_M) of an element of the diagonal
/// product. g0 is valued in the level-0 group A x B; gprime[m-1] is valued
/// in the derived subgroup of level m. The full per-level configuration is
/// always derived on demand (reconstruct_level).
struct DeltaElement {
  int64_t t = 0;
  LampConfig g0;
  std::vector<LampConfig> gprime;

  friend bool operator==(const DeltaElement&, const DeltaElement&) = default;
  /// Canonical ordering: by (t, g0 entries, per-level gprime entries),
  /// numeric throughout. Used to sort enumerated sets deterministically.
  auto operator<=>(const DeltaElement&) const = default;
};

enum class GenKind { CursorPlus, CursorMinus, AWrite, BWrite };

/// Generator description: cursor step or a write of the abstract generator
/// with the given index in the gens_a()/gens_b() list (index >= 1).
struct Gen {
  GenKind kind = GenKind::CursorPlus;
  int index = 0;
};

/// The symmetrized generating set: both cursor steps and one write per
/// non-identity element of A and of B (writes are closed under inversion
/// since the subgroups are).
std::vector<Gen> symmetric_generators(const DeltaContext& ctx);

DeltaElement identity(const DeltaContext& ctx);
bool is_identity(const DeltaElement& x);
DeltaElement generator(const DeltaContext& ctx, const Gen& g);

DeltaElement multiply(const DeltaContext& ctx, const DeltaElement& x,
                      const DeltaElement& y);
DeltaElement inverse(const DeltaContext& ctx, const DeltaElement& x);

/// Full configuration value g_m(pos) = g'_m(pos) * thetaA(g0(pos)) *
/// thetaB(g0(pos - k_m)); for m = 0 this is just g0(pos).
ElementId reconstruct_level(const DeltaContext& ctx, const DeltaElement& x,
                            int m, int64_t pos);

/// Convex hull of {0, t}, supp(g0) and every supp(g'_m) u (supp(g'_m)-k_m):
/// the sites the cursor must visit to write the element.
RangeInterval compute_range(const DeltaContext& ctx, const DeltaElement& x);

/// Hull of the sites visited when writing level m alone: {0, t}, the
/// A-support and B-support of g0, and supp(g'_m) u (supp(g'_m)-k_m).
RangeInterval level_range(const DeltaContext& ctx, const DeltaElement& x,
                          int m);

/// k_m * sum over half-k blocks meeting the level range of the largest
/// (word_length - 1)+ of the reconstructed lamp in the block. Level 0 (and
/// any k_m = 0) contributes 0.
int64_t essential_contribution(const DeltaContext& ctx, const DeltaElement& x,
                               int m);

/// 500 * sum over levels m <= little_l(range length) of 9 * (occupied sites
/// of the level range + essential_contribution); 0 for the identity.
int64_t metric_upper_bound(const DeltaContext& ctx, const DeltaElement& x);

/// Exact word length by breadth-first search over the symmetrized
/// generators; nullopt when the search exceeds radius_cap or node_cap.
std::optional<int> word_length_exact(const DeltaContext& ctx,
                                     const DeltaElement& x, int radius_cap,
                                     size_t node_cap = 100000);

/**
 * Exact word lengths for every element whose data fits in the box
 * [lo, hi]: cursor in [lo, hi], supp(g0) in [lo, hi], supp(g'_m) in
 * [lo + k_m, hi]. The search never leaves the box; this is exact because a
 * geodesic to such an element never needs to visit sites outside the hull
 * of its required writes (excursions can be excised), which tests
 * cross-validate against the unrestricted search at small radii. Requires
 * lo <= 0 <= hi. Keys are serialized elements.
 */
std::unordered_map<std::string, int> box_word_lengths(const DeltaContext& ctx,
                                                      int64_t lo, int64_t hi);

/// Canonical line format "t | pos:val,... | m=1 pos:val,... | ...".
std::string serialize(const DeltaElement& x);
/// Parses and validates (level count, id ranges, derived membership, sorted
/// support). Throws std::invalid_argument on malformed input.
DeltaElement parse_element(const DeltaContext& ctx, const std::string& line);

}  // namespace diagprod

#endif  // DIAGPROD_DELTA_HPP
