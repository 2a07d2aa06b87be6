#ifndef DIAGPROD_GROUPS_HPP
#define DIAGPROD_GROUPS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace diagprod {

using ElementId = int;

/// Image of an element in the quotient by the normal closure of [A, B],
/// identified with A x B. Both fields are element ids of the ambient group
/// lying in the marked subgroups.
struct ThetaImage {
  ElementId a = 0;
  ElementId b = 0;
  friend bool operator==(const ThetaImage&, const ThetaImage&) = default;
};

/**
 * Finite group with marked subgroups A and B whose union generates.
 *
 * Element ids are 0..order()-1 with 0 the identity. The constructor builds
 * the full multiplication table, the word metric over (A u B) \ {e}, the
 * derived subgroup (normal closure of the commutators [A, B]) and the unique
 * decomposition g = derived_part(g) * theta(g).a * theta(g).b. Construction
 * validates the structural hypotheses: A and B are subgroups, A u B
 * generates, and the quotient by the derived subgroup is isomorphic to
 * A x B (each g admits exactly one decomposition).
 *
 * Immutable after construction; all operations are table lookups.
 */
class GroupBackend {
 public:
  /// Dihedral group with `rotation_order` rotations (order 2l). Ids 0..l-1
  /// are the rotations r^j, ids l..2l-1 the reflections r^j s. The marked
  /// generators are the reflections a = r s and b = s, so mul(a, b) = r.
  /// Throws std::invalid_argument when l is odd: the quotient of D_l by its
  /// even rotations is Z/2, not the Klein group, so the structural
  /// hypotheses fail.
  static GroupBackend dihedral(int rotation_order);

  /// Generic backend from an explicit multiplication table (row-major,
  /// table[g*order + h] = g*h) and the element lists of the two marked
  /// subgroups. The identity is prepended to each list if absent; the
  /// remaining order of the lists is kept and defines the identification
  /// with the abstract groups A and B used across levels.
  static GroupBackend from_table(int order, std::vector<ElementId> table,
                                 std::vector<ElementId> gens_a,
                                 std::vector<ElementId> gens_b,
                                 int diameter_target = 0);

  /// Parses the text form used in config files:
  ///   order N
  ///   table
  ///   N*N whitespace-separated ids
  ///   subgroup_a id id ...
  ///   subgroup_b id id ...
  /// Lines starting with '#' are comments.
  static GroupBackend from_table_stream(std::istream& in);

  int order() const { return order_; }
  ElementId identity() const { return 0; }
  bool valid_id(ElementId g) const { return g >= 0 && g < order_; }

  ElementId mul(ElementId g, ElementId h) const;
  ElementId inv(ElementId g) const;

  /// Quotient image of g in A x B.
  ThetaImage theta(ElementId g) const;
  /// The unique g' in the derived subgroup with g = g' * theta(g).a * theta(g).b.
  ElementId derived_part(ElementId g) const;
  bool in_derived(ElementId g) const;
  int derived_order() const { return derived_order_; }

  /// Graph distance from the identity in the Cayley graph over
  /// (A u B) \ {e}; identity has length 0.
  int word_length(ElementId g) const;
  int diameter() const { return diameter_; }
  /// The scale parameter l_m this backend realizes (rotation order for
  /// dihedral backends, measured diameter for table backends).
  int diameter_target() const { return diameter_target_; }

  /// Marked subgroup elements; index 0 is the identity. Positions in these
  /// lists identify elements with their abstract counterparts in A and B,
  /// uniformly across backends of the same sizes.
  const std::vector<ElementId>& gens_a() const { return gens_a_; }
  const std::vector<ElementId>& gens_b() const { return gens_b_; }
  /// Position of g in gens_a(); throws std::out_of_range when g is not in A.
  int a_index(ElementId g) const;
  int b_index(ElementId g) const;

  /// "dihedral <l>" or "table <order>"; used in logs and config echoes.
  const std::string& kind() const { return kind_; }

 private:
  GroupBackend() = default;
  void finish_build();

  int order_ = 1;
  int diameter_target_ = 1;
  std::string kind_;
  std::vector<ElementId> mul_;
  std::vector<ElementId> inv_;
  std::vector<ElementId> gens_a_, gens_b_;
  std::vector<int> a_index_, b_index_;
  std::vector<ThetaImage> theta_;
  std::vector<ElementId> derived_;
  std::vector<char> in_derived_;
  std::vector<int> word_length_;
  int diameter_ = 0;
  int derived_order_ = 1;
};

/// Backend description as it appears in config files: "dihedral <l>" or
/// "table <path>".
struct GroupDescriptor {
  std::string kind;  // "dihedral" | "table"
  int rotation_order = 0;
  std::string table_path;
};

GroupDescriptor parse_group_descriptor(const std::string& text);
GroupBackend make_backend(const GroupDescriptor& desc);

}  // namespace diagprod

#endif  // DIAGPROD_GROUPS_HPP
