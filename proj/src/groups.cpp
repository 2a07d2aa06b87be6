#include "diagprod/groups.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace diagprod {
namespace {

constexpr int kMaxOrder = 2048;
constexpr int kFullAssocCheckOrder = 128;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("group backend: " + msg);
}

}  // namespace

GroupBackend GroupBackend::dihedral(int rotation_order) {
  const int l = rotation_order;
  if (l < 2) fail("dihedral rotation order must be >= 2");
  if (l % 2 != 0)
    fail("dihedral rotation order " + std::to_string(l) +
         " is odd: the quotient by the even rotations is Z/2, "
         "so the A x B quotient hypothesis fails");
  if (l > kMaxOrder / 2) fail("dihedral rotation order too large");

  GroupBackend b;
  b.order_ = 2 * l;
  b.diameter_target_ = l;
  b.kind_ = "dihedral " + std::to_string(l);
  b.mul_.assign(static_cast<size_t>(b.order_) * b.order_, 0);
  // Ids: j in [0,l) is the rotation r^j, l+j is the reflection r^j s.
  // s r^j = r^-j s gives the four product cases below.
  auto id_rot = [l](int j) { return ((j % l) + l) % l; };
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) {
      b.mul_[static_cast<size_t>(i) * b.order_ + j] = id_rot(i + j);
      b.mul_[static_cast<size_t>(i) * b.order_ + (l + j)] = l + id_rot(i + j);
      b.mul_[static_cast<size_t>(l + i) * b.order_ + j] = l + id_rot(i - j);
      b.mul_[static_cast<size_t>(l + i) * b.order_ + (l + j)] = id_rot(i - j);
    }
  }
  b.gens_a_ = {0, l + 1};  // a = r s
  b.gens_b_ = {0, l};      // b = s
  b.finish_build();
  return b;
}

GroupBackend GroupBackend::from_table(int order, std::vector<ElementId> table,
                                      std::vector<ElementId> gens_a,
                                      std::vector<ElementId> gens_b,
                                      int diameter_target) {
  if (order < 1 || order > kMaxOrder) fail("order out of range");
  if (table.size() != static_cast<size_t>(order) * order)
    fail("multiplication table has wrong size");
  GroupBackend b;
  b.order_ = order;
  b.kind_ = "table " + std::to_string(order);
  b.mul_ = std::move(table);
  b.gens_a_ = std::move(gens_a);
  b.gens_b_ = std::move(gens_b);
  b.finish_build();
  b.diameter_target_ = diameter_target > 0 ? diameter_target : b.diameter_;
  return b;
}

GroupBackend GroupBackend::from_table_stream(std::istream& in) {
  // Keyword format; '#' starts a comment until end of line.
  std::string token;
  int order = -1;
  std::vector<ElementId> table, ga, gb;
  auto read_ids = [&in](std::vector<ElementId>& out) {
    std::string line;
    std::getline(in, line);
    std::istringstream ls(line);
    ElementId v;
    while (ls >> v) out.push_back(v);
  };
  while (in >> token) {
    if (token[0] == '#') {
      std::string rest;
      std::getline(in, rest);
    } else if (token == "order") {
      if (!(in >> order)) fail("table file: missing order value");
    } else if (token == "table") {
      if (order < 0) fail("table file: order must precede table");
      table.resize(static_cast<size_t>(order) * order);
      for (auto& v : table)
        if (!(in >> v)) fail("table file: truncated table");
    } else if (token == "subgroup_a") {
      read_ids(ga);
    } else if (token == "subgroup_b") {
      read_ids(gb);
    } else {
      fail("table file: unknown keyword '" + token + "'");
    }
  }
  if (order < 0 || table.empty()) fail("table file: missing table");
  if (ga.empty() || gb.empty()) fail("table file: missing marked subgroups");
  return from_table(order, std::move(table), std::move(ga), std::move(gb));
}

void GroupBackend::finish_build() {
  const int n = order_;
  auto at = [this, n](ElementId g, ElementId h) -> ElementId {
    return mul_[static_cast<size_t>(g) * n + h];
  };
  for (ElementId v : mul_)
    if (v < 0 || v >= n) fail("table entry out of range");
  for (ElementId g = 0; g < n; ++g)
    if (at(0, g) != g || at(g, 0) != g) fail("id 0 is not a two-sided identity");

  // Latin property and inverses.
  inv_.assign(n, -1);
  for (ElementId g = 0; g < n; ++g) {
    std::vector<char> seen(n, 0);
    for (ElementId h = 0; h < n; ++h) {
      ElementId p = at(g, h);
      if (seen[p]) fail("row " + std::to_string(g) + " is not a permutation");
      seen[p] = 1;
      if (p == 0) inv_[g] = h;
    }
    if (inv_[g] < 0) fail("element has no inverse");
  }
  for (ElementId g = 0; g < n; ++g)
    if (at(inv_[g], g) != 0) fail("left and right inverses disagree");

  if (n <= kFullAssocCheckOrder) {
    for (ElementId g = 0; g < n; ++g)
      for (ElementId h = 0; h < n; ++h)
        for (ElementId k = 0; k < n; ++k)
          if (at(at(g, h), k) != at(g, at(h, k)))
            fail("multiplication table is not associative");
  } else {
    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> d(0, n - 1);
    for (int i = 0; i < 100000; ++i) {
      ElementId g = d(rng), h = d(rng), k = d(rng);
      if (at(at(g, h), k) != at(g, at(h, k)))
        fail("multiplication table is not associative");
    }
  }

  // Normalize the marked subgroup lists: identity first, no duplicates,
  // closed under product and inverse.
  auto normalize = [&](std::vector<ElementId>& gens, const char* name) {
    for (ElementId g : gens)
      if (g < 0 || g >= n) fail(std::string(name) + " id out of range");
    std::vector<ElementId> out{0};
    for (ElementId g : gens)
      if (g != 0 && std::find(out.begin(), out.end(), g) == out.end())
        out.push_back(g);
    for (ElementId g : out) {
      if (std::find(out.begin(), out.end(), inv_[g]) == out.end())
        fail(std::string(name) + " is not closed under inverse");
      for (ElementId h : out)
        if (std::find(out.begin(), out.end(), at(g, h)) == out.end())
          fail(std::string(name) + " is not closed under multiplication");
    }
    gens = std::move(out);
  };
  normalize(gens_a_, "subgroup A");
  normalize(gens_b_, "subgroup B");
  a_index_.assign(n, -1);
  b_index_.assign(n, -1);
  for (size_t i = 0; i < gens_a_.size(); ++i) a_index_[gens_a_[i]] = (int)i;
  for (size_t i = 0; i < gens_b_.size(); ++i) b_index_[gens_b_[i]] = (int)i;

  // Word metric over (A u B) \ {e}; also proves that A u B generates.
  std::vector<ElementId> step_gens;
  for (ElementId g : gens_a_)
    if (g != 0) step_gens.push_back(g);
  for (ElementId g : gens_b_)
    if (g != 0 && a_index_[g] < 0) step_gens.push_back(g);
  word_length_.assign(n, -1);
  word_length_[0] = 0;
  std::deque<ElementId> queue{0};
  int reached = 1;
  while (!queue.empty()) {
    ElementId g = queue.front();
    queue.pop_front();
    for (ElementId s : step_gens) {
      ElementId h = at(g, s);
      if (word_length_[h] < 0) {
        word_length_[h] = word_length_[g] + 1;
        diameter_ = std::max(diameter_, word_length_[h]);
        ++reached;
        queue.push_back(h);
      }
    }
  }
  if (reached != n) fail("A u B does not generate the group");

  // Derived subgroup: closure of all conjugates of commutators [a, b].
  std::set<ElementId> seeds;
  for (ElementId a : gens_a_)
    for (ElementId b : gens_b_) {
      ElementId c = at(at(a, b), at(inv_[a], inv_[b]));
      for (ElementId g = 0; g < n; ++g) seeds.insert(at(at(g, c), inv_[g]));
    }
  in_derived_.assign(n, 0);
  in_derived_[0] = 1;
  std::deque<ElementId> dq{0};
  derived_order_ = 1;
  while (!dq.empty()) {
    ElementId g = dq.front();
    dq.pop_front();
    for (ElementId s : seeds) {
      ElementId h = at(g, s);
      if (!in_derived_[h]) {
        in_derived_[h] = 1;
        ++derived_order_;
        dq.push_back(h);
      }
    }
  }

  // Unique decomposition g = g' * a * b with g' in the derived subgroup.
  // Uniqueness for every g is exactly the A x B quotient hypothesis.
  if (derived_order_ * (int)gens_a_.size() * (int)gens_b_.size() != n)
    fail("quotient by the derived subgroup does not have order |A||B|");
  theta_.assign(n, ThetaImage{});
  derived_.assign(n, -1);
  for (ElementId g = 0; g < n; ++g) {
    int found = 0;
    for (ElementId a : gens_a_)
      for (ElementId b : gens_b_) {
        ElementId d = at(g, inv_[at(a, b)]);
        if (in_derived_[d]) {
          ++found;
          theta_[g] = ThetaImage{a, b};
          derived_[g] = d;
        }
      }
    if (found != 1)
      fail("decomposition g = g'*a*b is not unique; the quotient map "
           "A x B -> G/G' is not an isomorphism");
  }
}

ElementId GroupBackend::mul(ElementId g, ElementId h) const {
  if (!valid_id(g) || !valid_id(h)) throw std::out_of_range("bad element id");
  return mul_[static_cast<size_t>(g) * order_ + h];
}

ElementId GroupBackend::inv(ElementId g) const {
  if (!valid_id(g)) throw std::out_of_range("bad element id");
  return inv_[g];
}

ThetaImage GroupBackend::theta(ElementId g) const {
  if (!valid_id(g)) throw std::out_of_range("bad element id");
  return theta_[g];
}

ElementId GroupBackend::derived_part(ElementId g) const {
  if (!valid_id(g)) throw std::out_of_range("bad element id");
  return derived_[g];
}

bool GroupBackend::in_derived(ElementId g) const {
  if (!valid_id(g)) throw std::out_of_range("bad element id");
  return in_derived_[g] != 0;
}

int GroupBackend::word_length(ElementId g) const {
  if (!valid_id(g)) throw std::out_of_range("bad element id");
  return word_length_[g];
}

int GroupBackend::a_index(ElementId g) const {
  if (!valid_id(g) || a_index_[g] < 0)
    throw std::out_of_range("element is not in subgroup A");
  return a_index_[g];
}

int GroupBackend::b_index(ElementId g) const {
  if (!valid_id(g) || b_index_[g] < 0)
    throw std::out_of_range("element is not in subgroup B");
  return b_index_[g];
}

GroupDescriptor parse_group_descriptor(const std::string& text) {
  std::istringstream in(text);
  GroupDescriptor d;
  in >> d.kind;
  if (d.kind == "dihedral") {
    if (!(in >> d.rotation_order))
      throw std::invalid_argument("backend descriptor: dihedral needs a rotation order");
  } else if (d.kind == "table") {
    in >> std::ws;
    std::getline(in, d.table_path);
    if (d.table_path.empty())
      throw std::invalid_argument("backend descriptor: table needs a file path");
  } else {
    throw std::invalid_argument("backend descriptor: unknown kind '" + d.kind + "'");
  }
  return d;
}

GroupBackend make_backend(const GroupDescriptor& desc) {
  if (desc.kind == "dihedral") return GroupBackend::dihedral(desc.rotation_order);
  std::ifstream in(desc.table_path);
  if (!in) throw std::invalid_argument("cannot open table file " + desc.table_path);
  return GroupBackend::from_table_stream(in);
}

}  // namespace diagprod
