#include "diagprod/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace diagprod {

namespace {

int64_t ipow64(int64_t base, int exp) {
  int64_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > (int64_t{1} << 61) / base)
      throw CapExceeded("power overflows the materialized range");
    out *= base;
  }
  return out;
}

double to_double(const BigInt& v) { return v.convert_to<double>(); }

// One enumeration slot: a site of g0 (level 0) or of g'_level, together
// with the element ids it may take (identity included).
struct Slot {
  int level;
  int64_t pos;
  const std::vector<ElementId>* values;
};

std::vector<ElementId> all_ids(const GroupBackend& g) {
  std::vector<ElementId> out(g.order());
  for (int i = 0; i < g.order(); ++i) out[i] = i;
  return out;
}

std::vector<ElementId> derived_ids(const GroupBackend& g) {
  std::vector<ElementId> out;
  for (int i = 0; i < g.order(); ++i)
    if (g.in_derived(i)) out.push_back(i);
  return out;
}

// Appends every assignment of values to the slots, as elements with the
// given cursor. Slots must be grouped by level with ascending positions so
// that the built configurations keep their entries sorted.
void enumerate_slots(const DeltaContext& ctx, const std::vector<Slot>& slots,
                     int64_t t, std::vector<DeltaElement>& out) {
  std::vector<size_t> digit(slots.size(), 0);
  for (;;) {
    DeltaElement x;
    x.t = t;
    x.gprime.resize(ctx.levels());
    for (size_t s = 0; s < slots.size(); ++s) {
      ElementId v = (*slots[s].values)[digit[s]];
      if (v == 0) continue;
      if (slots[s].level == 0)
        x.g0.entries.emplace_back(slots[s].pos, v);
      else
        x.gprime[slots[s].level - 1].entries.emplace_back(slots[s].pos, v);
    }
    out.push_back(std::move(x));
    size_t s = 0;
    while (s < slots.size() && ++digit[s] == slots[s].values->size())
      digit[s++] = 0;
    if (s == slots.size()) break;
  }
}

BigInt slot_count(const std::vector<Slot>& slots) {
  BigInt n = 1;
  for (const Slot& s : slots) n *= static_cast<int64_t>(s.values->size());
  return n;
}

void check_cap(const BigInt& count, uint64_t cap, const char* what) {
  if (count > cap)
    throw CapExceeded(std::string(what) + " needs " + count.str() +
                      " elements, cap is " + std::to_string(cap));
}

bool entries_within(const LampConfig& c, int64_t lo, int64_t hi) {
  for (const auto& [pos, val] : c.entries)
    if (pos < lo || pos > hi) return false;
  return true;
}

bool entries_within_union(const LampConfig& c, int64_t lo1, int64_t hi1,
                          int64_t lo2, int64_t hi2) {
  for (const auto& [pos, val] : c.entries)
    if ((pos < lo1 || pos > hi1) && (pos < lo2 || pos > hi2)) return false;
  return true;
}

}  // namespace

bool in_folner(const DeltaContext& ctx, const DeltaElement& x, int64_t n) {
  if (n < 1) throw std::invalid_argument("window size must be positive");
  if (x.t < 0 || x.t > n - 1) return false;
  if (!entries_within(x.g0, 0, n - 1)) return false;
  for (int m = 1; m <= ctx.levels(); ++m)
    if (!entries_within(x.gprime[m - 1], ctx.k(m), n - 1)) return false;
  return true;
}

BigInt folner_cardinality(const DeltaContext& ctx, int64_t n) {
  if (n < 1) throw std::invalid_argument("window size must be positive");
  BigInt total = n;
  total *= boost::multiprecision::pow(BigInt(ctx.lamp_group().order()),
                                      static_cast<unsigned>(n));
  for (int m = 1; m <= ctx.levels(); ++m) {
    if (ctx.k(m) > n - 1) break;
    total *= boost::multiprecision::pow(
        BigInt(ctx.backend(m).derived_order()),
        static_cast<unsigned>(n - ctx.k(m)));
  }
  return total;
}

FolnerSet enumerate_folner(const DeltaContext& ctx, int64_t n, uint64_t cap) {
  check_cap(folner_cardinality(ctx, n), cap, "Folner set");

  std::vector<ElementId> lamp_vals = all_ids(ctx.lamp_group());
  std::vector<std::vector<ElementId>> der_vals(ctx.levels() + 1);
  std::vector<Slot> slots;
  for (int64_t p = 0; p < n; ++p) slots.push_back({0, p, &lamp_vals});
  for (int m = 1; m <= ctx.levels(); ++m) {
    if (ctx.k(m) > n - 1) continue;
    der_vals[m] = derived_ids(ctx.backend(m));
    for (int64_t p = ctx.k(m); p < n; ++p)
      slots.push_back({m, p, &der_vals[m]});
  }

  FolnerSet out;
  out.n = n;
  std::vector<DeltaElement> configs;
  enumerate_slots(ctx, slots, 0, configs);
  out.elements.reserve(configs.size() * n);
  for (int64_t t = 0; t < n; ++t)
    for (const DeltaElement& c : configs) {
      out.elements.push_back(c);
      out.elements.back().t = t;
    }
  std::sort(out.elements.begin(), out.elements.end());
  return out;
}

uint64_t boundary_count(const DeltaContext& ctx, const FolnerSet& f) {
  (void)ctx;
  uint64_t count = 0;
  for (const DeltaElement& x : f.elements)
    if (x.t == 0 || x.t == f.n - 1) ++count;
  return count;
}

std::vector<GeneratorEscape> escape_counts(const DeltaContext& ctx,
                                           const FolnerSet& f) {
  std::vector<GeneratorEscape> out;
  for (const Gen& g : symmetric_generators(ctx)) {
    DeltaElement ge = generator(ctx, g);
    uint64_t exits = 0;
    for (const DeltaElement& x : f.elements)
      if (!in_folner(ctx, multiply(ctx, x, ge), f.n)) ++exits;
    out.push_back({g, exits});
  }
  return out;
}

uint64_t ShiftSet::size() const {
  uint64_t n = 0;
  for (const auto& p : parts) n += p.size();
  return n;
}

const DeltaElement& ShiftSet::at(uint64_t idx) const {
  for (const auto& p : parts) {
    if (idx < p.size()) return p[idx];
    idx -= p.size();
  }
  throw std::out_of_range("shift index out of range");
}

bool in_shift_part(const DeltaContext& ctx, const DeltaElement& x, int level,
                   int j) {
  if (level < 1) throw std::invalid_argument("shift level must be >= 1");
  if (j < 0 || j >= ctx.kappa()) return false;
  int64_t p = ipow64(ctx.kappa(), level - 1);
  int64_t P = p * ctx.kappa();
  int l_prev = ctx.little_l(p - 1);
  int l_cur = ctx.little_l(P - 1);
  if (x.t != j * p) return false;
  if (!entries_within_union(x.g0, 0, j * p - 1, (j + 1) * p, P - 1))
    return false;
  for (int m = 1; m <= ctx.levels(); ++m) {
    const LampConfig& c = x.gprime[m - 1];
    if (m <= l_prev) {
      if (!entries_within_union(c, ctx.k(m), j * p + ctx.k(m) - 1,
                                (j + 1) * p, P - 1))
        return false;
    } else if (m == l_cur && l_cur == l_prev + 1) {
      if (!entries_within(c, ctx.k(m), P - 1)) return false;
    } else {
      if (!c.empty()) return false;
    }
  }
  return true;
}

ShiftSet build_shift(const DeltaContext& ctx, int level, uint64_t cap) {
  if (level < 1) throw std::invalid_argument("shift level must be >= 1");
  int64_t p = ipow64(ctx.kappa(), level - 1);
  int64_t P = p * ctx.kappa();
  int l_prev = ctx.little_l(p - 1);
  int l_cur = ctx.little_l(P - 1);
  if (l_cur > l_prev + 1)
    throw InvariantViolation(
        "more than one new level between consecutive tile sizes");

  std::vector<ElementId> lamp_vals = all_ids(ctx.lamp_group());
  std::vector<std::vector<ElementId>> der_vals(ctx.levels() + 1);
  for (int m = 1; m <= ctx.levels(); ++m)
    der_vals[m] = derived_ids(ctx.backend(m));

  ShiftSet out;
  out.level = level;
  out.parts.resize(ctx.kappa());
  for (int j = 0; j < ctx.kappa(); ++j) {
    std::vector<Slot> slots;
    for (int64_t q = 0; q < j * p; ++q) slots.push_back({0, q, &lamp_vals});
    for (int64_t q = (j + 1) * p; q < P; ++q)
      slots.push_back({0, q, &lamp_vals});
    for (int m = 1; m <= l_prev; ++m) {
      for (int64_t q = ctx.k(m); q < j * p + ctx.k(m); ++q)
        slots.push_back({m, q, &der_vals[m]});
      for (int64_t q = (j + 1) * p; q < P; ++q)
        slots.push_back({m, q, &der_vals[m]});
    }
    if (l_cur == l_prev + 1)
      for (int64_t q = ctx.k(l_cur); q < P; ++q)
        slots.push_back({l_cur, q, &der_vals[l_cur]});
    check_cap(slot_count(slots) * ctx.kappa(), cap, "shift set");
    enumerate_slots(ctx, slots, j * p, out.parts[j]);
    std::sort(out.parts[j].begin(), out.parts[j].end());
  }
  return out;
}

TileTower build_tiles(const DeltaContext& ctx, int top_level, uint64_t cap) {
  if (top_level < 0) throw std::invalid_argument("negative tile level");
  TileTower tower;
  tower.tiles.push_back(enumerate_folner(ctx, 1, cap));
  for (int n = 1; n <= top_level; ++n) {
    ShiftSet shift = build_shift(ctx, n, cap);
    const std::vector<DeltaElement>& prev = tower.tiles[n - 1].elements;
    check_cap(BigInt(shift.size()) * static_cast<int64_t>(prev.size()), cap,
              "tile");
    std::vector<DeltaElement> products;
    products.reserve(shift.size() * prev.size());
    for (const auto& part : shift.parts)
      for (const DeltaElement& sigma : part)
        for (const DeltaElement& tau : prev)
          products.push_back(multiply(ctx, sigma, tau));
    std::sort(products.begin(), products.end());
    if (std::adjacent_find(products.begin(), products.end()) !=
        products.end())
      throw InvariantViolation("shifted tiles overlap at level " +
                               std::to_string(n));
    FolnerSet expected = enumerate_folner(ctx, ipow64(ctx.kappa(), n), cap);
    if (products != expected.elements)
      throw InvariantViolation("shifted tiles do not cover the window at "
                               "level " +
                               std::to_string(n));
    expected.elements = std::move(products);
    tower.tiles.push_back(std::move(expected));
    tower.shifts.push_back(std::move(shift));
  }
  return tower;
}

BigInt tile_cardinality(const DeltaContext& ctx, int n, uint64_t cap) {
  if (n < 0) throw std::invalid_argument("negative tile level");
  int64_t P = ipow64(ctx.kappa(), n);
  if (static_cast<uint64_t>(P) > cap)
    throw CapExceeded("tile window exceeds the cap");
  return folner_cardinality(ctx, P);
}

ShiftFactor decompose_step(const DeltaContext& ctx, const DeltaElement& h,
                           int level) {
  if (level < 1) throw std::invalid_argument("decompose level must be >= 1");
  int64_t p = ipow64(ctx.kappa(), level - 1);
  int64_t P = p * ctx.kappa();
  if (!in_folner(ctx, h, P))
    throw std::invalid_argument("element outside the tile being decomposed");

  ShiftFactor out;
  out.j = static_cast<int>(h.t / p);
  int64_t base = out.j * p;
  out.rest.t = h.t - base;
  out.rest.gprime.resize(ctx.levels());
  for (const auto& [pos, val] : h.g0.entries)
    if (pos >= base && pos < base + p)
      out.rest.g0.entries.emplace_back(pos - base, val);
  for (int m = 1; m <= ctx.levels(); ++m) {
    if (ctx.k(m) > p - 1) continue;
    for (const auto& [pos, val] : h.gprime[m - 1].entries)
      if (pos >= base + ctx.k(m) && pos < base + p)
        out.rest.gprime[m - 1].entries.emplace_back(pos - base, val);
  }
  out.sigma = multiply(ctx, h, inverse(ctx, out.rest));
  if (!in_folner(ctx, out.rest, p))
    throw InvariantViolation("decomposition remainder escapes the sub-tile");
  if (!in_shift_part(ctx, out.sigma, level, out.j))
    throw InvariantViolation("decomposition shift escapes its part");
  return out;
}

ZShift z_shift(const TileTower& tower, int level) {
  if (level < 0 || level > tower.top_level())
    throw std::out_of_range("shift level outside the tower");
  if (level == 0)
    return {0, 1, tower.tiles[0].elements.size()};
  return {level, BigInt(tower.tiles[level - 1].elements.size()),
          tower.shifts[level - 1].size()};
}

BigInt z_tile_size(const TileTower& tower, int level) {
  if (level < 0 || level > tower.top_level())
    throw std::out_of_range("tile level outside the tower");
  return BigInt(tower.tiles[level].elements.size());
}

double synthetic_ln_tile(const ParameterSchedule& s, int n,
                         const SyntheticParams& p) {
  if (n < 0) throw std::invalid_argument("negative tile level");
  double kn = to_double(int_pow(s.kappa, n));
  double sum = n * std::log(static_cast<double>(s.kappa)) +
               kn * std::log(p.ab);
  int L = big_L(s, n);
  for (int m = 1; m <= L; ++m) {
    double km = to_double(s.k_value(m));
    double lm = to_double(s.l_value(m));
    sum += (kn - km) * (p.c1 * lm - std::log(p.ab));
  }
  return sum;
}

SyntheticConstants synthetic_constants(const ParameterSchedule& s, int n_max,
                                       const SyntheticParams& p) {
  if (p.ab <= 1.0 || p.c1 <= 0.0 || p.c2 < 0.0)
    throw std::invalid_argument("synthetic sizes need ab > 1, c1 > 0, "
                                "c2 >= 0");
  int M = big_L(s, n_max);
  double ln_ab = std::log(p.ab);
  SyntheticConstants c;

  double sum_diam = 0;
  for (int j = 0; j <= M; ++j) {
    double lj = to_double(s.l_value(j));
    sum_diam += 3 * lj + 1;
    c.c_l = std::max(c.c_l, sum_diam / lj);
  }
  c.c_r = c.c_l;
  c.c_diam = 4500 * c.c_l;

  if (M == 0) {
    c.c_1 = 0;
    c.c_2 = ln_ab;
  } else {
    double sum_sz = 0;
    c.c_2 = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= M; ++m) {
      double lm = to_double(s.l_value(m));
      sum_sz += p.c1 * lm + p.c2;
      c.c_1 = std::max(c.c_1, sum_sz / lm);
      c.c_2 = std::min(c.c_2, (p.c1 * lm - p.c2 - ln_ab) / lm);
    }
    if (c.c_2 <= 0)
      throw InvariantViolation(
          "synthetic lamp groups are not larger than their quotient");
  }
  c.c_3 = std::log(static_cast<double>(s.kappa)) + ln_ab + c.c_1;
  return c;
}

TileStats quantify(const ParameterSchedule& s, int n,
                   const SyntheticParams& p) {
  TileStats st;
  st.n = n;
  st.params = p;
  st.constants = synthetic_constants(s, n, p);
  st.ln_cardinality = synthetic_ln_tile(s, n, p);
  double kn = to_double(int_pow(s.kappa, n));
  st.r_n = st.constants.c_r * kn * to_double(s.l_value(big_L(s, n)));
  st.eps_n = 2.0 / kn;
  st.ln_r_prime = st.ln_cardinality;
  st.ln_eps_prime = std::log(2.0) - st.ln_cardinality;
  return st;
}

TileStats quantify_materialized(const DeltaContext& ctx,
                                const ParameterSchedule& s,
                                const TileTower& tower, int n,
                                const SyntheticParams& p,
                                uint64_t diameter_cap) {
  if (n < 0 || n > tower.top_level())
    throw std::out_of_range("tile level outside the tower");
  TileStats st = quantify(s, n, p);
  const std::vector<DeltaElement>& tile = tower.tiles[n].elements;
  st.exact_cardinality = BigInt(tile.size());
  st.ln_cardinality = std::log(static_cast<double>(tile.size()));
  st.ln_r_prime = st.ln_cardinality;
  st.ln_eps_prime = std::log(2.0) - st.ln_cardinality;

  if (tile.size() <= diameter_cap) {
    int64_t hi = ipow64(ctx.kappa(), n) - 1;
    auto dist = box_word_lengths(ctx, -hi, hi);
    int64_t diam = 0;
    for (const DeltaElement& x : tile) {
      DeltaElement xi = inverse(ctx, x);
      for (const DeltaElement& y : tile)
        diam = std::max(diam, static_cast<int64_t>(dist.at(
                                  serialize(multiply(ctx, xi, y)))));
    }
    st.exact_diameter = diam;
    double bound = st.constants.c_diam * to_double(int_pow(ctx.kappa(), n)) *
                   to_double(s.l_value(big_L(s, n)));
    if (static_cast<double>(diam) > bound)
      throw InvariantViolation("exact diameter exceeds its stated bound");
  }
  return st;
}

ParameterSchedule truncate_schedule(const ParameterSchedule& s, int depth) {
  if (depth < 0) throw std::invalid_argument("negative depth");
  if (depth >= s.max_level()) {
    if (depth > s.max_level() && !s.terminated)
      throw std::out_of_range("truncation depth beyond materialized levels");
    ParameterSchedule out = s;
    out.terminated = true;
    return out;
  }
  ParameterSchedule out = s;
  out.k.resize(depth + 1);
  out.k_exp.resize(depth + 1);
  out.l.resize(depth + 1);
  out.l_exp.resize(depth + 1);
  out.terminated = true;
  return out;
}

}  // namespace diagprod
