#include "diagprod/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace diagprod {

namespace {

int64_t level_window(const DeltaContext& ctx, int n) {
  int64_t out = 1;
  for (int i = 0; i < n; ++i) out *= ctx.kappa();
  return out;
}

}  // namespace

CouplingSpace::CouplingSpace(DeltaContext ctx, TileTower tower)
    : ctx_(std::move(ctx)), tower_(std::move(tower)) {
  if (tower_.tiles.empty())
    throw std::invalid_argument("coupling space needs at least tile 0");
  weight_.push_back(1);
  for (int n = 0; n <= tower_.top_level(); ++n) {
    int64_t radix = n == 0
                        ? static_cast<int64_t>(tower_.tiles[0].elements.size())
                        : static_cast<int64_t>(tower_.shifts[n - 1].size());
    weight_.push_back(weight_.back() * radix);
    if (weight_.back() !=
        static_cast<int64_t>(tower_.tiles[n].elements.size()))
      throw InvariantViolation("tile sizes do not multiply up the tower");
  }
}

int64_t CouplingSpace::tile_size(int n) const {
  if (n < 0 || n > top_level())
    throw std::out_of_range("tile level outside the tower");
  return static_cast<int64_t>(tower_.tiles[n].elements.size());
}

int64_t CouplingSpace::shift_size(int n) const {
  if (n < 1 || n > top_level())
    throw std::out_of_range("shift level outside the tower");
  return static_cast<int64_t>(tower_.shifts[n - 1].size());
}

DeltaElement addr_to_delta(const CouplingSpace& space, const CouplingPoint& x) {
  const int levels = space.top_level();
  if (static_cast<int>(x.idx.size()) != levels + 1)
    throw std::out_of_range("address has the wrong number of digits");
  if (x.idx[0] < 0 || x.idx[0] >= space.tile_size(0))
    throw std::out_of_range("level-0 digit out of range");
  DeltaElement h = space.tower().tiles[0].elements[x.idx[0]];
  for (int n = 1; n <= levels; ++n) {
    if (x.idx[n] < 0 || x.idx[n] >= space.shift_size(n))
      throw std::out_of_range("shift digit out of range");
    h = multiply(space.context(),
                 space.tower().shifts[n - 1].at(x.idx[n]), h);
  }
  return h;
}

CouplingPoint delta_to_addr(const CouplingSpace& space, const DeltaElement& h) {
  const DeltaContext& ctx = space.context();
  const int levels = space.top_level();
  CouplingPoint out;
  out.idx.assign(levels + 1, 0);
  DeltaElement rest = h;
  for (int n = levels; n >= 1; --n) {
    ShiftFactor f = decompose_step(ctx, rest, n);
    const ShiftSet& shift = space.tower().shifts[n - 1];
    int64_t offset = 0;
    for (int j = 0; j < f.j; ++j)
      offset += static_cast<int64_t>(shift.parts[j].size());
    const auto& part = shift.parts[f.j];
    auto it = std::lower_bound(part.begin(), part.end(), f.sigma);
    if (it == part.end() || !(*it == f.sigma))
      throw InvariantViolation("shift factor missing from its part");
    out.idx[n] = offset + (it - part.begin());
    rest = std::move(f.rest);
  }
  const auto& base = space.tower().tiles[0].elements;
  auto it = std::lower_bound(base.begin(), base.end(), rest);
  if (it == base.end() || !(*it == rest))
    throw InvariantViolation("decomposition remainder missing from tile 0");
  out.idx[0] = it - base.begin();
  return out;
}

int64_t addr_to_int(const CouplingSpace& space, const CouplingPoint& x) {
  const int levels = space.top_level();
  if (static_cast<int>(x.idx.size()) != levels + 1)
    throw std::out_of_range("address has the wrong number of digits");
  int64_t v = 0;
  for (int n = 0; n <= levels; ++n) {
    int64_t radix = n == 0 ? space.tile_size(0) : space.shift_size(n);
    if (x.idx[n] < 0 || x.idx[n] >= radix)
      throw std::out_of_range("address digit out of range");
    v += x.idx[n] * (n == 0 ? 1 : space.tile_size(n - 1));
  }
  return v;
}

CouplingPoint int_to_addr(const CouplingSpace& space, int64_t v) {
  if (v < 0 || v >= space.space_size())
    throw std::out_of_range("integer outside the truncated interval");
  const int levels = space.top_level();
  CouplingPoint out;
  out.idx.assign(levels + 1, 0);
  for (int n = 0; n <= levels; ++n) {
    int64_t radix = n == 0 ? space.tile_size(0) : space.shift_size(n);
    out.idx[n] = v % radix;
    v /= radix;
  }
  return out;
}

std::optional<CouplingPoint> act_delta(const CouplingSpace& space,
                                       const Gen& s, const CouplingPoint& x) {
  const DeltaContext& ctx = space.context();
  DeltaElement y =
      multiply(ctx, addr_to_delta(space, x), generator(ctx, s));
  if (!in_folner(ctx, y, level_window(ctx, space.top_level())))
    return std::nullopt;
  return delta_to_addr(space, y);
}

std::optional<CouplingPoint> act_z(const CouplingSpace& space, int d,
                                   const CouplingPoint& x) {
  int64_t v = addr_to_int(space, x) + d;
  if (v < 0 || v >= space.space_size()) return std::nullopt;
  return int_to_addr(space, v);
}

std::optional<int64_t> schreier_distance_z(const CouplingSpace& space,
                                           const CouplingPoint& x,
                                           const Gen& s) {
  std::optional<CouplingPoint> y = act_delta(space, s, x);
  if (!y) return std::nullopt;
  return std::llabs(addr_to_int(space, *y) - addr_to_int(space, x));
}

std::optional<DeltaDistance> schreier_distance_delta(const CouplingSpace& space,
                                                     const CouplingPoint& x,
                                                     int d, int radius_cap,
                                                     int node_cap) {
  std::optional<CouplingPoint> y = act_z(space, d, x);
  if (!y) return std::nullopt;
  const DeltaContext& ctx = space.context();
  DeltaElement z = multiply(ctx, inverse(ctx, addr_to_delta(space, x)),
                            addr_to_delta(space, *y));
  DeltaDistance out;
  out.upper = metric_upper_bound(ctx, z);
  int radius = static_cast<int>(
      std::min<int64_t>(out.upper, static_cast<int64_t>(radius_cap)));
  out.exact = word_length_exact(ctx, z, radius,
                                static_cast<size_t>(node_cap));
  return out;
}

double phi_eps_ln(const ProfileSpec& profile, double eps, double ln_x) {
  if (ln_x < 1.0) return 0.0;
  double r = profile.rho(ln_x);
  return r / std::pow(std::max(std::log(r), 1.0), 1.0 + eps);
}

double phi_eps(const ProfileSpec& profile, double eps, double x) {
  if (x <= 0.0) return 0.0;
  return phi_eps_ln(profile, eps, std::log(x));
}

namespace {

SeriesReport series_core(const ProfileSpec& profile,
                         const ParameterSchedule& s, double eps, int n_max,
                         const SyntheticParams& p,
                         const std::vector<double>* exact_ln_sizes) {
  if (n_max < 1) throw std::invalid_argument("series horizon must be >= 1");
  SeriesReport rep;
  rep.eps = eps;
  rep.constants = synthetic_constants(s, n_max, p);
  auto ln_tile = [&](int n) {
    return exact_ln_sizes ? (*exact_ln_sizes)[n] : synthetic_ln_tile(s, n, p);
  };
  const double ln_kappa = std::log(static_cast<double>(s.kappa));
  for (int n = 1; n <= n_max; ++n) {
    SeriesRow row;
    row.n = n;
    double kn = int_pow(s.kappa, n).convert_to<double>();
    double r_n = rep.constants.c_r * kn *
                 s.l_value(big_L(s, n)).convert_to<double>();
    row.ln_psi_term = profile.rho(2 * r_n) + std::log(2.0) - ln_tile(n - 1);
    row.psi_term = std::exp(row.ln_psi_term);
    double eps_prev = 2.0 * s.kappa / kn;  // 2 / kappa^(n-1)
    row.phi_term =
        phi_eps_ln(profile, eps, std::log(2.0) + ln_tile(n)) * eps_prev;
    if (n >= 2)
      row.phi_comparator =
          s.kappa / std::pow((n - 1) * ln_kappa, 1.0 + eps);
    rep.rows.push_back(row);
  }
  double psi_acc = 0, phi_acc = 0;
  for (SeriesRow& row : rep.rows) {
    psi_acc += row.psi_term;
    phi_acc += row.phi_term;
    row.psi_partial = psi_acc;
    row.phi_partial = phi_acc;
  }
  double psi_tail = 0, phi_tail = 0;
  for (auto it = rep.rows.rbegin(); it != rep.rows.rend(); ++it) {
    it->psi_tail = psi_tail;
    it->phi_tail = phi_tail;
    psi_tail += it->psi_term;
    phi_tail += it->phi_term;
  }
  rep.n0 = 2;
  // Compared in log space: deep terms underflow to equal zeros otherwise.
  for (size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].ln_psi_term >= rep.rows[i - 1].ln_psi_term)
      rep.n0 = rep.rows[i].n + 1;
  return rep;
}

}  // namespace

SeriesReport series_report(const ProfileSpec& profile,
                           const ParameterSchedule& s, double eps, int n_max,
                           const SyntheticParams& p) {
  SeriesReport rep = series_core(profile, s, eps, n_max, p, nullptr);
  rep.mode = "synthetic";
  return rep;
}

SeriesReport series_report_materialized(const ProfileSpec& profile,
                                        const ParameterSchedule& s,
                                        const CouplingSpace& space, double eps,
                                        const SyntheticParams& p) {
  std::vector<double> ln_sizes;
  for (int n = 0; n <= space.top_level(); ++n)
    ln_sizes.push_back(std::log(static_cast<double>(space.tile_size(n))));
  SeriesReport rep = series_core(profile, s, eps, space.top_level(), p,
                                 &ln_sizes);
  rep.mode = "materialized";
  return rep;
}

SimulationReport simulate(const CouplingSpace& space,
                          const SimulateOptions& opt) {
  const DeltaContext& ctx = space.context();
  const int64_t size = space.space_size();
  const int64_t window = level_window(ctx, space.top_level());

  SimulationReport rep;
  rep.level = space.top_level();
  rep.eps = opt.eps;
  rep.exhaustive = static_cast<uint64_t>(size) <= opt.exhaustive_threshold;
  rep.seed = rep.exhaustive ? 0 : opt.seed;

  std::vector<int64_t> points;
  if (rep.exhaustive) {
    points.resize(size);
    std::iota(points.begin(), points.end(), int64_t{0});
  } else {
    // Modulo with rejection keeps draws uniform and platform-independent.
    std::mt19937_64 rng(opt.seed);
    uint64_t range = static_cast<uint64_t>(size);
    uint64_t limit =
        std::numeric_limits<uint64_t>::max() -
        std::numeric_limits<uint64_t>::max() % range;
    points.reserve(opt.samples);
    while (points.size() < opt.samples) {
      uint64_t r = rng();
      if (r < limit) points.push_back(static_cast<int64_t>(r % range));
    }
  }
  rep.points = points.size();

  std::vector<Gen> gens = symmetric_generators(ctx);
  std::vector<DeltaElement> gen_elems;
  rep.delta_gens.resize(gens.size());
  for (size_t i = 0; i < gens.size(); ++i) {
    rep.delta_gens[i].gen = gens[i];
    gen_elems.push_back(generator(ctx, gens[i]));
  }

  for (int64_t v : points) {
    DeltaElement h = addr_to_delta(space, int_to_addr(space, v));
    for (size_t i = 0; i < gens.size(); ++i) {
      DeltaGenStats& st = rep.delta_gens[i];
      DeltaElement y = multiply(ctx, h, gen_elems[i]);
      if (!in_folner(ctx, y, window)) {
        ++st.out_of_truncation;
        continue;
      }
      ++st.domain;
      int64_t w = addr_to_int(space, delta_to_addr(space, y));
      ++st.z_histogram[std::llabs(w - v)];
    }
  }
  for (DeltaGenStats& st : rep.delta_gens) {
    if (st.domain == 0) continue;
    for (int g = 0; g < kMomentGridSize; ++g) {
      double c = static_cast<double>(int64_t{1} << g);
      double sum = 0;
      for (const auto& [d, count] : st.z_histogram)
        sum += static_cast<double>(count) *
               phi_eps(opt.profile, opt.eps, static_cast<double>(d) / c);
      st.moments[g] = sum / static_cast<double>(st.domain);
    }
  }

  rep.z_gens.resize(2);
  rep.z_gens[0].d = 1;
  rep.z_gens[1].d = -1;
  uint64_t stride = 1;
  if (opt.exact_samples > 0 && points.size() > opt.exact_samples)
    stride = points.size() / opt.exact_samples;
  for (ZGenStats& st : rep.z_gens) {
    uint64_t k = 0;
    for (int64_t v : points) {
      int64_t w = v + st.d;
      if (w < 0 || w >= size) {
        ++st.out_of_truncation;
        continue;
      }
      ++st.domain;
      DeltaElement z = multiply(
          ctx, inverse(ctx, addr_to_delta(space, int_to_addr(space, v))),
          addr_to_delta(space, int_to_addr(space, w)));
      int64_t upper = metric_upper_bound(ctx, z);
      ++st.upper_histogram[upper];
      if (opt.exact_samples > 0 && k++ % stride == 0) {
        ++st.exact_attempted;
        int radius = static_cast<int>(std::min<int64_t>(
            upper, static_cast<int64_t>(opt.radius_cap)));
        std::optional<int> exact = word_length_exact(
            ctx, z, radius, static_cast<size_t>(opt.node_cap));
        if (exact)
          ++st.exact_histogram[*exact];
        else
          ++st.exact_unknown;
      }
    }
  }
  return rep;
}

}  // namespace diagprod
