#include "diagprod/delta.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace diagprod {
namespace {

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b, r = a % b;
  return (r != 0 && (r < 0) != (b < 0)) ? q - 1 : q;
}

[[noreturn]] void parse_fail(const std::string& msg) {
  throw std::invalid_argument("element parse: " + msg);
}

}  // namespace

ElementId LampConfig::at(int64_t pos) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), pos,
      [](const std::pair<int64_t, ElementId>& e, int64_t p) { return e.first < p; });
  return (it != entries.end() && it->first == pos) ? it->second : 0;
}

void LampConfig::set(int64_t pos, ElementId value) {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), pos,
      [](const std::pair<int64_t, ElementId>& e, int64_t p) { return e.first < p; });
  if (it != entries.end() && it->first == pos) {
    if (value == 0)
      entries.erase(it);
    else
      it->second = value;
  } else if (value != 0) {
    entries.insert(it, {pos, value});
  }
}

DeltaContext::DeltaContext(int kappa, std::vector<int64_t> k,
                           std::vector<std::shared_ptr<const GroupBackend>> backends)
    : kappa_(kappa), k_(std::move(k)), backends_(std::move(backends)) {
  if (kappa_ < 2) throw std::invalid_argument("context: kappa must be >= 2");
  if (k_.empty() || k_[0] != 0)
    throw std::invalid_argument("context: k_0 must be 0");
  for (size_t m = 1; m < k_.size(); ++m) {
    if (k_[m] < 1 || k_[m] <= k_[m - 1])
      throw std::invalid_argument("context: k must be strictly increasing");
    if (m >= 2 && k_[m] < 2 * k_[m - 1])
      throw std::invalid_argument("context: k_{m+1} >= 2 k_m violated");
  }
  if (backends_.size() != k_.size())
    throw std::invalid_argument("context: one backend per finite level required");
  for (const auto& b : backends_)
    if (!b) throw std::invalid_argument("context: null backend");
  if (backends_[0]->derived_order() != 1)
    throw std::invalid_argument(
        "context: level 0 must be a direct product A x B "
        "(trivial derived subgroup)");
  a_size_ = static_cast<int>(backends_[0]->gens_a().size());
  b_size_ = static_cast<int>(backends_[0]->gens_b().size());
  for (const auto& b : backends_)
    if (static_cast<int>(b->gens_a().size()) != a_size_ ||
        static_cast<int>(b->gens_b().size()) != b_size_)
      throw std::invalid_argument(
          "context: marked subgroup sizes must agree across levels");
}

int DeltaContext::little_l(int64_t n) const {
  int m = 0;
  while (m + 1 <= levels() && k_[m + 1] <= n) ++m;
  return m;
}

std::vector<Gen> symmetric_generators(const DeltaContext& ctx) {
  std::vector<Gen> out;
  out.push_back({GenKind::CursorPlus, 0});
  out.push_back({GenKind::CursorMinus, 0});
  for (int i = 1; i < ctx.a_size(); ++i) out.push_back({GenKind::AWrite, i});
  for (int j = 1; j < ctx.b_size(); ++j) out.push_back({GenKind::BWrite, j});
  return out;
}

DeltaElement identity(const DeltaContext& ctx) {
  DeltaElement e;
  e.gprime.resize(ctx.levels());
  return e;
}

bool is_identity(const DeltaElement& x) {
  if (x.t != 0 || !x.g0.empty()) return false;
  for (const auto& g : x.gprime)
    if (!g.empty()) return false;
  return true;
}

DeltaElement generator(const DeltaContext& ctx, const Gen& g) {
  DeltaElement e = identity(ctx);
  const GroupBackend& G0 = ctx.lamp_group();
  switch (g.kind) {
    case GenKind::CursorPlus:
      e.t = 1;
      break;
    case GenKind::CursorMinus:
      e.t = -1;
      break;
    case GenKind::AWrite:
      if (g.index < 1 || g.index >= ctx.a_size())
        throw std::out_of_range("a-write index");
      e.g0.set(0, G0.gens_a()[g.index]);
      break;
    case GenKind::BWrite:
      if (g.index < 1 || g.index >= ctx.b_size())
        throw std::out_of_range("b-write index");
      e.g0.set(0, G0.gens_b()[g.index]);
      break;
  }
  return e;
}

ElementId reconstruct_level(const DeltaContext& ctx, const DeltaElement& x,
                            int m, int64_t pos) {
  if (m < 0 || m > ctx.levels()) throw std::out_of_range("level");
  if (m == 0) return x.g0.at(pos);
  const GroupBackend& G0 = ctx.lamp_group();
  const GroupBackend& Gm = ctx.backend(m);
  ElementId val = x.gprime[m - 1].at(pos);
  ElementId a0 = G0.theta(x.g0.at(pos)).a;
  if (a0 != 0) val = Gm.mul(val, Gm.gens_a()[G0.a_index(a0)]);
  ElementId b0 = G0.theta(x.g0.at(pos - ctx.k(m))).b;
  if (b0 != 0) val = Gm.mul(val, Gm.gens_b()[G0.b_index(b0)]);
  return val;
}

DeltaElement multiply(const DeltaContext& ctx, const DeltaElement& x,
                      const DeltaElement& y) {
  const int M = ctx.levels();
  if (static_cast<int>(x.gprime.size()) != M ||
      static_cast<int>(y.gprime.size()) != M)
    throw std::invalid_argument("multiply: elements from a different schedule");
  const GroupBackend& G0 = ctx.lamp_group();

  DeltaElement r;
  r.t = x.t + y.t;
  r.gprime.resize(M);

  // g0 is a pointwise product after translating y by the left cursor.
  {
    std::set<int64_t> positions;
    for (const auto& [p, v] : x.g0.entries) positions.insert(p);
    for (const auto& [p, v] : y.g0.entries) positions.insert(p + x.t);
    for (int64_t p : positions) {
      ElementId v = G0.mul(x.g0.at(p), y.g0.at(p - x.t));
      if (v != 0) r.g0.entries.emplace_back(p, v);
    }
  }

  // Level m of the product can differ from the identity only where one of
  // the two reconstructed configurations does; the canonical derived part
  // of the exact product value is recomputed site by site.
  for (int m = 1; m <= M; ++m) {
    const GroupBackend& Gm = ctx.backend(m);
    const int64_t km = ctx.k(m);
    std::set<int64_t> positions;
    for (const auto& [p, v] : x.gprime[m - 1].entries) positions.insert(p);
    for (const auto& [p, v] : x.g0.entries) {
      positions.insert(p);
      positions.insert(p + km);
    }
    for (const auto& [p, v] : y.gprime[m - 1].entries) positions.insert(p + x.t);
    for (const auto& [p, v] : y.g0.entries) {
      positions.insert(p + x.t);
      positions.insert(p + x.t + km);
    }
    for (int64_t p : positions) {
      ElementId q = Gm.mul(reconstruct_level(ctx, x, m, p),
                           reconstruct_level(ctx, y, m, p - x.t));
      ElementId d = Gm.derived_part(q);
      if (d != 0) r.gprime[m - 1].entries.emplace_back(p, d);
    }
  }
  return r;
}

DeltaElement inverse(const DeltaContext& ctx, const DeltaElement& x) {
  const int M = ctx.levels();
  if (static_cast<int>(x.gprime.size()) != M)
    throw std::invalid_argument("inverse: element from a different schedule");
  const GroupBackend& G0 = ctx.lamp_group();

  DeltaElement r;
  r.t = -x.t;
  r.gprime.resize(M);
  for (const auto& [p, v] : x.g0.entries)
    r.g0.entries.emplace_back(p - x.t, G0.inv(v));

  for (int m = 1; m <= M; ++m) {
    const GroupBackend& Gm = ctx.backend(m);
    const int64_t km = ctx.k(m);
    std::set<int64_t> positions;
    for (const auto& [p, v] : x.gprime[m - 1].entries) positions.insert(p - x.t);
    for (const auto& [p, v] : r.g0.entries) {
      positions.insert(p);
      positions.insert(p + km);
    }
    for (int64_t p : positions) {
      ElementId q = Gm.inv(reconstruct_level(ctx, x, m, p + x.t));
      ElementId d = Gm.derived_part(q);
      if (d != 0) r.gprime[m - 1].entries.emplace_back(p, d);
    }
  }
  return r;
}

RangeInterval compute_range(const DeltaContext& ctx, const DeltaElement& x) {
  RangeInterval r{std::min<int64_t>(0, x.t), std::max<int64_t>(0, x.t)};
  auto cover = [&r](int64_t p) {
    r.lo = std::min(r.lo, p);
    r.hi = std::max(r.hi, p);
  };
  if (!x.g0.empty()) {
    cover(x.g0.entries.front().first);
    cover(x.g0.entries.back().first);
  }
  for (int m = 1; m <= ctx.levels(); ++m) {
    const auto& g = x.gprime[m - 1];
    if (!g.empty()) {
      cover(g.entries.front().first - ctx.k(m));
      cover(g.entries.back().first);
    }
  }
  return r;
}

RangeInterval level_range(const DeltaContext& ctx, const DeltaElement& x,
                          int m) {
  if (m < 0 || m > ctx.levels()) throw std::out_of_range("level");
  const GroupBackend& G0 = ctx.lamp_group();
  RangeInterval r{std::min<int64_t>(0, x.t), std::max<int64_t>(0, x.t)};
  auto cover = [&r](int64_t p) {
    r.lo = std::min(r.lo, p);
    r.hi = std::max(r.hi, p);
  };
  for (const auto& [p, v] : x.g0.entries) {
    if (m == 0) {
      cover(p);
    } else {
      // a_m is written at the lamp site, b_m from site - k_m.
      auto th = G0.theta(v);
      if (th.a != 0) cover(p);
      if (th.b != 0) cover(p);
    }
  }
  if (m >= 1 && !x.gprime[m - 1].empty()) {
    const auto& g = x.gprime[m - 1];
    cover(g.entries.front().first - ctx.k(m));
    cover(g.entries.back().first);
  }
  return r;
}

int64_t essential_contribution(const DeltaContext& ctx, const DeltaElement& x,
                               int m) {
  if (m < 0 || m > ctx.levels())
    throw std::out_of_range("essential contribution: level beyond the "
                            "materialized schedule (k_m infinite)");
  const int64_t km = (m == 0) ? 0 : ctx.k(m);
  if (km == 0) return 0;
  const GroupBackend& G0 = ctx.lamp_group();
  const GroupBackend& Gm = ctx.backend(m);
  const RangeInterval range = level_range(ctx, x, m);

  // Sites that can carry a non-identity reconstructed value.
  std::set<int64_t> sites;
  for (const auto& [p, v] : x.gprime[m - 1].entries) sites.insert(p);
  for (const auto& [p, v] : x.g0.entries) {
    auto th = G0.theta(v);
    if (th.a != 0) sites.insert(p);
    if (th.b != 0) sites.insert(p + km);
  }

  // Half-k blocks I_j = [j*k/2, (j+1)*k/2 - 1] handled in doubled
  // coordinates: site p lies in block j iff j*k <= 2p <= (j+1)*k - 2. For
  // odd k a site with 2p on the block boundary belongs to no block; such
  // sites carry pure B values of word length <= 1 and never contribute.
  std::map<int64_t, int64_t> best;
  for (int64_t p : sites) {
    int64_t j = floor_div(2 * p, km);
    if (2 * p - j * km > km - 2) continue;
    // Only blocks meeting the level range count.
    if (j * km > 2 * range.hi || (j + 1) * km - 2 < 2 * range.lo) continue;
    int len = Gm.word_length(reconstruct_level(ctx, x, m, p));
    best[j] = std::max<int64_t>(best[j], std::max(len - 1, 0));
  }
  int64_t total = 0;
  for (const auto& [j, v] : best) total += v;
  return km * total;
}

int64_t metric_upper_bound(const DeltaContext& ctx, const DeltaElement& x) {
  if (is_identity(x)) return 0;
  const int64_t len = compute_range(ctx, x).length();
  const int top = ctx.little_l(len);
  int64_t sum = 0;
  for (int m = 0; m <= top; ++m) {
    int64_t sites = level_range(ctx, x, m).length() + 1;
    sum += 9 * (sites + essential_contribution(ctx, x, m));
  }
  return 500 * sum;
}

std::optional<int> word_length_exact(const DeltaContext& ctx,
                                     const DeltaElement& x, int radius_cap,
                                     size_t node_cap) {
  if (is_identity(x)) return 0;
  const std::string target = serialize(x);
  const auto gens = symmetric_generators(ctx);
  std::vector<DeltaElement> gen_elems;
  for (const auto& g : gens) gen_elems.push_back(generator(ctx, g));

  std::unordered_map<std::string, int> dist;
  std::deque<DeltaElement> queue;
  dist.emplace(serialize(identity(ctx)), 0);
  queue.push_back(identity(ctx));
  while (!queue.empty()) {
    DeltaElement cur = std::move(queue.front());
    queue.pop_front();
    int d = dist.at(serialize(cur));
    if (d >= radius_cap) continue;
    for (const auto& s : gen_elems) {
      DeltaElement nxt = multiply(ctx, cur, s);
      std::string key = serialize(nxt);
      if (dist.emplace(std::move(key), d + 1).second) {
        if (serialize(nxt) == target) return d + 1;
        if (dist.size() > node_cap) return std::nullopt;
        queue.push_back(std::move(nxt));
      }
    }
  }
  return std::nullopt;
}

std::unordered_map<std::string, int> box_word_lengths(const DeltaContext& ctx,
                                                      int64_t lo, int64_t hi) {
  if (lo > 0 || hi < 0)
    throw std::invalid_argument("box search: box must contain the origin");
  const auto gens = symmetric_generators(ctx);
  std::vector<DeltaElement> gen_elems;
  for (const auto& g : gens) gen_elems.push_back(generator(ctx, g));

  std::unordered_map<std::string, int> dist;
  std::deque<DeltaElement> queue;
  dist.emplace(serialize(identity(ctx)), 0);
  queue.push_back(identity(ctx));
  while (!queue.empty()) {
    DeltaElement cur = std::move(queue.front());
    queue.pop_front();
    int d = dist.at(serialize(cur));
    for (const auto& s : gen_elems) {
      DeltaElement nxt = multiply(ctx, cur, s);
      if (nxt.t < lo || nxt.t > hi) continue;
      std::string key = serialize(nxt);
      if (dist.emplace(std::move(key), d + 1).second) queue.push_back(std::move(nxt));
    }
  }
  return dist;
}

std::string serialize(const DeltaElement& x) {
  std::ostringstream o;
  o << x.t << " | ";
  bool first = true;
  for (const auto& [p, v] : x.g0.entries) {
    if (!first) o << ',';
    first = false;
    o << p << ':' << v;
  }
  for (size_t m = 1; m <= x.gprime.size(); ++m) {
    o << " | m=" << m;
    first = true;
    for (const auto& [p, v] : x.gprime[m - 1].entries) {
      o << (first ? " " : ",");
      first = false;
      o << p << ':' << v;
    }
  }
  return o.str();
}

DeltaElement parse_element(const DeltaContext& ctx, const std::string& line) {
  // Split on " | ".
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t sep = line.find(" | ", start);
    if (sep == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, sep - start));
    start = sep + 3;
  }
  if (fields.size() != static_cast<size_t>(ctx.levels()) + 2)
    parse_fail("wrong number of fields for this schedule");

  auto parse_entries = [](const std::string& text, LampConfig& out) {
    if (text.empty()) return;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      size_t colon = item.find(':');
      if (colon == std::string::npos) parse_fail("entry without ':'");
      size_t used = 0;
      int64_t pos = std::stoll(item.substr(0, colon), &used);
      if (used != colon) parse_fail("bad position");
      int v = std::stoi(item.substr(colon + 1), &used);
      if (used != item.size() - colon - 1) parse_fail("bad value");
      if (!out.entries.empty() && out.entries.back().first >= pos)
        parse_fail("positions not strictly increasing");
      out.entries.emplace_back(pos, v);
    }
  };

  DeltaElement x;
  x.gprime.resize(ctx.levels());
  {
    size_t used = 0;
    x.t = std::stoll(fields[0], &used);
    if (used != fields[0].size()) parse_fail("bad cursor");
  }
  parse_entries(fields[1], x.g0);
  for (int m = 1; m <= ctx.levels(); ++m) {
    const std::string& f = fields[1 + m];
    std::string head = "m=" + std::to_string(m);
    if (f.compare(0, head.size(), head) != 0) parse_fail("bad level header");
    if (f.size() > head.size()) {
      if (f[head.size()] != ' ') parse_fail("bad level header");
      parse_entries(f.substr(head.size() + 1), x.gprime[m - 1]);
    }
  }

  // Value validation against the backends.
  for (const auto& [p, v] : x.g0.entries)
    if (!ctx.lamp_group().valid_id(v) || v == 0)
      parse_fail("g0 value out of range or identity");
  for (int m = 1; m <= ctx.levels(); ++m)
    for (const auto& [p, v] : x.gprime[m - 1].entries) {
      if (!ctx.backend(m).valid_id(v) || v == 0)
        parse_fail("gprime value out of range or identity");
      if (!ctx.backend(m).in_derived(v))
        parse_fail("gprime value outside the derived subgroup");
    }
  return x;
}

}  // namespace diagprod
