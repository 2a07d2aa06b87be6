#include "diagprod/cli.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "diagprod/delta.hpp"
#include "diagprod/groups.hpp"
#include "diagprod/schedule.hpp"

namespace diagprod {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    int64_t v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" +
                      value + "'");
  }
}

int64_t parse_int_min(const std::string& key, const std::string& value,
                      int64_t lo) {
  int64_t v = parse_int(key, value);
  if (v < lo)
    throw ConfigError("config key '" + key + "' must be >= " +
                      std::to_string(lo) + ", got '" + value + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" +
                      value + "'");
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// All output files go through here: write the whole payload to a sibling
/// temp file, then rename over the target so readers never observe a
/// half-written artifact.
void atomic_write(const std::filesystem::path& path, const std::string& body) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string gen_name(const Gen& g) {
  switch (g.kind) {
    case GenKind::CursorPlus:
      return "cursor+";
    case GenKind::CursorMinus:
      return "cursor-";
    case GenKind::AWrite:
      return "a" + std::to_string(g.index);
    case GenKind::BWrite:
      return "b" + std::to_string(g.index);
  }
  return "?";
}

int64_t to_small(const BigInt& v, const std::string& what) {
  if (v > BigInt(1000000000))
    throw ConfigError(what + " = " + v.str() + " too large to materialize");
  return v.convert_to<int64_t>();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot open " + path.string() + "; run build first");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<DeltaElement> read_elements(const DeltaContext& ctx,
                                        const std::filesystem::path& path) {
  std::vector<std::string> lines = read_lines(path);
  std::vector<DeltaElement> out;
  out.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(parse_element(ctx, lines[i]));
    } catch (const std::invalid_argument& e) {
      throw InvariantViolation(path.string() + " line " +
                               std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

ParameterSchedule truncated_for(const ParameterSchedule& s,
                                const DeltaContext& ctx) {
  return truncate_schedule(s, ctx.levels());
}

}  // namespace

ProfileSpec RunConfig::profile() const {
  if (profile_family == "identity") return ProfileSpec::identity();
  if (profile_family == "power") return ProfileSpec::power(profile_alpha);
  throw ConfigError("unknown profile.family '" + profile_family +
                    "' (expected identity or power)");
}

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "profile.family") {
    cfg.profile_family = value;
  } else if (key == "profile.alpha") {
    cfg.profile_alpha = parse_real(key, value);
  } else if (key == "kappa") {
    cfg.kappa = parse_int_min(key, value, 2);
  } else if (key == "lambda") {
    cfg.lambda = parse_int_min(key, value, 2);
  } else if (key == "depth") {
    cfg.depth = static_cast<int>(parse_int_min(key, value, 0));
  } else if (key == "cap") {
    cfg.cap = static_cast<uint64_t>(parse_int_min(key, value, 1));
  } else if (key == "level") {
    cfg.level = static_cast<int>(parse_int_min(key, value, 1));
  } else if (key == "eps") {
    cfg.eps = parse_real(key, value);
    if (cfg.eps <= 0) throw ConfigError("config key 'eps' must be positive");
  } else if (key == "samples") {
    cfg.samples = static_cast<uint64_t>(parse_int_min(key, value, 1));
  } else if (key == "seed") {
    cfg.seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "mode") {
    if (value != "materialized" && value != "synthetic")
      throw ConfigError("config key 'mode' expects materialized or synthetic");
    cfg.mode = value;
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "c1") {
    cfg.params.c1 = parse_real(key, value);
  } else if (key == "c2") {
    cfg.params.c2 = parse_real(key, value);
  } else if (key == "ab") {
    cfg.params.ab = parse_real(key, value);
  } else if (key.rfind("backend.", 0) == 0) {
    int m = static_cast<int>(parse_int_min(key, key.substr(8), 0));
    cfg.backend_override[m] = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

ParameterSchedule configured_schedule(const RunConfig& cfg) {
  ProfileSpec prof = cfg.profile();
  prof.validate();
  return synthesize(prof, cfg.kappa, cfg.lambda, cfg.depth);
}

DeltaContext configured_context(const RunConfig& cfg,
                                const ParameterSchedule& sched) {
  int top;
  try {
    top = big_L(sched, cfg.level);
  } catch (const std::out_of_range&) {
    top = sched.max_level() + 1;  // forces the depth diagnostic below
  }
  if (!sched.terminated && top >= sched.max_level())
    throw ConfigError(
        "synthesis depth " + std::to_string(cfg.depth) +
        " does not pin down every write distance below kappa^" +
        std::to_string(cfg.level) + "; raise depth");
  std::vector<int64_t> k(static_cast<size_t>(top) + 1, 0);
  std::vector<std::shared_ptr<const GroupBackend>> backends;
  for (int m = 0; m <= top; ++m) {
    if (m > 0)
      k[static_cast<size_t>(m)] =
          to_small(sched.k_value(m), "k_" + std::to_string(m));
    auto it = cfg.backend_override.find(m);
    if (it != cfg.backend_override.end()) {
      backends.push_back(std::make_shared<const GroupBackend>(
          make_backend(parse_group_descriptor(it->second))));
    } else if (m == 0) {
      backends.push_back(
          std::make_shared<const GroupBackend>(GroupBackend::dihedral(2)));
    } else {
      int64_t l = to_small(sched.l_value(m), "l_" + std::to_string(m));
      backends.push_back(std::make_shared<const GroupBackend>(
          GroupBackend::dihedral(static_cast<int>(l))));
    }
  }
  return DeltaContext(static_cast<int>(cfg.kappa), std::move(k),
                      std::move(backends));
}

void run_synth(const RunConfig& cfg) {
  ParameterSchedule s = configured_schedule(cfg);
  std::ostringstream csv;
  csv << "m,k_m,l_m\n";
  for (int m = 0; m <= cfg.depth; ++m) {
    csv << m << ',';
    if (m <= s.max_level() && !s.is_infinite(m))
      csv << s.k_value(m).str();
    else
      csv << "inf";
    csv << ',' << s.l_value(m).str() << '\n';
  }
  atomic_write(out_path(cfg, "synth.csv"), csv.str());
  std::fprintf(stderr, "synth: %s, kappa=%" PRId64 ", lambda=%" PRId64
                       ", %d finite levels%s\n",
               cfg.profile().label().c_str(), cfg.kappa, cfg.lambda,
               s.max_level(), s.terminated ? ", terminated" : "");
}

void run_build(const RunConfig& cfg) {
  ParameterSchedule s = configured_schedule(cfg);
  DeltaContext ctx = configured_context(cfg, s);
  TileTower tower = build_tiles(ctx, cfg.level, cfg.cap);
  for (int n = 0; n <= cfg.level; ++n) {
    std::ostringstream body;
    for (const DeltaElement& e : tower.tiles[static_cast<size_t>(n)].elements)
      body << serialize(e) << '\n';
    atomic_write(out_path(cfg, "tile_" + std::to_string(n) + ".txt"),
                 body.str());
  }
  for (int n = 1; n <= cfg.level; ++n) {
    const ShiftSet& sh = tower.shifts[static_cast<size_t>(n - 1)];
    std::ostringstream body;
    for (uint64_t i = 0; i < sh.size(); ++i) body << serialize(sh.at(i)) << '\n';
    atomic_write(out_path(cfg, "shift_" + std::to_string(n) + ".txt"),
                 body.str());
  }

  ParameterSchedule trunc = truncated_for(s, ctx);
  std::ostringstream csv;
  csv << "n,cardinality,r_n,eps_n,r_prime_n,eps_prime_n\n";
  for (int n = 0; n <= cfg.level; ++n) {
    TileStats st = quantify_materialized(ctx, trunc, tower, n, cfg.params);
    csv << st.n << ',' << st.exact_cardinality->str() << ',' << fmt(st.r_n)
        << ',' << fmt(st.eps_n) << ',' << st.exact_cardinality->str() << ','
        << fmt(std::exp(st.ln_eps_prime)) << '\n';
  }
  atomic_write(out_path(cfg, "stats.csv"), csv.str());
  std::fprintf(stderr, "build: level %d, |T_%d|=%s\n", cfg.level, cfg.level,
               tile_cardinality(ctx, cfg.level, cfg.cap).str().c_str());
}

void run_verify(const RunConfig& cfg) {
  ParameterSchedule s = configured_schedule(cfg);
  DeltaContext ctx = configured_context(cfg, s);

  std::vector<std::vector<DeltaElement>> tiles;
  for (int n = 0; n <= cfg.level; ++n)
    tiles.push_back(read_elements(
        ctx, out_path(cfg, "tile_" + std::to_string(n) + ".txt")));

  // T_0 and each window F_{kappa^n} are re-enumerated from scratch; the
  // shifted products are recomputed from the files alone, so a coherent
  // pass needs both artifacts to be exactly the canonical content.
  FolnerSet t0 = enumerate_folner(ctx, 1, cfg.cap);
  if (tiles[0] != t0.elements)
    throw InvariantViolation("tile_0.txt does not match the base tile");

  for (int n = 1; n <= cfg.level; ++n) {
    int64_t window = 1;
    for (int i = 0; i < n; ++i) window *= ctx.kappa();
    FolnerSet expect = enumerate_folner(ctx, window, cfg.cap);
    if (tiles[static_cast<size_t>(n)] != expect.elements)
      throw InvariantViolation("tile_" + std::to_string(n) +
                               ".txt does not match the enumerated window");

    std::vector<DeltaElement> sigmas = read_elements(
        ctx, out_path(cfg, "shift_" + std::to_string(n) + ".txt"));
    std::vector<DeltaElement> products;
    products.reserve(sigmas.size() *
                     tiles[static_cast<size_t>(n - 1)].size());
    for (const DeltaElement& sig : sigmas)
      for (const DeltaElement& tau : tiles[static_cast<size_t>(n - 1)])
        products.push_back(multiply(ctx, sig, tau));
    std::sort(products.begin(), products.end());
    if (std::adjacent_find(products.begin(), products.end()) !=
        products.end())
      throw InvariantViolation("level " + std::to_string(n) +
                               ": shifted tiles overlap");
    if (products != tiles[static_cast<size_t>(n)])
      throw InvariantViolation("level " + std::to_string(n) +
                               ": shifted tiles do not cover the tile");

    uint64_t boundary = boundary_count(ctx, expect);
    if (BigInt(boundary) * window != BigInt(2) * expect.elements.size())
      throw InvariantViolation("level " + std::to_string(n) +
                               ": boundary ratio is not 2/kappa^n");
    std::fprintf(stderr, "|T_%d|=%zu, partition OK, Følner ratio 2/%"
                         PRId64 "\n",
                 n, expect.elements.size(), window);
  }
}

void run_simulate(const RunConfig& cfg) {
  ParameterSchedule s = configured_schedule(cfg);
  DeltaContext ctx = configured_context(cfg, s);
  CouplingSpace space(ctx, build_tiles(ctx, cfg.level, cfg.cap));

  SimulateOptions opt;
  opt.eps = cfg.eps;
  opt.profile = cfg.profile();
  opt.samples = cfg.samples;
  opt.seed = cfg.seed;
  SimulationReport rep = simulate(space, opt);

  std::ostringstream csv;
  csv << "generator,event,value,count\n";
  for (const DeltaGenStats& g : rep.delta_gens) {
    std::string name = gen_name(g.gen);
    csv << name << ",domain,0," << g.domain << '\n';
    csv << name << ",out_of_truncation,0," << g.out_of_truncation << '\n';
    for (const auto& [d, c] : g.z_histogram)
      csv << name << ",distance," << d << ',' << c << '\n';
  }
  for (const ZGenStats& g : rep.z_gens) {
    std::string name = g.d > 0 ? "z+1" : "z-1";
    csv << name << ",domain,0," << g.domain << '\n';
    csv << name << ",out_of_truncation,0," << g.out_of_truncation << '\n';
    for (const auto& [d, c] : g.upper_histogram)
      csv << name << ",upper_bound," << d << ',' << c << '\n';
    for (const auto& [d, c] : g.exact_histogram)
      csv << name << ",exact," << d << ',' << c << '\n';
    csv << name << ",exact_attempted,0," << g.exact_attempted << '\n';
    csv << name << ",exact_unknown,0," << g.exact_unknown << '\n';
  }
  atomic_write(out_path(cfg, "simulate.csv"), csv.str());

  std::ostringstream mcsv;
  mcsv << "generator,c,moment\n";
  for (const DeltaGenStats& g : rep.delta_gens)
    for (int i = 0; i < kMomentGridSize; ++i)
      mcsv << gen_name(g.gen) << ',' << (uint64_t{1} << i) << ','
           << fmt(g.moments[static_cast<size_t>(i)]) << '\n';
  atomic_write(out_path(cfg, "moments.csv"), mcsv.str());
  std::fprintf(stderr, "simulate: level %d, %" PRIu64 " points (%s), seed %"
                       PRIu64 "\n",
               rep.level, rep.points, rep.exhaustive ? "exhaustive" : "sampled",
               rep.seed);
}

void run_report(const RunConfig& cfg) {
  ParameterSchedule s = configured_schedule(cfg);
  ProfileSpec prof = cfg.profile();
  SeriesReport rep;
  if (cfg.mode == "synthetic") {
    if (cfg.depth < 1)
      throw ConfigError("report in synthetic mode needs depth >= 1");
    rep = series_report(prof, s, cfg.eps, cfg.depth, cfg.params);
  } else {
    DeltaContext ctx = configured_context(cfg, s);
    CouplingSpace space(ctx, build_tiles(ctx, cfg.level, cfg.cap));
    rep = series_report_materialized(prof, truncated_for(s, ctx), space,
                                     cfg.eps, cfg.params);
  }

  std::ostringstream csv;
  csv << "n,ln_psi_term,psi_term,psi_partial,psi_tail,phi_term,phi_partial,"
         "phi_tail,phi_comparator\n";
  for (const SeriesRow& r : rep.rows)
    csv << r.n << ',' << fmt(r.ln_psi_term) << ',' << fmt(r.psi_term) << ','
        << fmt(r.psi_partial) << ',' << fmt(r.psi_tail) << ','
        << fmt(r.phi_term) << ',' << fmt(r.phi_partial) << ','
        << fmt(r.phi_tail) << ',' << fmt(r.phi_comparator) << '\n';
  atomic_write(out_path(cfg, "series.csv"), csv.str());
  std::fprintf(stderr, "report: mode=%s, eps=%s, n0=%d\n", rep.mode.c_str(),
               fmt(rep.eps).c_str(), rep.n0);
}

}  // namespace diagprod
