// Command-line front end: synth | build | verify | simulate | report.
// Every subcommand takes the same flag set; flags override the config file.
// Exit codes: 0 success, 1 internal error, 2 config or hypothesis
// diagnostics, 3 enumeration cap exceeded, 4 invariant failure.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "diagprod/cli.hpp"

namespace {

struct Flags {
  std::string config;
  std::string mode;
  std::string out;
  int level = 0;
  double eps = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Key-value config file");
  sub->add_option("--level", f.level, "Truncation level N");
  sub->add_option("--eps", f.eps, "Integrability exponent epsilon");
  sub->add_option("--samples", f.samples, "Sample budget for simulate");
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_option("--mode", f.mode, "materialized or synthetic")
      ->check(CLI::IsMember({"materialized", "synthetic"}));
  sub->add_option("--out", f.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diagonal product tilings, schedules, and couplings"};
  app.require_subcommand(1);
  Flags f;
  CLI::App* synth = app.add_subcommand("synth", "Write the parameter schedule");
  CLI::App* build = app.add_subcommand("build", "Materialize tiles and shifts");
  CLI::App* verify = app.add_subcommand("verify", "Re-check build artifacts");
  CLI::App* simulate =
      app.add_subcommand("simulate", "Sample the coupling displacement");
  CLI::App* report = app.add_subcommand("report", "Write the series report");
  for (CLI::App* sub : {synth, build, verify, simulate, report})
    add_common(sub, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    diagprod::RunConfig cfg;
    if (!f.config.empty()) cfg = diagprod::load_config(f.config);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--level")) cfg.level = f.level;
    if (sub->count("--eps")) {
      if (f.eps <= 0) throw diagprod::ConfigError("eps must be positive");
      cfg.eps = f.eps;
    }
    if (sub->count("--samples")) cfg.samples = f.samples;
    if (sub->count("--seed")) cfg.seed = f.seed;
    if (sub->count("--mode")) cfg.mode = f.mode;
    if (sub->count("--out")) cfg.out_dir = f.out;
    if (cfg.level < 1)
      throw diagprod::ConfigError("level must be >= 1");

    const std::string& name = sub->get_name();
    if (name == "synth")
      diagprod::run_synth(cfg);
    else if (name == "build")
      diagprod::run_build(cfg);
    else if (name == "verify")
      diagprod::run_verify(cfg);
    else if (name == "simulate")
      diagprod::run_simulate(cfg);
    else
      diagprod::run_report(cfg);
    return 0;
  } catch (const diagprod::CapExceeded& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const diagprod::InvariantViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const diagprod::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
