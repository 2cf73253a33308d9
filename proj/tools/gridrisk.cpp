// gridrisk: synthetic fixtures, generation-loss sweeps, economic impact and
// analysis tables from the command line.
//
// Exit codes: 0 success, 1 validation or model error, 2 file I/O error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gridrisk/config.hpp"
#include "gridrisk/error.hpp"
#include "gridrisk/pipeline.hpp"
#include "gridrisk/synthetic.hpp"

using namespace gridrisk;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "run configuration (key = value)")->required();
  cmd->add_option("--seed", o.seed, "override the master seed");
  cmd->add_option("--workers", o.workers, "override the worker count");
  cmd->add_option("--out", o.out, "override the output directory");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = load_config(o.config);
  if (o.seed) c.experiment.master_seed = *o.seed;
  if (o.workers) c.experiment.workers = *o.workers;
  if (o.out) c.out_dir = *o.out;
  c.validate();
  return c;
}

void report(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"Generation-loss risk sweeps with DC power flow and multiregional economic impact"};
  app.require_subcommand(1);

  std::string size = "small";
  std::uint64_t gen_seed = 1;
  std::string gen_out = "fixture";
  auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic fixture set and a run.cfg");
  gen->add_option("size", size, "small or gb-like")->required();
  gen->add_option("--seed", gen_seed, "fixture seed");
  gen->add_option("--out", gen_out, "output directory");

  Overrides sim_o, imp_o, ana_o, all_o;
  auto* sim = app.add_subcommand("simulate", "calibrate ratings and run the generation-loss sweep");
  add_run_flags(sim, sim_o);
  auto* imp = app.add_subcommand("impact", "economic cost of every sweep record");
  add_run_flags(imp, imp_o);
  auto* ana = app.add_subcommand("analyze", "cost curves, marginal costs, regional change, population shares");
  add_run_flags(ana, ana_o);
  auto* all = app.add_subcommand("run", "simulate, impact and analyze in one go");
  add_run_flags(all, all_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (gen->parsed()) {
    const auto s = parse_fixture_size(size);
    write_fixture(make_fixture(s, gen_seed), s, gen_seed, gen_out);
    std::cout << "wrote " << to_string(s) << " fixture to " << gen_out << '\n';
    return 0;
  }

  const Overrides& o = sim->parsed() ? sim_o : imp->parsed() ? imp_o : ana->parsed() ? ana_o : all_o;
  const RunConfig config = resolve(o);
  const Inputs inputs = load_inputs(config);
  const ProfileSet profiles = build_profiles(inputs, config);

  std::optional<ResultTable> results;
  if (sim->parsed() || all->parsed()) {
    const auto s = simulate(inputs, profiles, config);
    report(write_simulation(s, config));
    results = s.results;
  } else {
    results = load_results(config.out_dir / "results.csv");
  }
  if (sim->parsed()) return 0;

  std::optional<RecordCosts> costs;
  if (imp->parsed() || all->parsed()) {
    costs = assess_records(*results, inputs, profiles, config);
    report(write_costs(*costs, config));
  } else {
    costs = load_record_costs(config.out_dir / "impact.csv", config.out_dir / "impact_regional.csv");
  }
  if (imp->parsed()) return 0;

  report(write_analysis(analyze(*results, *costs, inputs, profiles, config), config));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const IoError& e) {
    std::cerr << "gridrisk: I/O error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "gridrisk: invalid input: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "gridrisk: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "gridrisk: I/O error: " << e.what() << '\n';
    return 2;
  }
}
