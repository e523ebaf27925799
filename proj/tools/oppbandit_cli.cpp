#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "oppbandit/cli.hpp"

namespace ob = oppbandit;
namespace cli = oppbandit::cli;

namespace {

void add_overrides(CLI::App* cmd, cli::Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "override the base seed");
  cmd->add_option("--replications", ov.replications, "override the number of replications");
  cmd->add_option("--horizon", ov.horizon, "override the horizon T");
}

int synth_trace(const ob::SemiPeriodicSynthetic& params, const std::vector<double>& means, std::uint64_t rows,
                std::uint64_t seed, const std::string& out_path) {
  const auto data = ob::generate_semi_periodic_rows(params, means, rows, seed);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << "load";
  for (std::size_t k = 0; k < means.size(); ++k) out << ",reward_" << k + 1;
  out << '\n';
  char buf[32];
  for (const auto& row : data) {
    std::snprintf(buf, sizeof buf, "%.6f", row[0]);
    out << buf;
    for (std::size_t k = 1; k < row.size(); ++k) out << ',' << row[k];
    out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opportunistic bandit simulator"};
  app.set_version_flag("--version", std::string(cli::kVersion));
  app.require_subcommand(1);

  std::string config, out_dir;
  cli::Overrides ov;

  auto* run = app.add_subcommand("run", "simulate every policy of a config");
  run->add_option("config", config, "experiment config (JSON) or a run's metadata.json")->required();
  run->add_option("-o,--output", out_dir, "output directory")->required();
  add_overrides(run, ov);

  auto* bounds = app.add_subcommand("bounds", "evaluate analytic bounds at the config's checkpoints");
  bounds->add_option("config", config, "experiment config (JSON)")->required();
  bounds->add_option("-o,--output", out_dir, "output directory")->required();
  add_overrides(bounds, ov);

  std::string run_dir, bounds_dir, verdict_path;
  auto* compare = app.add_subcommand("compare", "check a run against its bounds");
  compare->add_option("run", run_dir, "output directory of `run`")->required();
  compare->add_option("bounds", bounds_dir, "output directory of `bounds`")->required();
  compare->add_option("-o,--output", verdict_path, "also write the verdict CSV here");

  ob::SemiPeriodicSynthetic synth;
  std::vector<double> means;
  std::uint64_t rows = 10080, seed = 1;
  std::string trace_out;
  auto* synth_cmd = app.add_subcommand("synth-trace", "write a synthetic semi-periodic load trace");
  synth_cmd->add_option("-o,--output", trace_out, "trace CSV path")->required();
  synth_cmd->add_option("--rows", rows, "number of slots")->capture_default_str();
  synth_cmd->add_option("--seed", seed, "seed")->capture_default_str();
  synth_cmd->add_option("--means", means, "Bernoulli reward means; omit for a load-only trace");
  synth_cmd->add_option("--period", synth.period)->capture_default_str();
  synth_cmd->add_option("--base", synth.base)->capture_default_str();
  synth_cmd->add_option("--amplitude", synth.amplitude)->capture_default_str();
  synth_cmd->add_option("--noise-a", synth.noise_a)->capture_default_str();
  synth_cmd->add_option("--noise-b", synth.noise_b)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto out = cli::cmd_run(config, out_dir, ov);
      std::cout << "wrote " << out.results.string() << '\n';
      return 0;
    }
    if (*bounds) {
      const auto report = cli::cmd_bounds(config, out_dir, ov);
      for (const auto& w : report.metadata.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << '\n';
      std::cout << "wrote " << (std::filesystem::path(out_dir) / "bounds.csv").string() << '\n';
      return 0;
    }
    if (*compare) {
      const auto verdict = cli::cmd_compare(run_dir, bounds_dir);
      const auto text = cli::verdict_csv(verdict);
      std::cout << text;
      if (!verdict_path.empty()) cli::write_text(verdict_path, text);
      std::cout << (verdict.ok() ? "PASS" : "FAIL") << ": " << verdict.lemma1_checks << " lemma1 checks, "
                << verdict.violations << " violations\n";
      return static_cast<int>(verdict.exit_code());
    }
    if (*synth_cmd) return synth_trace(synth, means, rows, seed, trace_out);
  } catch (const ob::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
