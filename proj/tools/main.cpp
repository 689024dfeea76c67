#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ezgreedy/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CommonArgs {
  std::string config;
  std::string preset;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 1;
  CLI::Option* seed_option = nullptr;

  bool seed_given() const { return seed_option != nullptr && seed_option->count() > 0; }
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config, "JSON config file");
  sub->add_option("--preset", args.preset, "named preset; overrides the config's preset field");
  sub->add_option("--out", args.out, "output directory (overrides the config)");
  args.seed_option = sub->add_option("--seed", args.seed, "seed (overrides the config)");
  sub->add_option("--workers", args.workers, "parallel trial workers (run/sweep)")
      ->check(CLI::PositiveNumber);
}

// File contents (or "{}") with the --preset flag injected as the preset field.
std::string effective_json(const CommonArgs& args) {
  if (args.config.empty() && args.preset.empty())
    throw std::runtime_error("need --config or --preset");
  std::string text = args.config.empty() ? std::string("{}") : read_file(args.config);
  if (!args.preset.empty()) {
    auto j = nlohmann::ordered_json::parse(text);
    j["preset"] = args.preset;
    text = j.dump();
  }
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporally-extended epsilon-greedy exploration laboratory"};
  app.require_subcommand(1);

  CommonArgs run_args, sweep_args, first_visit_args, cover_time_args, coverage_args;
  bool dump_transitions = false;

  CLI::App* run_cmd = app.add_subcommand("run", "train and emit learning curves");
  add_common(run_cmd, run_args);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "duration-parameter sweep");
  add_common(sweep_cmd, sweep_args);
  CLI::App* first_visit_cmd =
      app.add_subcommand("first-visit", "mean first-visit-time map (CSV + PGM)");
  add_common(first_visit_cmd, first_visit_args);
  CLI::App* cover_time_cmd =
      app.add_subcommand("cover-time", "median steps to visit every state-action pair");
  add_common(cover_time_cmd, cover_time_args);
  CLI::App* coverage_cmd =
      app.add_subcommand("coverage", "exact reachability of state-action pairs under options");
  add_common(coverage_cmd, coverage_args);
  coverage_cmd->add_flag("--dump-transitions", dump_transitions,
                         "also write the exact one-step model as transitions.tsv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      ezg::ExperimentConfig cfg = ezg::config_from_json(effective_json(run_args));
      if (run_args.seed_given()) cfg.seed = run_args.seed;
      if (!run_args.out.empty()) cfg.output_dir = run_args.out;
      const ezg::ExperimentResult result = ezg::run_experiment(cfg, run_args.workers);
      ezg::write_experiment_outputs(cfg, result, cfg.output_dir);
      std::cout << "wrote " << cfg.output_dir << "/learning_curves.csv (" << cfg.trials
                << " trials x " << cfg.episodes << " episodes)\n";
    } else if (sweep_cmd->parsed()) {
      ezg::SweepSpec spec = ezg::sweep_from_json(effective_json(sweep_args));
      if (sweep_args.seed_given()) spec.base.seed = sweep_args.seed;
      if (!sweep_args.out.empty()) spec.base.output_dir = sweep_args.out;
      const std::vector<ezg::SweepPoint> points = ezg::run_sweep(spec, sweep_args.workers);
      ezg::write_sweep_outputs(spec, points, spec.base.output_dir);
      std::cout << "wrote " << spec.base.output_dir << "/sweep.csv (" << points.size()
                << " values x " << spec.base.trials << " trials)\n";
    } else if (first_visit_cmd->parsed()) {
      ezg::FirstVisitJob job = ezg::first_visit_from_json(effective_json(first_visit_args));
      if (first_visit_args.seed_given()) job.seed = first_visit_args.seed;
      if (!first_visit_args.out.empty()) job.output_dir = first_visit_args.out;
      const ezg::FirstVisitGrid grid = ezg::first_visit_map(job.env, job.cfg, job.seed);
      ezg::write_first_visit_outputs(job, grid, job.output_dir);
      std::cout << "wrote " << job.output_dir << "/first_visit.{csv,pgm,json} (" << grid.rows
                << "x" << grid.cols << ")\n";
    } else if (cover_time_cmd->parsed()) {
      ezg::CoverTimeJob job = ezg::cover_time_from_json(effective_json(cover_time_args));
      if (cover_time_args.seed_given()) job.seed = cover_time_args.seed;
      if (!cover_time_args.out.empty()) job.output_dir = cover_time_args.out;
      const ezg::CoverTimeReport report = ezg::cover_time(job.env, job.cfg, job.seed);
      ezg::write_cover_time_outputs(job, report, job.output_dir);
      std::cout << "wrote " << job.output_dir << "/cover_time.json (covered "
                << report.covered_trials << "/" << report.trials << " trials";
      if (report.median_defined) std::cout << ", median " << report.median;
      std::cout << ")\n";
    } else if (coverage_cmd->parsed()) {
      ezg::CoverageJob job = ezg::coverage_from_json(effective_json(coverage_args));
      if (coverage_args.seed_given()) job.seed = coverage_args.seed;
      if (!coverage_args.out.empty()) job.output_dir = coverage_args.out;
      const ezg::CoverageRun run = ezg::run_coverage(job);
      ezg::write_coverage_outputs(job, run, job.output_dir, dump_transitions);
      std::cout << "wrote " << job.output_dir << "/coverage.json ("
                << run.result.reachable.size() << " reachable, "
                << run.result.unreachable.size() << " unreachable)\n";
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
