#include <iostream>

#include <CLI11.hpp>

#include "dtfusion/commands.hpp"

namespace cli = dtfusion::cli;

int main(int argc, char** argv) {
  CLI::App app{"GNSS / camera target fusion: scenario generation, matching and evaluation"};
  app.require_subcommand(1);

  cli::GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a simulated run directory");
  gen_cmd->add_option("--config", gen.config, "Scenario config (JSON)")->required();
  gen_cmd->add_option("--out", gen.out, "Output run directory")->required();

  cli::RunOptions run;
  std::string detections;
  std::vector<int> classes;
  auto* run_cmd = app.add_subcommand("run", "Match the target in every frame of a run directory");
  run_cmd->add_option("--frames", run.frames, "Run directory")->required();
  run_cmd->add_option("--target", run.target, "Target vehicle id")->required();
  run_cmd->add_option("--mode", run.mode, "baseline | fused")->check(CLI::IsMember({"baseline", "fused"}));
  run_cmd->add_option("--th", run.th, "Box shrink fraction in (0, 1)")->capture_default_str();
  run_cmd->add_option("--n", run.n, "Depth samples per box")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Depth sampling seed")->capture_default_str();
  run_cmd->add_option("--detections", detections, "Detections JSONL replacing the simulated ones");
  run_cmd->add_option("--classes", classes, "Vehicle class ids passed to matching (default: all)");
  run_cmd->add_option("--out", run.out, "Results CSV")->required();

  cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy-vs-IoU curve from results files");
  eval_cmd->add_option("--results", eval.results, "One or more results CSV files")->required()->expected(1, 8);
  eval_cmd->add_option("--taus", eval.taus, "start:stop:step")->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Curve CSV")->required();

  cli::SafetyOptions safety;
  std::string logs;
  auto* safety_cmd = app.add_subcommand("safety", "Scripted cut-in reaction with and without advisory");
  safety_cmd->add_option("--scenario", safety.scenario, "Scenario config with a cut-in (JSON)")->required();
  safety_cmd->add_option("--lead-time", safety.lead_time, "Advisory lead time, seconds")->capture_default_str();
  safety_cmd->add_option("--out", safety.out, "Safety summary JSON")->required();
  safety_cmd->add_option("--logs", logs, "Directory for the two trajectory CSV logs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  if (*gen_cmd) return cli::cmd_gen(gen, std::cerr);
  if (*run_cmd) {
    if (!detections.empty()) run.detections = detections;
    run.classes.insert(classes.begin(), classes.end());
    return cli::cmd_run(run, std::cerr);
  }
  if (*eval_cmd) return cli::cmd_eval(eval, std::cerr);
  if (*safety_cmd) {
    if (!logs.empty()) safety.logs = logs;
    return cli::cmd_safety(safety, std::cerr);
  }
  return cli::kExitUsage;
}
