// qcapgeo command line: run / verify / amort.
#include "qcapgeo/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>

using namespace qcapgeo;

int main(int argc, char** argv) {
  CLI::App app{"Capacity and distillable-entanglement bounds via manifold optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::optional<std::string> out;
  std::string profile = "desk";

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config (JSON)");
  std::string config_path;
  run_cmd->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "override the base seed");
  run_cmd->add_option("--restarts", restarts, "override restarts per point");
  run_cmd->add_option("--out", out, "override the output directory");
  run_cmd->add_option("--profile", profile, "desk keeps the config restarts, paper sets 200")
      ->check(CLI::IsMember({"desk", "paper"}));

  auto* verify_cmd = app.add_subcommand("verify", "Recompute a report at its checkpoints");
  std::string report_path;
  verify_cmd->add_option("report", report_path, "report.json")->required();

  auto* amort_cmd = app.add_subcommand("amort", "Amortization check for one channel");
  std::string channel_text;
  int samples = 100;
  std::uint64_t amort_seed = 1;
  int amort_restarts = 10;
  amort_cmd->add_option("channel", channel_text, "channel spec, e.g. gadc:gamma=0.3,N=0.1")->required();
  amort_cmd->add_option("--samples", samples, "random state pairs")->check(CLI::PositiveNumber);
  amort_cmd->add_option("--seed", amort_seed, "seed");
  amort_cmd->add_option("--restarts", amort_restarts, "restarts for I_c")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      ExperimentConfig cfg = load_config(config_path);
      if (profile == "paper") cfg.restarts = 200;
      if (restarts) cfg.restarts = *restarts;
      if (seed) cfg.seed = *seed;
      if (out) cfg.out_dir = *out;
      ExperimentReport rep = run(cfg);
      int failed = 0;
      for (const PointRecord& p : rep.points)
        if (p.status != "ok") {
          ++failed;
          std::cerr << "point " << p.param << " n=" << p.n << ": " << p.status << "\n";
        }
      std::cout << "wrote " << rep.csv_path << " and " << rep.report_path << " (" << rep.points.size()
                << " points, " << failed << " failed, config " << rep.config_hash << ")\n";
      return failed == 0 ? 0 : 3;
    }
    if (*verify_cmd) {
      VerifySummary s = verify(report_path);
      for (const std::string& f : s.failures()) std::cout << "FAIL " << f << "\n";
      std::cout << (s.pass ? "PASS" : "FAIL") << " (" << s.checks.size() << " checks)\n";
      return s.pass ? 0 : 1;
    }
    if (*amort_cmd) {
      const ChannelRep ch = channel_from_spec(parse_channel_spec(channel_text));
      AmortizationReport r = amortization_check(ch, samples, amort_seed, amort_restarts);
      nlohmann::json j = {{"channel", channel_text}, {"samples", r.samples}, {"seed", amort_seed},
                          {"ic", r.ic},           {"max_gap", r.max_gap}, {"margin", r.margin}};
      std::cout << j.dump(2) << "\n";
      return r.margin >= -1e-6 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
