// Command-line front end. Each subcommand writes its artifacts into --out.

#include <CLI11.hpp>

#include <malloc.h>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "mcpilot/commands.hpp"

int main(int argc, char** argv) {
  // The rollout allocates and frees large GP matrices every step; keep them in
  // the heap instead of round-tripping through mmap.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  CLI::App app{"Learning-based robotic throwing with Monte Carlo policy search"};
  app.require_subcommand(1);

  mcpilot::CommandOptions opts;
  std::string config, out = "out";
  std::uint64_t seed = 0;

  const std::map<std::string, std::string> help = {
      {"simulate", "throw at evaluation targets with a baseline (ballistic by default)"},
      {"explore", "N_exp baseline throws into throws.csv"},
      {"fit-model", "fit the GP dynamics model from throws.csv"},
      {"estimate-delay", "Bayesian optimisation of the release-delay model"},
      {"optimize", "Monte Carlo policy optimisation from a fresh policy"},
      {"evaluate", "evaluate policy.txt, or a baseline with --baseline"},
      {"trial", "full pipeline: explore, fit, delay, optimize, test"},
      {"retarget", "re-optimise for a raised target plane without new throws"},
      {"compare-baselines", "ballistic, network and policy on the same targets"},
  };
  for (const auto& name : mcpilot::command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.count(name) ? help.at(name) : "");
    sub->add_option("--config", config, "key = value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output directory");
    sub->add_flag("--no-delay-model", opts.no_delay_model,
                  "keep the command time at t_r and optimise without the delay model");
    sub->add_option("--baseline", opts.baseline, "ballistic or mlp")
        ->check(CLI::IsMember({"ballistic", "mlp"}));
  }

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();
  if (!config.empty()) opts.config = config;
  if (sub->count("--seed") > 0) opts.seed = seed;
  opts.out = out;

  try {
    std::filesystem::create_directories(opts.out);
    return mcpilot::run_command(sub->get_name(), opts, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
