// hmlab: batch front-end. Every subcommand reads a scenario and runs the tasks it names.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hmlab/error.hpp"
#include "hmlab/runner.hpp"
#include "hmlab/scenario.hpp"

namespace {

struct Flags {
  std::string scenario;
  std::string out;
  int refine = 0;
  long long seed = -1;
  int jobs = 1;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--scenario", f.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "Output directory (overrides the scenario)");
  app->add_option("--refine", f.refine, "Refinement ladder depth: h, h/2, ... (K levels)")->check(CLI::Range(1, 8));
  app->add_option("--seed", f.seed, "Seed for every task (overrides the scenario)")->check(CLI::NonNegativeNumber);
  app->add_option("--jobs", f.jobs, "Concurrent tasks and Monte Carlo threads")->check(CLI::Range(1, 1024));
}

int execute(const std::string& command, const Flags& f) {
  try {
    hmlab::Scenario s = hmlab::parse_scenario(f.scenario);
    if (f.refine > 0) hmlab::set_ladder_depth(s, f.refine);
    if (f.seed >= 0) hmlab::set_seed(s, static_cast<std::uint64_t>(f.seed));
    hmlab::RunOptions opts;
    opts.command = command;
    opts.jobs = f.jobs;
    if (!f.out.empty()) opts.output = f.out;
    const hmlab::RunResult r = hmlab::run(s, opts);
    for (const auto& t : r.tasks) {
      std::printf("%-28s %-22s %-13s %8.2fs\n", t.name.c_str(), hmlab::to_string(t.kind).c_str(), t.status.c_str(),
                  t.seconds);
      if (!t.error.empty()) std::printf("    %s\n", t.error.c_str());
      for (const auto& rep : t.reports)
        for (const auto& failure : rep.failures()) std::printf("    %s: %s\n", rep.id.c_str(), failure.c_str());
    }
    std::printf("outputs in %s (exit %d)\n", r.output_dir.c_str(), r.exit_code);
    return r.exit_code;
  } catch (const hmlab::ValidationError& e) {
    std::cerr << "invalid scenario:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return hmlab::kExitError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return hmlab::kExitError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic measure and degenerate elliptic estimates for thin boundaries"};
  app.set_version_flag("--version", hmlab::version());
  app.require_subcommand(1);
  Flags flags;
  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"solve", "Dirichlet solves; dumps fields, slices and solver statistics"},
      {"green", "Green functions for the listed poles"},
      {"hm", "Harmonic-measure rows for patch groups"},
      {"mc", "Monte Carlo harmonic measure"},
      {"verify", "Estimate checks (every verify-* task)"},
      {"whitney", "Whitney decomposition dump"},
      {"geom-check", "Ahlfors regularity, corkscrews and Harnack chains"},
      {"all", "Every task of the scenario"},
  };
  std::string chosen;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_flags(sub, flags);
    sub->callback([&chosen, name = std::string(c.name)] { chosen = name; });
  }
  CLI11_PARSE(app, argc, argv);
  return execute(chosen, flags);
}
