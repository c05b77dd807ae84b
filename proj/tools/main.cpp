#include <clocale>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "dynloc/config.hpp"
#include "dynloc/experiments.hpp"

int main(int argc, char** argv) {
  std::setlocale(LC_NUMERIC, "C");
  CLI::App app{"dynloc: disordered-lattice dynamics and localization experiments"};
  app.require_subcommand(1, 0);  // one or more, run in the order given

  std::string config_path;
  std::string out_dir;
  int workers = -1;
  std::string seed;
  app.add_option("--config", config_path, "configuration file (key = value sections)");
  app.add_option("--workers", workers, "worker pool size (overrides config)");
  app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--out", out_dir, "output directory (overrides config)");

  const char* subcommands[] = {"dynamics", "exponents", "msa", "wegner",
                               "green-checks", "certify", "all"};
  for (const char* name : subcommands) app.add_subcommand(name)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    dynloc::RunConfig cfg = config_path.empty() ? dynloc::RunConfig::defaults()
                                                : dynloc::RunConfig::from_file(config_path);
    if (workers > 0) cfg.set("execution.workers", std::to_string(workers));
    if (!seed.empty()) cfg.set("execution.master_seed", seed);
    if (!out_dir.empty()) cfg.set("output.directory", out_dir);

    dynloc::ExperimentRunner runner(cfg, cfg.get_string("output.directory"));
    for (const auto* sub : app.get_subcommands()) runner.run(sub->get_name());
    return runner.finalize(std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
