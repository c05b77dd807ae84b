#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dynloc/config.hpp"
#include "dynloc/io.hpp"

namespace dynloc {

// Batch experiment front-end. Every artifact is written atomically and listed
// in the run manifest; reruns with the same configuration and seed are
// byte-identical no matter how many workers execute the realization jobs.
class ExperimentRunner {
 public:
  ExperimentRunner(RunConfig config, std::filesystem::path out_dir);

  // subcommand: dynamics | exponents | msa | wegner | green-checks | certify | all
  void run(const std::string& subcommand);

  // Writes the resolved config echo and the manifest; prints failed verdicts
  // to the diagnostic stream and returns the process exit status.
  int finalize(std::ostream& diagnostics);

  const std::vector<std::pair<std::string, bool>>& verdicts() const { return verdicts_; }

 private:
  void run_dynamics();
  void run_exponents();
  void run_msa();
  void run_wegner();
  void run_green_checks();
  void run_certify();

  void verdict(const std::string& name, bool pass);

  RunConfig cfg_;
  std::filesystem::path out_;
  Manifest manifest_;
  std::vector<std::pair<std::string, bool>> verdicts_;
};

}  // namespace dynloc
