// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <iostream>
#include <string>

#include <Eigen/Core>

#include "helmdg/check.hpp"
#include "helmdg/study.hpp"

namespace {

const char* kUsage =
    R"(usage: helmdg <command> [<config>]

commands:
  solve <config>   single solve; writes mesh, field, samples, estimator CSV
  study <config>   run the study selected by study.kind in the config
  adapt <config>   adaptive refinement study (study.kind fixed to adaptive)
  gamma <config>   approximation-factor scaling (study.kind fixed to
                   gamma_ba_scaling; requires a problem without Robin faces)
  check            deterministic invariant suite; byte-stable output
  help             this text

exit codes: 0 success, 2 configuration error, 3 numerical failure
environment: HELMDG_THREADS caps linear algebra parallelism
)";

int thread_cap_error() {
  std::cerr << "helmdg: HELMDG_THREADS must be a positive integer\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace helmdg;
  if (const char* env = std::getenv("HELMDG_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) return thread_cap_error();
    Eigen::setNbThreads(int(n));
  }
  if (argc < 2) {
    std::cerr << kUsage;
    return 2;
  }
  const std::string cmd = argv[1];
  if (cmd == "help" || cmd == "--help" || cmd == "-h") {
    std::cout << kUsage;
    return 0;
  }
  try {
    if (cmd == "check") {
      if (argc != 2) {
        std::cerr << "helmdg check: takes no arguments\n";
        return 2;
      }
      return run_check(std::cout) == 0 ? 0 : 3;
    }
    if (cmd == "solve" || cmd == "study" || cmd == "adapt" || cmd == "gamma") {
      if (argc != 3) {
        std::cerr << "helmdg " << cmd << ": expected one config file\n";
        return 2;
      }
      std::string forced;
      if (cmd == "solve") forced = "solve";
      if (cmd == "adapt") forced = "adaptive";
      if (cmd == "gamma") forced = "gamma_ba_scaling";
      ConfigMap map = parse_config_file(argv[2]);
      StudyConfig cfg = load_study_config(map, forced);
      run_study_command(cfg, std::cout);
      return 0;
    }
    std::cerr << "helmdg: unknown command '" << cmd << "'\n" << kUsage;
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "helmdg: numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "helmdg: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "helmdg: " << e.what() << "\n";
    return 3;
  }
}
