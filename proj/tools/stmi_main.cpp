#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "stmi/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"space-time mutual information toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "path to an INI or JSON config")
      ->required();

  std::string suite_name;
  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite_name, "suite name; see list-suites")
      ->required();

  CLI::App* list =
      app.add_subcommand("list-suites", "list verification suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      stmi::Config cfg = stmi::Config::parse_file(config_path);
      return stmi::run_experiment(cfg, std::cout);
    }
    if (verify->parsed()) {
      stmi::SuiteReport rep = stmi::run_suite(suite_name, std::cout);
      std::cout << "suite " << rep.suite << ": "
                << (rep.ok() ? "PASS" : "FAIL") << "\n";
      return rep.ok() ? stmi::kExitOk : stmi::kExitAssertion;
    }
    if (list->parsed()) {
      for (const auto& s : stmi::list_suites()) std::cout << s << "\n";
      return stmi::kExitOk;
    }
  } catch (const stmi::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return stmi::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
