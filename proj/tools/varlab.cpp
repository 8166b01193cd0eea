#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varlab/cli/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"varlab: numerical checks of weighted variational and jump inequalities for ergodic averages"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "run the experiment named in a JSON config");
  run->add_option("config", config, "config file")->required();

  auto* list = app.add_subcommand("list-experiments", "list experiments, their anchors and parameters");

  std::string op;
  std::vector<std::string> args;
  auto* oracle = app.add_subcommand("oracle", "brute-force and exact variation oracles on a sample path");
  oracle->add_option("op", op, "hvar | hvar_bruteforce | var_inhom | jump | jump_bruteforce")->required();
  oracle->footer("arguments after <op>: <r|lambda> [dim=<n>] <values...>; negative values are passed through");
  oracle->prefix_command();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : varlab::cli::kConfigError;
  }

  if (*run) return varlab::cli::run_config(config, std::cout, std::cerr);
  if (*list) {
    varlab::cli::list_experiments(std::cout);
    return 0;
  }
  if (*oracle) {
    for (const std::string& a : oracle->remaining())
      if (a != "--") args.push_back(a);
    return varlab::cli::oracle(op, args, std::cout, std::cerr);
  }
  return varlab::cli::kConfigError;
}
