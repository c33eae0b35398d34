// msgn — multiscale stochastic gene network simulator.
//
// Subcommands: simulate, pdmp, converge, clt, validate. Each takes a
// line-oriented config file; --seed/--out/--workers override the file.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "msgn/errors.hpp"
#include "msgn/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"multiscale stochastic gene network simulator"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    msgn::CliOverrides overrides;
  };

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "run the scaled jump process and write path/events CSVs"},
      {"pdmp", "run the limiting hybrid process and write path/events CSVs"},
      {"converge", "coupled strong-error sweep over a list of N"},
      {"clt", "terminal fluctuation law comparison against the limit SDE"},
      {"validate", "parse and validate a network file"},
  };

  std::vector<std::shared_ptr<Args>> arg_blocks;
  for (const auto& [name, desc] : commands) {
    auto args = std::make_shared<Args>();
    arg_blocks.push_back(args);
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", args->config, "experiment config file")->required();
    sub->add_option("--seed", [args](const CLI::results_t& r) {
      args->overrides.seed = std::stoull(r[0]);
      return true;
    }, "override the config seed");
    sub->add_option("--out", [args](const CLI::results_t& r) {
      args->overrides.out_dir = r[0];
      return true;
    }, "override the output directory");
    sub->add_option("--workers", [args](const CLI::results_t& r) {
      args->overrides.workers = std::stoi(r[0]);
      return true;
    }, "override the worker-pool size");
  }

  CLI11_PARSE(app, argc, argv);

  for (size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.get_subcommand(commands[i].first);
    if (!sub->parsed()) continue;
    msgn::ExperimentConfig cfg;
    try {
      cfg = msgn::parse_config_file(arg_blocks[i]->config);
    } catch (const msgn::io_error& e) {
      std::cerr << "io error: " << e.what() << "\n";
      return 5;
    } catch (const msgn::parse_error& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
    return msgn::run_experiment(cfg, commands[i].first, arg_blocks[i]->overrides, std::cerr);
  }
  return 2;
}
