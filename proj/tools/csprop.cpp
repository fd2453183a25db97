// Command-line driver: parse a plain-text config, dispatch the task, and
// write CSV/symbol-text reports.
#include <CLI11.hpp>
#include <iostream>

#include "csprop/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical coherent-state propagator laboratory"};
  std::string config_path;
  std::string task_override, out_override;
  int threads_override = 0;
  app.add_option("--config", config_path, "path to a key: value config file")
      ->required();
  app.add_option("--task", task_override, "override the config task");
  app.add_option("--out", out_override, "override the output path");
  app.add_option("--threads", threads_override, "worker threads for sweeps");
  CLI11_PARSE(app, argc, argv);

  try {
    csprop::RunConfig cfg = csprop::read_config_file(config_path);
    if (!task_override.empty()) cfg.task = task_override;
    if (!out_override.empty()) cfg.out_path = out_override;
    if (threads_override > 0) cfg.threads = threads_override;
    return csprop::run(cfg, std::cerr);
  } catch (const csprop::ConfigError& err) {
    std::cerr << "csprop: config error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "csprop: " << err.what() << "\n";
    return 1;
  }
}
