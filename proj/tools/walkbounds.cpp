#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "walkbounds/pipeline.hpp"

using namespace walkbounds;

namespace {

std::set<std::string> split_stages(const std::string& list) {
  std::set<std::string> out;
  std::stringstream ss(list);
  std::string s;
  while (std::getline(ss, s, ',')) {
    if (s.empty()) continue;
    if (std::find(known_stages().begin(), known_stages().end(), s) == known_stages().end()) {
      throw ConfigError("--stages", "unknown stage '" + s + "'");
    }
    out.insert(s);
  }
  return out;
}

int print_diagnostics(const std::vector<Diagnostic>& diags) {
  int code = kExitOk;
  for (const auto& d : diags) {
    std::cerr << d.severity << ": " << d.field << ": " << d.message << "\n";
    if (d.severity == "error") code = kExitConfig;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic invariants of random walks on groups and the inequalities between them"};
  app.require_subcommand(1);

  std::string config_path, out_dir, stages;
  std::uint64_t seed = 0;
  double budget_mem = 0;

  auto* validate = app.add_subcommand("validate", "check a config without running stages");
  validate->add_option("--config", config_path, "config file (YAML or JSON)")->required();

  auto* run = app.add_subcommand("run", "run the pipeline and write a report bundle");
  run->add_option("--config", config_path, "config file (YAML or JSON)")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  auto* seed_opt = run->add_option("--seed", seed, "overrides the config seed");
  auto* stages_opt = run->add_option("--stages", stages, "comma-separated stage list");
  auto* mem_opt = run->add_option("--budget-mem", budget_mem, "memory cap in bytes")
                      ->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "re-render bounds.md from a saved bundle");
  report->add_option("--out", out_dir, "bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*validate) {
      const auto cfg = load_config(config_path);
      const int code = print_diagnostics(validate_config(cfg));
      if (code == kExitOk) std::cout << "ok: " << cfg.name << "\n";
      return code;
    }
    if (*run) {
      const auto cfg = load_config(config_path);
      RunOverrides ov;
      if (*seed_opt) ov.seed = seed;
      if (*stages_opt) ov.stages = split_stages(stages);
      if (*mem_opt) ov.memory_bytes = static_cast<std::uint64_t>(budget_mem);
      const auto result = run_pipeline(cfg, ov);
      write_bundle(result, out_dir);
      for (const auto& d : result.report.at("diagnostics")) {
        std::cerr << d.at("severity").get<std::string>() << ": " << d.at("field").get<std::string>()
                  << ": " << d.at("message").get<std::string>() << "\n";
      }
      for (const auto& e : result.report.at("errors")) {
        std::cerr << "error in stage " << e.at("stage").get<std::string>() << ": "
                  << e.at("message").get<std::string>() << "\n";
      }
      std::cout << out_dir << ": exit " << result.exit_code << "\n";
      return result.exit_code;
    }
    return rerender_bundle(out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStageError;
  }
}
