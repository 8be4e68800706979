#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "fpp/fpp.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

int write_figure(const fs::path& dir, const std::string& kind) {
  const std::string svg = fpp::render_figure(dir, kind);
  std::ofstream(dir / ("figure_" + kind + ".svg"), std::ios::binary) << svg;
  std::cout << "wrote " << (dir / ("figure_" + kind + ".svg")).string() << '\n';
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out, int jobs, bool svg) {
  const fpp::ExperimentConfig config = fpp::load_config(config_path);
  const auto start = std::chrono::steady_clock::now();
  const fpp::RunOutput run = fpp::run_experiment(config, fpp::resolve_jobs(jobs));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fpp::write_run(out, config, run, wall);
  std::cout << config.name << ": " << run.files.size() << " files, " << run.certification.dump() << '\n';
  if (svg)
    for (const auto& kind : fpp::figure_kinds()) {
      try {
        write_figure(out, kind);
      } catch (const fpp::MissingData&) {
      }
    }
  for (const auto& v : run.violations) std::cerr << "invariant violation: " << v << '\n';
  return run.violations.empty() ? 0 : kExitInvariant;
}

int cmd_verify(const std::string& dir) {
  const auto problems = fpp::verify_run(dir);
  for (const auto& p : problems) std::cerr << p << '\n';
  std::cout << (problems.empty() ? "ok" : "FAILED") << '\n';
  return problems.empty() ? 0 : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-passage percolation experiments on lattice domains"};
  app.require_subcommand(1);

  std::string config_path, out_dir, render_dir, figure, verify_dir;
  int jobs = 0;
  bool svg = false;

  auto* run = app.add_subcommand("run", "Run an experiment config (or rerun a manifest)");
  run->add_option("config", config_path, "Config or manifest JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--jobs", jobs, "Worker threads (default: FPP_JOBS or hardware)");
  run->add_flag("--svg", svg, "Also render every available figure");

  auto* render = app.add_subcommand("render", "Render a figure from a result directory");
  render->add_option("dir", render_dir, "Result directory")->required()->check(CLI::ExistingDirectory);
  render->add_option("--figure", figure, "domain | graph | rays | circuit")->required();

  auto* verify = app.add_subcommand("verify", "Re-check stored results and witnesses");
  verify->add_option("dir", verify_dir, "Result directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir, jobs, svg);
    if (*render) return write_figure(render_dir, figure);
    if (*verify) return cmd_verify(verify_dir);
  } catch (const fpp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fpp::MissingData& e) {
    std::cerr << "missing data: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fpp::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  }
  return 0;
}
