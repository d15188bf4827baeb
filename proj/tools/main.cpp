#include <chrono>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ngrhmc/catalog.hpp"
#include "ngrhmc/report_io.hpp"
#include "ngrhmc/run_config.hpp"
#include "ngrhmc/sampler.hpp"
#include "demos.hpp"

namespace {

int cmdRun(const std::string& configPath) {
  using namespace ngrhmc;
  RunConfig cfg;
  ExampleModel example;
  try {
    cfg = loadRunConfig(configPath);
    example = materializeModel(cfg);
    validateConfig(cfg.sampler, example.model.dim);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    if (cfg.sampler.initial.size() == 0 && example.feasiblePoint.size() > 0)
      cfg.sampler.initial = example.feasiblePoint;
    std::filesystem::create_directories(cfg.output.directory);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<TrajectoryOutput> chains = runChains(example.model, example.constraints, cfg.sampler);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::vector<MonitorSummary> summaries = summarizeRun(example.model, chains);
    const std::string dir = cfg.output.directory;
    if (cfg.output.csv) {
      writeSamplesCsv(dir + "/samples.csv", chains, example.model.dim);
      if (cfg.output.emitEventLog) writeEventsCsv(dir + "/events.csv", chains, example.model.dim);
      if (cfg.output.emitDenseTrace) writeTraceCsv(dir + "/trace.csv", chains, example.model.dim);
      if (example.dataset.size() > 0)
        writeDatasetCsv(dir + "/dataset.csv", example.dataset, example.datasetColumns);
    }
    if (cfg.output.json)
      writeReport(dir + "/report.json", buildReport(cfg, example, chains, summaries, wall));
    std::cout << "run complete: model=" << example.name << " dim=" << example.model.dim
              << " chains=" << chains.size() << " -> " << dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

int cmdValidate(const std::string& configPath) {
  using namespace ngrhmc;
  try {
    const RunConfig cfg = loadRunConfig(configPath);
    const ExampleModel example = materializeModel(cfg);
    validateConfig(cfg.sampler, example.model.dim);
    std::cout << "config ok: model=" << example.name << " dim=" << example.model.dim
              << " constraints=" << example.constraints.size()
              << " chains=" << cfg.sampler.chains << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
}

int cmdListExamples() {
  using namespace ngrhmc;
  for (const std::string& name : exampleNames()) {
    const ExampleModel ex = buildExample(name);
    std::cout << name << "  (dim " << ex.model.dim << ", " << ex.constraints.size()
              << (ex.constraints.size() == 1 ? " constraint" : " constraints") << ")\n    "
              << ex.description << "\n";
  }
  return 0;
}

int cmdDemo(const std::string& id, const std::string& outDir) {
  using namespace ngrhmc;
  try {
    demos::run(id, outDir);
    std::cout << "demo " << id << " -> " << outDir << "\n";
    return 0;
  } catch (const UnknownDemo& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecewise-deterministic Hamiltonian sampler for constrained distributions"};
  app.require_subcommand(1);

  std::string configPath;
  auto* run = app.add_subcommand("run", "execute a sampling run from a config file");
  run->add_option("config", configPath, "path to a JSON run config")->required();

  std::string validatePath;
  auto* validate = app.add_subcommand("validate", "check a config file without running");
  validate->add_option("config", validatePath, "path to a JSON run config")->required();

  auto* list = app.add_subcommand("list-examples", "list the built-in example models");

  std::string demoId, demoOut = "demo-out";
  auto* demo = app.add_subcommand("demo", "reproduce a bundled illustration dataset");
  demo->add_option("id", demoId, "one of: fig1, fig2, toy-table")->required();
  demo->add_option("--output", demoOut, "output directory (default demo-out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*run) return cmdRun(configPath);
  if (*validate) return cmdValidate(validatePath);
  if (*list) return cmdListExamples();
  if (*demo) return cmdDemo(demoId, demoOut);
  return 1;
}
