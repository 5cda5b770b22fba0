#include "flowcast/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace flowcast;

namespace {

int run_stage(Pipeline& pipe, const std::string& stage) {
  if (stage == "synth") pipe.stage_synth();
  else if (stage == "ingest") {
    pipe.stage_ingest();
    std::cout << "[ingest] rows outside session hours dropped: "
              << pipe.dropped_rows() << "\n";
  }
  else if (stage == "features") pipe.stage_features();
  else if (stage == "adf") pipe.stage_adf();
  else if (stage == "grid") pipe.stage_grid();
  else if (stage == "select") pipe.stage_select();
  else if (stage == "report") pipe.stage_report();
  else if (stage == "test") pipe.stage_test();
  else if (stage == "run") {
    const Manifest m = pipe.run_all();
    std::cout << m.to_string();
    return 0;
  }
  std::cout << "[" << stage << "] done -> " << pipe.config().out_dir << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowcast: bracketed order-book forecasting, adaptive model "
               "selection, and selection-history tests"};
  app.require_subcommand(1);

  std::string config_path, out_dir, reduced_grid;
  long long seed = -1;
  int threads = 0;
  app.add_option("--config", config_path, "run configuration file");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed, "synthetic-data seed (overrides config)");
  app.add_option("--threads", threads, "worker pool cap (overrides config)");
  app.add_option("--reduced-grid", reduced_grid,
                 "model grid spec, e.g. 'group=0,2,8;w=48;p=0,1;q=0,1;limit=20'");
  app.fallthrough();

  const char* stage_names[] = {"synth",  "ingest", "features", "adf",  "grid",
                               "select", "report", "test",     "run"};
  const char* stage_descs[] = {
      "generate synthetic ticks",
      "parse ticks into 5-minute brackets",
      "per-bracket OIB/OFI means and p-scores",
      "rolling unit-root scans",
      "fit the fixed model grid and forecast one step ahead",
      "run the adaptive selectors over the grid forecasts",
      "MSE/MAE, PL and Sharpe reports",
      "Bayes-factor and binomial tests on selection histories",
      "all stages plus the artifact manifest"};
  for (size_t i = 0; i < std::size(stage_names); ++i)
    app.add_subcommand(stage_names[i], stage_descs[i]);

  std::string artifact, kind, out_file;
  auto* plot = app.add_subcommand("plotdata", "long-format series,x,y csv "
                                              "from a stage artifact");
  plot->add_option("artifact", artifact, "stage csv file")->required();
  plot->add_option("kind", kind,
                   "cumulative-pl | adf-scan | selection-histogram | bf-series")
      ->required();
  plot->add_option("--out-file", out_file, "write here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed()) {
      const std::string csv = emit_plotdata(artifact, kind);
      if (out_file.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + out_file);
        out << csv;
      }
      return 0;
    }

    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::parse_file(config_path);
    // The output directory is the only setting an environment variable
    // may override; --out still wins over both.
    if (const char* env_out = std::getenv("FLOWCAST_OUT"))
      if (env_out[0] != '\0') cfg.out_dir = env_out;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
    if (threads > 0) cfg.threads = threads;
    if (!reduced_grid.empty()) apply_grid_spec(cfg, reduced_grid);

    Pipeline pipe(cfg);
    for (const char* name : stage_names)
      if (app.got_subcommand(name)) return run_stage(pipe, name);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
