#pragma once

#include "flowcast/adaptive.hpp"
#include "flowcast/evaluation.hpp"
#include "flowcast/hypotest.hpp"
#include "flowcast/market_data.hpp"
#include "flowcast/model_zoo.hpp"
#include "flowcast/stationarity.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowcast {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StageError : std::runtime_error {
  std::string stage;
  StageError(std::string stage_name, const std::string& what)
      : std::runtime_error("stage " + stage_name + ": " + what),
        stage(std::move(stage_name)) {}
};

struct TestSpec {
  std::string name;
  std::string selector; // name of the selector whose history is tested
  ClassQuery query;
  int period = 180; // forecast samples per period (180 = 5 trading days)
};

struct RunConfig {
  // data
  std::string source = "synth"; // synth | csv
  std::string ticks_path;
  bool cumulative_volume = false;
  uint64_t seed = 42;
  int days = 10;
  SynthParams synth;

  std::vector<int> adf_windows = {12, 48, 96};

  std::string grid_filter; // ModelFilter text; empty = full 552-model grid
  int grid_limit = 0;      // keep the first N specs in order; 0 = all

  std::vector<SelectorConfig> selectors;
  std::vector<TestSpec> tests;

  int threads = 1;
  std::string out_dir = "out";

  static RunConfig parse(const std::string& text);
  static RunConfig parse_file(const std::string& path);

  // Full validation before any computation; throws ConfigError.
  void validate() const;
  std::vector<ModelSpec> grid() const;
  int min_history() const; // max window + max difference order
};

// Parses a --reduced-grid string "filter[;limit=N]" into the config.
void apply_grid_spec(RunConfig& config, const std::string& spec);

struct ManifestEntry {
  std::string file;
  std::string sha256;
  uint64_t bytes = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries; // sorted by file name
  std::string to_string() const;
};

// Stage-sequential pipeline over one output directory. Each stage writes
// its artifacts and can be re-run standalone from the files already in
// the directory.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);

  void stage_synth();
  void stage_ingest();
  void stage_features();
  void stage_adf();
  void stage_grid();
  void stage_select();
  void stage_report();
  void stage_test();
  void stage_plotdata();

  // All stages in order; writes manifest.txt and returns the manifest.
  // On failure writes MANIFEST.partial naming the failed stage and throws
  // StageError.
  Manifest run_all();

  Manifest manifest() const; // hashes of everything currently written
  const RunConfig& config() const { return config_; }
  long dropped_rows() const { return dropped_rows_; } // out-of-session ticks

 private:
  std::string path(const std::string& name) const;
  void write_artifact(const std::string& name, const std::string& content);
  void load_ticks();
  void load_series();
  void load_table();

  RunConfig config_;
  std::vector<std::string> written_;
  std::vector<TickRecord> ticks_;
  bool have_ticks_ = false;
  BracketSeries series_;
  bool have_series_ = false;
  ForecastTable table_;
  bool have_table_ = false;
  long dropped_rows_ = 0;
};

// Long-format plot data (`series,x,y`) from a stage artifact.
// Kinds: cumulative-pl | adf-scan | selection-histogram | bf-series.
std::string emit_plotdata(const std::string& artifact_path,
                          const std::string& kind);

} // namespace flowcast
