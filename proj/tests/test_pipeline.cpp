#include "flowcast/pipeline.hpp"

#include "flowcast/csvio.hpp"
#include "flowcast/sha256.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace flowcast;

namespace {

const char* kMiniConfig = R"(
[data]
source = synth
seed = 11
days = 4

[adf]
windows = 12,48

[grid]
filter = group=0;w=24;d=1;q=0,1
limit = 6

[selector s13]
mode = 13
lambda = 0.9
c1 = 0.25
c2 = 0.75

[test zeroq]
selector = s13
h1 = q=0
h0 = all
period = 36
)";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig mini_config(const std::string& out) {
  RunConfig cfg = RunConfig::parse(kMiniConfig);
  cfg.out_dir = out;
  cfg.threads = 2;
  return cfg;
}

} // namespace

TEST_CASE("config parsing, overrides and validation") {
  RunConfig cfg = RunConfig::parse(kMiniConfig);
  CHECK(cfg.source == "synth");
  CHECK(cfg.days == 4);
  CHECK(cfg.adf_windows == std::vector<int>{12, 48});
  CHECK(cfg.grid().size() == 6);
  REQUIRE(cfg.selectors.size() == 1);
  CHECK(cfg.selectors[0].name == "s13");
  CHECK(cfg.selectors[0].lambda == 0.9);
  REQUIRE(cfg.tests.size() == 1);
  CHECK(cfg.tests[0].period == 36);
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("reduced-grid flag overrides the filter") {
    apply_grid_spec(cfg, "group=0,2,8;w=48;p=0,1;q=0,1;limit=20");
    CHECK(cfg.grid().size() == 20);
    int multi = 0;
    for (const ModelSpec& s : cfg.grid())
      if (s.is_multivariate()) ++multi;
    CHECK(multi == 4);
  }
  SUBCASE("selector misconfiguration fails before any computation") {
    RunConfig bad = cfg;
    bad.selectors[0].c1_quantile = 0.75;
    bad.selectors[0].c2_quantile = 0.50;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
  SUBCASE("unknown keys are rejected") {
    CHECK_THROWS_AS(RunConfig::parse("[data]\nsourc = synth\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[nonsense]\nx = 1\n"), ConfigError);
  }
  SUBCASE("queries are checked against the run grid") {
    RunConfig bad = cfg;
    bad.tests[0].query.h1 = ModelFilter::parse("w=96"); // not in this grid
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
  SUBCASE("empty grids are rejected") {
    RunConfig bad = cfg;
    bad.grid_filter = "group=4;w=12;d=2;q=2;p=0";
    CHECK_NOTHROW(bad.grid()); // one model
    bad.grid_filter = "group=7;w=12";
    CHECK_THROWS_AS(bad.grid(), ConfigError);
  }
}

TEST_CASE("run_all produces a complete, reproducible artifact set") {
  const std::string out1 = (fs::temp_directory_path() / "fc_t1").string();
  const std::string out2 = (fs::temp_directory_path() / "fc_t2").string();
  fs::remove_all(out1);
  fs::remove_all(out2);

  Pipeline p1(mini_config(out1));
  const Manifest m1 = p1.run_all();
  Pipeline p2(mini_config(out2));
  const Manifest m2 = p2.run_all();

  // completeness: one artifact per stage
  std::vector<std::string> names;
  for (const auto& e : m1.entries) names.push_back(e.file);
  for (const char* want :
       {"ticks.csv", "brackets.csv", "features.csv", "adf_w12.csv",
        "adf_w48.csv", "forecasts.csv", "selections_s13.csv", "report.csv",
        "cum_pl.csv", "tests_zeroq.csv", "plot_cum_pl.csv",
        "plot_hist_s13.csv", "plot_bf_zeroq.csv"})
    CHECK(std::find(names.begin(), names.end(), want) != names.end());

  // determinism: identical hashes across runs
  CHECK(m1.to_string() == m2.to_string());
  CHECK(slurp(out1 + "/manifest.txt") == slurp(out2 + "/manifest.txt"));

  SUBCASE("a later stage rerun alone reproduces its outputs") {
    const std::string before = slurp(out1 + "/selections_s13.csv");
    fs::remove(out1 + "/selections_s13.csv");
    Pipeline p3(mini_config(out1));
    p3.stage_select(); // reads forecasts.csv + brackets.csv from disk
    CHECK(slurp(out1 + "/selections_s13.csv") == before);
  }
  SUBCASE("plotdata shapes") {
    const std::string cum = emit_plotdata(out1 + "/cum_pl.csv", "cumulative-pl");
    CHECK(cum.rfind("series,x,y", 0) == 0);
    // fixed-model series share one forecast index set, so their day
    // series have equal length (selectors start after the warm-up)
    const CsvTable t = read_csv(out1 + "/cum_pl.csv");
    std::map<std::string, int> counts;
    const int im = t.column("model_code");
    for (const auto& row : t.rows) counts[row[im]] += 1;
    int fixed_len = -1;
    int fixed_series = 0;
    for (const auto& [code, n] : counts) {
      if (code.rfind("M", 0) != 0 || code.rfind("MG", 0) == 0) continue;
      ++fixed_series;
      if (fixed_len < 0) fixed_len = n;
      CHECK(n == fixed_len);
    }
    CHECK(fixed_series >= 3);

    const std::string hist =
        emit_plotdata(out1 + "/selections_s13.csv", "selection-histogram");
    long total = 0;
    const CsvTable h = parse_csv(hist);
    for (const auto& row : h.rows) total += std::stol(row[2]);
    const CsvTable sel = read_csv(out1 + "/selections_s13.csv");
    CHECK(total == static_cast<long>(sel.rows.size()));

    CHECK_THROWS_AS(emit_plotdata(out1 + "/cum_pl.csv", "mystery"),
                    std::invalid_argument);
  }
}

TEST_CASE("stage failure leaves a partial marker and names the stage") {
  const std::string out = (fs::temp_directory_path() / "fc_fail").string();
  fs::remove_all(out);
  fs::create_directories(out);
  const std::string ticks = out + "/bad_ticks.csv";
  {
    std::ofstream f(ticks);
    f << "ts,last,vol,bp,bq,ap,aq\n";
    f << "2018-01-05 09:31:00,100,1,99.8,10,100.2,12\n";
    f << "2018-01-05 09:30:30,100,1,99.8,10,100.2,12\n"; // goes backwards
  }
  RunConfig cfg;
  cfg.source = "csv";
  cfg.ticks_path = ticks;
  cfg.out_dir = out;
  Pipeline pipe(cfg);
  try {
    pipe.run_all();
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage == "ingest");
  }
  CHECK(fs::exists(out + "/MANIFEST.partial"));
  CHECK(slurp(out + "/MANIFEST.partial").find("ingest") != std::string::npos);
}

TEST_CASE("bf-series plotdata passes the infinity sentinel through") {
  const std::string out = (fs::temp_directory_path() / "fc_bf").string();
  fs::remove_all(out);
  fs::create_directories(out);
  {
    std::ofstream f(out + "/tests_x.csv");
    f << "period_start,period_end,n,n1,n0,bayes_factor,p_value,warning\n";
    f << "0,35,36,36,0,inf,0.001,\n";
    f << "36,71,36,10,26,1.2,0.4,\n";
  }
  const std::string plot = emit_plotdata(out + "/tests_x.csv", "bf-series");
  CHECK(plot.find("bayes_factor,0,inf") != std::string::npos);
  CHECK(plot.find("bayes_factor,36,1.2") != std::string::npos);
}
