#include "flowcast/pipeline.hpp"

#include "flowcast/csvio.hpp"
#include "flowcast/features.hpp"
#include "flowcast/sha256.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace flowcast {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(std::stoi(trim(item)));
  return out;
}

double to_real(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (!end || *end != '\0')
    throw ConfigError("config: bad number for " + key + ": '" + v + "'");
  return x;
}

long to_int(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (!end || *end != '\0')
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

} // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::string section = "";
  std::string section_name = "";
  SelectorConfig* cur_selector = nullptr;
  TestSpec* cur_test = nullptr;

  std::stringstream ss(text);
  std::string raw;
  size_t line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: unterminated section at line " +
                          std::to_string(line_no));
      std::string inner = trim(line.substr(1, line.size() - 2));
      const auto sp = inner.find(' ');
      section = sp == std::string::npos ? inner : inner.substr(0, sp);
      section_name = sp == std::string::npos ? "" : trim(inner.substr(sp + 1));
      cur_selector = nullptr;
      cur_test = nullptr;
      if (section == "selector") {
        cfg.selectors.emplace_back();
        cur_selector = &cfg.selectors.back();
        cur_selector->name = section_name.empty()
                                 ? "selector" + std::to_string(cfg.selectors.size())
                                 : section_name;
      } else if (section == "test") {
        cfg.tests.emplace_back();
        cur_test = &cfg.tests.back();
        cur_test->name = section_name.empty()
                             ? "test" + std::to_string(cfg.tests.size())
                             : section_name;
      } else if (section != "data" && section != "adf" && section != "grid" &&
                 section != "run") {
        throw ConfigError("config: unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " +
                        std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (section == "data") {
      if (key == "source") cfg.source = val;
      else if (key == "ticks") cfg.ticks_path = val;
      else if (key == "cumulative_volume") cfg.cumulative_volume = to_bool(val, key);
      else if (key == "seed") cfg.seed = static_cast<uint64_t>(to_int(val, key));
      else if (key == "days") cfg.days = static_cast<int>(to_int(val, key));
      else if (key == "base_price") cfg.synth.base_price = to_real(val, key);
      else if (key == "tick_sigma") cfg.synth.tick_sigma = to_real(val, key);
      else if (key == "day_jump_scale") cfg.synth.day_jump_scale = to_real(val, key);
      else if (key == "lunch_jump_scale") cfg.synth.lunch_jump_scale = to_real(val, key);
      else if (key == "spread") cfg.synth.spread = to_real(val, key);
      else if (key == "tick_prob") cfg.synth.tick_prob = to_real(val, key);
      else if (key == "qty_max") cfg.synth.qty_max = static_cast<int>(to_int(val, key));
      else if (key == "vol_max") cfg.synth.vol_max = static_cast<int>(to_int(val, key));
      else if (key == "start_date") {
        long day = 0;
        if (!parse_date(val, day))
          throw ConfigError("config: bad start_date '" + val + "'");
        cfg.synth.start_day = day;
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [data]");
      }
    } else if (section == "adf") {
      if (key == "windows") cfg.adf_windows = parse_int_list(val);
      else throw ConfigError("config: unknown key '" + key + "' in [adf]");
    } else if (section == "grid") {
      if (key == "filter") cfg.grid_filter = val;
      else if (key == "limit") cfg.grid_limit = static_cast<int>(to_int(val, key));
      else throw ConfigError("config: unknown key '" + key + "' in [grid]");
    } else if (section == "run") {
      if (key == "threads") cfg.threads = static_cast<int>(to_int(val, key));
      else if (key == "out") cfg.out_dir = val;
      else throw ConfigError("config: unknown key '" + key + "' in [run]");
    } else if (cur_selector) {
      if (key == "mode") cur_selector->mode = static_cast<int>(to_int(val, key));
      else if (key == "type") cur_selector->penalty_type = static_cast<int>(to_int(val, key));
      else if (key == "lambda") cur_selector->lambda = to_real(val, key);
      else if (key == "c1") cur_selector->c1_quantile = to_real(val, key);
      else if (key == "c2") cur_selector->c2_quantile = to_real(val, key);
      else if (key == "c3_frac") cur_selector->c3_frac = to_real(val, key);
      else if (key == "c4_frac") cur_selector->c4_frac = to_real(val, key);
      else if (key == "c5_frac") cur_selector->c5_frac = to_real(val, key);
      else if (key == "loss_window") cur_selector->loss_window = static_cast<int>(to_int(val, key));
      else if (key == "filter_band") cur_selector->filter_band = to_real(val, key);
      else throw ConfigError("config: unknown key '" + key + "' in [selector]");
    } else if (cur_test) {
      if (key == "selector") cur_test->selector = val;
      else if (key == "h1") cur_test->query.h1 = ModelFilter::parse(val);
      else if (key == "h0") cur_test->query.h0 = ModelFilter::parse(val);
      else if (key == "period") cur_test->period = static_cast<int>(to_int(val, key));
      else throw ConfigError("config: unknown key '" + key + "' in [test]");
      cur_test->query.name = cur_test->name;
    } else {
      throw ConfigError("config: key '" + key + "' outside any section");
    }
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void apply_grid_spec(RunConfig& config, const std::string& spec) {
  std::string filter;
  config.grid_limit = 0;
  std::stringstream ss(spec);
  std::string clause;
  while (std::getline(ss, clause, ';')) {
    if (clause.rfind("limit=", 0) == 0) {
      config.grid_limit = static_cast<int>(to_int(clause.substr(6), "limit"));
    } else if (!clause.empty()) {
      if (!filter.empty()) filter += ";";
      filter += clause;
    }
  }
  config.grid_filter = filter;
}

std::vector<ModelSpec> RunConfig::grid() const {
  const ModelFilter f = ModelFilter::parse(grid_filter.empty() ? "all" : grid_filter);
  std::vector<ModelSpec> out;
  for (const ModelSpec& spec : enumerate_models())
    if (f.matches(spec)) out.push_back(spec);
  if (grid_limit > 0 && static_cast<int>(out.size()) > grid_limit)
    out.resize(grid_limit);
  if (out.empty()) throw ConfigError("grid: no models match the filter");
  return out;
}

int RunConfig::min_history() const {
  int max_w = 0, max_d = 0;
  for (const ModelSpec& s : grid()) {
    max_w = std::max(max_w, s.w);
    max_d = std::max(max_d, s.d);
  }
  return max_w + max_d;
}

void RunConfig::validate() const {
  if (source != "synth" && source != "csv")
    throw ConfigError("config: source must be synth or csv");
  if (source == "csv") {
    if (ticks_path.empty()) throw ConfigError("config: csv source needs ticks=");
    if (!fs::exists(ticks_path))
      throw ConfigError("config: ticks file not found: " + ticks_path);
  } else {
    if (days < 1) throw ConfigError("config: days must be >= 1");
    if (synth.spread <= 0.0) throw ConfigError("config: spread must be positive");
    if (synth.day_jump_scale <= 0.0 || synth.lunch_jump_scale <= 0.0)
      throw ConfigError("config: jump scales must be positive");
    if (synth.tick_prob <= 0.0 || synth.tick_prob > 1.0)
      throw ConfigError("config: tick_prob must be in (0,1]");
  }
  for (int w : adf_windows)
    if (w < 12) throw ConfigError("config: adf window too small: " + std::to_string(w));
  if (threads < 1) throw ConfigError("config: threads must be >= 1");

  const std::vector<ModelSpec> universe = grid(); // throws when empty
  for (const SelectorConfig& sel : selectors) {
    try {
      sel.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: [selector ") + sel.name + "] " +
                        e.what());
    }
  }
  for (const TestSpec& test : tests) {
    bool found = false;
    for (const SelectorConfig& sel : selectors)
      if (sel.name == test.selector) found = true;
    if (!found)
      throw ConfigError("config: [test " + test.name +
                        "] references unknown selector '" + test.selector + "'");
    if (test.period < 1)
      throw ConfigError("config: [test " + test.name + "] period must be >= 1");
    try {
      class_sizes(test.query, universe);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config: [test " + test.name + "] " + e.what());
    }
  }
}

std::string Manifest::to_string() const {
  std::ostringstream os;
  for (const ManifestEntry& e : entries)
    os << e.sha256 << "  " << e.bytes << "  " << e.file << "\n";
  return os.str();
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {
  config_.validate();
  fs::create_directories(config_.out_dir);
}

std::string Pipeline::path(const std::string& name) const {
  return (fs::path(config_.out_dir) / name).string();
}

void Pipeline::write_artifact(const std::string& name,
                              const std::string& content) {
  std::ofstream out(path(name), std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path(name));
  out << content;
  out.close();
  if (std::find(written_.begin(), written_.end(), name) == written_.end())
    written_.push_back(name);
}

void Pipeline::load_ticks() {
  if (have_ticks_) return;
  if (config_.source == "synth") {
    const std::string tick_file = path("ticks.csv");
    if (fs::exists(tick_file)) {
      std::ifstream in(tick_file);
      const ParseResult res = parse_ticks(in, false);
      ticks_ = res.ticks;
    } else {
      ticks_ = synth_ticks(config_.seed, config_.days, config_.synth);
    }
  } else {
    std::ifstream in(config_.ticks_path);
    if (!in) throw std::runtime_error("cannot open " + config_.ticks_path);
    const ParseResult res = parse_ticks(in, config_.cumulative_volume);
    ticks_ = res.ticks;
    dropped_rows_ = res.dropped_out_of_session;
  }
  have_ticks_ = true;
}

void Pipeline::load_series() {
  if (have_series_) return;
  load_ticks();
  series_ = bracketize(ticks_);
  compute_features(ticks_, series_);
  have_series_ = true;
}

void Pipeline::load_table() {
  if (have_table_) return;
  const std::string file = path("forecasts.csv");
  if (fs::exists(file)) {
    table_ = forecast_table_from_csv(read_csv(file));
    have_table_ = true;
    return;
  }
  stage_grid();
}

void Pipeline::stage_synth() {
  if (config_.source != "synth") return;
  const auto ticks = synth_ticks(config_.seed, config_.days, config_.synth);
  write_artifact("ticks.csv", ticks_to_csv(ticks));
  ticks_ = ticks;
  have_ticks_ = true;
}

void Pipeline::stage_ingest() {
  load_series();
  write_artifact("brackets.csv", brackets_to_csv(series_));
}

void Pipeline::stage_features() {
  load_series();
  write_artifact("features.csv", features_to_csv(series_));
}

void Pipeline::stage_adf() {
  load_series();
  std::vector<double> y;
  for (const Bracket& b : series_.brackets) y.push_back(b.y);
  for (int w : config_.adf_windows) {
    const RollingAdfScan scan = rolling_adf(y, w);
    write_artifact("adf_w" + std::to_string(w) + ".csv", adf_scan_to_csv(scan));
  }
}

void Pipeline::stage_grid() {
  load_series();
  const std::vector<ModelSpec> specs = config_.grid();
  const std::vector<int> T =
      default_forecast_index(series_, config_.min_history());
  if (T.empty())
    throw std::runtime_error("grid: no eligible forecast origins; need more days");
  table_ = run_fixed_grid(series_, specs, T, config_.threads);
  have_table_ = true;
  write_artifact("forecasts.csv", forecast_table_to_csv(table_));
}

namespace {

std::vector<double> origin_prices_from_csv(const CsvTable& brackets,
                                           const std::vector<int>& times) {
  const int iy = brackets.column("y");
  if (iy < 0) throw std::runtime_error("brackets.csv: missing y column");
  std::vector<double> out;
  out.reserve(times.size());
  for (int t : times) {
    if (t < 0 || t >= static_cast<int>(brackets.rows.size()))
      throw std::runtime_error("selections: origin outside bracket range");
    out.push_back(std::strtod(brackets.rows[t][iy].c_str(), nullptr));
  }
  return out;
}

std::vector<SelectionRecord> selections_from_csv(const CsvTable& csv,
                                                 const ForecastTable& table) {
  const int it = csv.column("t"), ig = csv.column("group"), iw = csv.column("w");
  const int ip = csv.column("p"), id = csv.column("d"), iq = csv.column("q");
  const int il = csv.column("loss"), ifs = csv.column("filter_size");
  const int ifc = csv.column("forecast");
  if (it < 0 || ig < 0 || iw < 0 || ip < 0 || id < 0 || iq < 0 || il < 0 ||
      ifs < 0 || ifc < 0)
    throw std::runtime_error("selections csv: missing columns");
  std::map<int, int> time_to_sample;
  for (size_t i = 0; i < table.times.size(); ++i)
    time_to_sample[table.times[i]] = static_cast<int>(i);
  std::vector<SelectionRecord> out;
  for (const auto& row : csv.rows) {
    SelectionRecord r;
    r.t = std::atoi(row[it].c_str());
    const auto found = time_to_sample.find(r.t);
    r.sample = found == time_to_sample.end() ? -1 : found->second;
    const int g = std::atoi(row[ig].c_str());
    if (g < 0) {
      r.fallback = true;
    } else {
      r.spec = ModelSpec{g, std::atoi(row[iw].c_str()), std::atoi(row[ip].c_str()),
                         std::atoi(row[id].c_str()), std::atoi(row[iq].c_str())};
    }
    r.loss = std::strtod(row[il].c_str(), nullptr);
    r.filter_size = std::atoi(row[ifs].c_str());
    r.forecast = std::strtod(row[ifc].c_str(), nullptr);
    out.push_back(r);
  }
  return out;
}

} // namespace

void Pipeline::stage_select() {
  load_table();
  const CsvTable brackets = read_csv(path("brackets.csv"));
  const std::vector<double> y_origin =
      origin_prices_from_csv(brackets, table_.times);
  for (const SelectorConfig& sel : config_.selectors) {
    const std::vector<SelectionRecord> recs =
        run_selector(table_, y_origin, sel);
    write_artifact("selections_" + sel.name + ".csv", selections_to_csv(recs));
  }
}

void Pipeline::stage_report() {
  load_series();
  load_table();
  std::vector<PerfReport> reports;

  for (size_t si = 0; si < table_.specs.size(); ++si) {
    std::vector<double> fc(table_.times.size());
    for (size_t ti = 0; ti < table_.times.size(); ++ti) {
      const ForecastCell& c = table_.cells[si][ti];
      fc[ti] = c.status == FitStatus::ok
                   ? c.forecast
                   : std::numeric_limits<double>::quiet_NaN();
    }
    reports.push_back(evaluate_forecasts(series_, table_.times, fc,
                                         table_.specs[si].code(), false));
  }

  for (const SelectorConfig& sel : config_.selectors) {
    const CsvTable csv = read_csv(path("selections_" + sel.name + ".csv"));
    const std::vector<SelectionRecord> recs = selections_from_csv(csv, table_);
    std::vector<int> times;
    std::vector<double> fc;
    for (const SelectionRecord& r : recs) {
      times.push_back(r.t);
      fc.push_back(r.forecast);
    }
    reports.push_back(evaluate_forecasts(series_, times, fc, sel.code(), false));
  }

  {
    const std::vector<double> none(table_.times.size(),
                                   std::numeric_limits<double>::quiet_NaN());
    reports.push_back(
        evaluate_forecasts(series_, table_.times, none, "Baseline", true));
  }

  write_artifact("report.csv", reports_to_csv(reports));
  write_artifact("cum_pl.csv", cum_pl_to_csv(reports));

  CsvWriter meta({"model_code", "n_forecasts", "first_t", "last_t", "n_days"});
  for (const PerfReport& r : reports)
    meta.add_row({r.model_code, std::to_string(r.n_forecasts),
                  table_.times.empty() ? "-1" : std::to_string(table_.times.front()),
                  table_.times.empty() ? "-1" : std::to_string(table_.times.back()),
                  std::to_string(r.day_pl.size())});
  write_artifact("report_meta.csv", meta.to_string());
}

void Pipeline::stage_test() {
  load_table();
  const std::vector<ModelSpec> universe = config_.grid();
  for (const TestSpec& test : config_.tests) {
    const SelectorConfig* sel = nullptr;
    for (const SelectorConfig& s : config_.selectors)
      if (s.name == test.selector) sel = &s;
    if (!sel) throw std::runtime_error("test: unknown selector " + test.selector);
    const CsvTable csv = read_csv(path("selections_" + sel->name + ".csv"));
    const std::vector<SelectionRecord> recs = selections_from_csv(csv, table_);
    const std::vector<TestResult> results =
        rolling_tests(test.query, universe, recs, test.period, sel->mode == 14);
    write_artifact("tests_" + test.name + ".csv", tests_to_csv(results));
  }
}

void Pipeline::stage_plotdata() {
  if (fs::exists(path("cum_pl.csv")))
    write_artifact("plot_cum_pl.csv", emit_plotdata(path("cum_pl.csv"), "cumulative-pl"));
  for (int w : config_.adf_windows) {
    const std::string f = "adf_w" + std::to_string(w) + ".csv";
    if (fs::exists(path(f)))
      write_artifact("plot_" + f, emit_plotdata(path(f), "adf-scan"));
  }
  for (const SelectorConfig& sel : config_.selectors) {
    const std::string f = "selections_" + sel.name + ".csv";
    if (fs::exists(path(f)))
      write_artifact("plot_hist_" + sel.name + ".csv",
                     emit_plotdata(path(f), "selection-histogram"));
  }
  for (const TestSpec& test : config_.tests) {
    const std::string f = "tests_" + test.name + ".csv";
    if (fs::exists(path(f)))
      write_artifact("plot_bf_" + test.name + ".csv",
                     emit_plotdata(path(f), "bf-series"));
  }
}

Manifest Pipeline::run_all() {
  struct Step {
    const char* name;
    void (Pipeline::*fn)();
  };
  const Step steps[] = {
      {"synth", &Pipeline::stage_synth},     {"ingest", &Pipeline::stage_ingest},
      {"features", &Pipeline::stage_features}, {"adf", &Pipeline::stage_adf},
      {"grid", &Pipeline::stage_grid},       {"select", &Pipeline::stage_select},
      {"report", &Pipeline::stage_report},   {"test", &Pipeline::stage_test},
      {"plotdata", &Pipeline::stage_plotdata},
  };
  for (const Step& step : steps) {
    try {
      (this->*step.fn)();
    } catch (const std::exception& e) {
      std::ofstream marker(path("MANIFEST.partial"));
      marker << "failed stage: " << step.name << "\n" << e.what() << "\n";
      throw StageError(step.name, e.what());
    }
  }
  const Manifest m = manifest();
  write_artifact("manifest.txt", m.to_string());
  return m;
}

Manifest Pipeline::manifest() const {
  Manifest m;
  std::vector<std::string> names = written_;
  std::sort(names.begin(), names.end());
  for (const std::string& name : names) {
    if (name == "manifest.txt") continue;
    ManifestEntry e;
    e.file = name;
    e.sha256 = sha256_file(path(name));
    e.bytes = static_cast<uint64_t>(fs::file_size(path(name)));
    m.entries.push_back(e);
  }
  return m;
}

std::string emit_plotdata(const std::string& artifact_path,
                          const std::string& kind) {
  const CsvTable t = read_csv(artifact_path);
  CsvWriter w({"series", "x", "y"});
  if (kind == "cumulative-pl") {
    const int id = t.column("date"), im = t.column("model_code");
    const int ic = t.column("cum_pl");
    if (id < 0 || im < 0 || ic < 0)
      throw std::invalid_argument("plotdata: not a cum_pl artifact");
    for (const auto& row : t.rows) w.add_row({row[im], row[id], row[ic]});
  } else if (kind == "adf-scan") {
    const int it = t.column("t"), idd = t.column("d"), ip = t.column("p_value");
    if (it < 0 || idd < 0 || ip < 0)
      throw std::invalid_argument("plotdata: not an adf scan artifact");
    for (const auto& row : t.rows)
      w.add_row({"d" + row[idd], row[it], row[ip]});
  } else if (kind == "selection-histogram") {
    const int iw = t.column("w");
    if (iw < 0) throw std::invalid_argument("plotdata: not a selections artifact");
    std::map<int, long> counts; // fallbacks land under w = -1
    for (const auto& row : t.rows) counts[std::atoi(row[iw].c_str())] += 1;
    for (const auto& [wsize, count] : counts)
      w.add_row({"selections", std::to_string(wsize), std::to_string(count)});
  } else if (kind == "bf-series") {
    const int is = t.column("period_start"), ib = t.column("bayes_factor");
    if (is < 0 || ib < 0)
      throw std::invalid_argument("plotdata: not a tests artifact");
    for (const auto& row : t.rows)
      w.add_row({"bayes_factor", row[is], row[ib]});
  } else {
    throw std::invalid_argument("plotdata: unknown kind '" + kind + "'");
  }
  return w.to_string();
}

} // namespace flowcast
