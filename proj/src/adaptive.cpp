#include "flowcast/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace flowcast {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

std::string lambda_code(double lambda) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%g", lambda);
  std::string s = buf;
  const auto dot = s.find('.');
  if (dot != std::string::npos) s.erase(dot, 1);
  return s;
}

} // namespace

double SelectorConfig::c3() const {
  if (!std::isnan(c3_frac)) return c3_frac;
  return penalty_type == 1 ? 1.0 / 10.0 : 1.0 / 8.0;
}

double SelectorConfig::c4() const {
  if (!std::isnan(c4_frac)) return c4_frac;
  return penalty_type == 1 ? 1.0 / 168.0 : -1.0 / 72.0;
}

double SelectorConfig::c5() const {
  if (!std::isnan(c5_frac)) return c5_frac;
  return -1.0 / 2.0;
}

void SelectorConfig::validate() const {
  if (mode != 13 && mode != 14)
    throw std::invalid_argument("selector: mode must be 13 or 14");
  if (mode == 14 && (penalty_type < 1 || penalty_type > 3))
    throw std::invalid_argument("selector: type must be 1, 2 or 3");
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("selector: lambda must lie in (0,1]");
  const bool c1_ok = near(c1_quantile, 0.25) || near(c1_quantile, 0.50) ||
                     near(c1_quantile, 0.75);
  const bool c2_ok = near(c2_quantile, 0.25) || near(c2_quantile, 0.50) ||
                     near(c2_quantile, 0.75);
  if (!c1_ok || !c2_ok)
    throw std::invalid_argument("selector: quantiles must be 0.25, 0.50 or 0.75");
  if (!(c1_quantile < c2_quantile))
    throw std::invalid_argument("selector: c1 must be strictly below c2");
  if (loss_window < 1)
    throw std::invalid_argument("selector: loss_window must be >= 1");
  if (!(filter_band > 0.0))
    throw std::invalid_argument("selector: filter band must be positive");
}

std::string SelectorConfig::code() const {
  const int c1 = static_cast<int>(std::lround(c1_quantile * 100));
  const int c2 = static_cast<int>(std::lround(c2_quantile * 100));
  std::string s = "MG" + std::to_string(mode) + "_" + std::to_string(c1) +
                  "+" + std::to_string(c2) + "_";
  if (mode == 14) s += "type-" + std::to_string(penalty_type) + "_";
  s += lambda_code(lambda);
  return s;
}

double local_loss(double x, double c1, double c2) {
  if (x < 0.0) throw std::invalid_argument("local_loss: x must be >= 0");
  if (c1 < 0.0 || c1 > c2)
    throw std::invalid_argument("local_loss: need 0 <= C1 <= C2");
  if (x <= c1) return 0.0;
  if (x <= c2) return (x - c1) * (x - c1) / 2.0;
  return (c2 - c1) * x + (c1 * c1 - c2 * c2) / 2.0;
}

double penalty(const ModelSpec& h, const ModelSpec& prev,
               const SelectorConfig& config, double l_star) {
  const double C3 = config.c3() * l_star;
  const double C4 = config.c4() * l_star;
  const double C5 = config.c5() * l_star;
  if (config.penalty_type == 1) {
    return C3 * std::abs(h.p + h.d + h.q - prev.p - prev.d - prev.q) +
           C4 * std::abs(h.w - prev.w);
  }
  double pq_term = C3 * std::abs(h.p + h.q - prev.p - prev.q);
  if (config.penalty_type == 3 && h.d != prev.d) pq_term = 0.0;
  return pq_term + C4 * (48.0 - h.w) + C5 * std::abs(h.d - prev.d);
}

std::vector<size_t> filter_candidates(const ForecastTable& table, size_t ti,
                                      double y_t, double band) {
  if (!(y_t > 0.0))
    throw std::invalid_argument("filter_candidates: y_t must be positive");
  std::vector<size_t> keep;
  for (size_t h = 0; h < table.specs.size(); ++h) {
    const ForecastCell& c = table.cells[h][ti];
    if (c.status != FitStatus::ok) continue;
    if (!(c.forecast > 0.0)) continue;
    if (std::abs(c.forecast / y_t - 1.0) < band) keep.push_back(h);
  }
  return keep;
}

double nearest_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("nearest_rank: empty set");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<size_t>(std::ceil(q * n));
  if (rank < 1) rank = 1;
  if (rank > sorted.size()) rank = sorted.size();
  return sorted[rank - 1];
}

LossPanel build_loss_panel(const ForecastTable& table, double c1_quantile,
                           double c2_quantile) {
  const size_t M = table.specs.size();
  const size_t K = table.times.size();
  LossPanel panel;
  panel.abs_err.assign(K, std::vector<double>(M, 0.0));
  panel.c1.assign(K, 0.0);
  panel.c2.assign(K, 0.0);

  std::vector<double> present;
  for (size_t k = 0; k < K; ++k) {
    present.clear();
    for (size_t h = 0; h < M; ++h) {
      const ForecastCell& c = table.cells[h][k];
      if (c.status == FitStatus::ok && std::isfinite(c.error))
        present.push_back(std::abs(c.error));
    }
    double median = 0.0;
    if (!present.empty()) {
      std::vector<double> s = present;
      std::sort(s.begin(), s.end());
      median = s.size() % 2 == 1
                   ? s[s.size() / 2]
                   : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]);
    }
    for (size_t h = 0; h < M; ++h) {
      const ForecastCell& c = table.cells[h][k];
      panel.abs_err[k][h] =
          (c.status == FitStatus::ok && std::isfinite(c.error))
              ? std::abs(c.error)
              : median;
    }
    // C1/C2 are quantiles of the substituted cross-section over the full
    // model set, not just the filtered candidates.
    std::vector<double> s = panel.abs_err[k];
    std::sort(s.begin(), s.end());
    panel.c1[k] = nearest_rank(s, c1_quantile);
    panel.c2[k] = nearest_rank(s, c2_quantile);
  }
  return panel;
}

double global_loss(const LossPanel& panel, size_t model, size_t k,
                   double lambda, int loss_window) {
  if (k == 0) throw std::invalid_argument("global_loss: no realized errors");
  const size_t lo = k > static_cast<size_t>(loss_window)
                        ? k - static_cast<size_t>(loss_window)
                        : 0;
  double acc = 0.0;
  double weight = 1.0;
  for (size_t j = k; j-- > lo;) {
    acc += weight * local_loss(panel.abs_err[j][model], panel.c1[j], panel.c2[j]);
    weight *= lambda;
  }
  return acc;
}

std::vector<SelectionRecord> run_selector(const ForecastTable& table,
                                          const std::vector<double>& y_at_origin,
                                          const SelectorConfig& config) {
  config.validate();
  if (y_at_origin.size() != table.times.size())
    throw std::invalid_argument("run_selector: misaligned origin prices");
  // Tie-breaks rely on scanning candidates in ModelSpec order.
  for (size_t h = 1; h < table.specs.size(); ++h)
    if (!(table.specs[h - 1] < table.specs[h]))
      throw std::invalid_argument("run_selector: specs must be sorted");

  const LossPanel panel =
      build_loss_panel(table, config.c1_quantile, config.c2_quantile);
  const size_t K = table.times.size();

  std::vector<SelectionRecord> out;
  bool have_prev = false;
  ModelSpec prev;

  for (size_t k = static_cast<size_t>(config.loss_window); k < K; ++k) {
    SelectionRecord rec;
    rec.sample = static_cast<int>(k);
    rec.t = table.times[k];

    const std::vector<size_t> cands =
        filter_candidates(table, k, y_at_origin[k], config.filter_band);
    rec.filter_size = static_cast<int>(cands.size());
    if (cands.empty()) {
      rec.fallback = true;
      rec.loss = kNaN;
      rec.forecast = y_at_origin[k]; // random-walk fallback, flagged
      out.push_back(rec);
      continue;
    }

    std::vector<double> gl(cands.size());
    double l_star = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < cands.size(); ++i) {
      gl[i] = global_loss(panel, cands[i], k, config.lambda, config.loss_window);
      l_star = std::min(l_star, gl[i]);
    }

    size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < cands.size(); ++i) {
      double score = gl[i];
      if (config.mode == 14 && have_prev)
        score += penalty(table.specs[cands[i]], prev, config, l_star);
      if (score < best_score) { // strict: ties keep the earlier spec
        best_score = score;
        best = i;
      }
    }

    rec.spec = table.specs[cands[best]];
    rec.loss = best_score;
    rec.forecast = table.cells[cands[best]][k].forecast;
    out.push_back(rec);
    prev = rec.spec;
    have_prev = true;
  }
  return out;
}

std::string selections_to_csv(const std::vector<SelectionRecord>& records) {
  CsvWriter w({"t", "group", "w", "p", "d", "q", "loss", "filter_size",
               "forecast"});
  for (const SelectionRecord& r : records) {
    if (r.fallback) {
      w.add_row({std::to_string(r.t), "-1", "-1", "-1", "-1", "-1", "nan",
                 std::to_string(r.filter_size), fmt_double(r.forecast)});
    } else {
      w.add_row({std::to_string(r.t), std::to_string(r.spec.group),
                 std::to_string(r.spec.w), std::to_string(r.spec.p),
                 std::to_string(r.spec.d), std::to_string(r.spec.q),
                 fmt_double(r.loss), std::to_string(r.filter_size),
                 fmt_double(r.forecast)});
    }
  }
  return w.to_string();
}

} // namespace flowcast
