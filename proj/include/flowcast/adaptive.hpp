#pragma once

#include "flowcast/model_zoo.hpp"

#include <limits>
#include <string>
#include <vector>

namespace flowcast {

// Configuration of one adaptive selector. Group 13 scores candidates by
// decayed local losses alone; group 14 adds a functional penalty/reward
// D(h, h*_{t-1}) of one of three types.
struct SelectorConfig {
  std::string name = "selector";
  int mode = 13;        // 13 or 14
  int penalty_type = 1; // 1|2|3, used by mode 14
  double lambda = 1.0;  // decay in (0, 1]
  double c1_quantile = 0.50;
  double c2_quantile = 0.75;
  int loss_window = 48;      // number of past errors entering the loss
  double filter_band = 0.05; // strict relative band
  // Penalty scales as fractions of l*_t; NaN = the per-type default
  // (type 1: 1/10 and 1/168; types 2-3: 1/8, -1/72, -1/2).
  double c3_frac = std::numeric_limits<double>::quiet_NaN();
  double c4_frac = std::numeric_limits<double>::quiet_NaN();
  double c5_frac = std::numeric_limits<double>::quiet_NaN();

  double c3() const;
  double c4() const;
  double c5() const;

  void validate() const; // throws std::invalid_argument
  // Report code, e.g. MG13_50+75_1 or MG14_50+75_type-1_085.
  std::string code() const;
};

struct SelectionRecord {
  int t = 0;       // forecast origin (global bracket index)
  int sample = 0;  // index into ForecastTable::times
  bool fallback = false; // empty candidate set; forecast = y_t
  ModelSpec spec;        // winner, valid when !fallback
  double loss = 0.0;     // winning objective value
  int filter_size = 0;   // |H~_t|
  double forecast = 0.0; // y_{t+1|t}(h*_t)
};

// Piecewise local loss: 0 on [0, C1], quadratic on (C1, C2], linear
// beyond C2; continuous with continuous first derivative at both knots.
// Throws std::invalid_argument for x < 0 or C1 > C2.
double local_loss(double x, double c1, double c2);

// Penalty D(h, h_prev) given l* = min global loss over the candidates.
double penalty(const ModelSpec& h, const ModelSpec& prev,
               const SelectorConfig& config, double l_star);

// Candidate filter: keeps models whose forecast at sample
// ti is present, positive, and within the strict relative band of y_t.
std::vector<size_t> filter_candidates(const ForecastTable& table, size_t ti,
                                      double y_t, double band);

// Cross-sectional loss inputs, one row per forecast sample: absolute
// errors with missing entries replaced by that sample's median, plus the
// C1/C2 nearest-rank quantiles over the full model set.
struct LossPanel {
  std::vector<std::vector<double>> abs_err; // [sample][model]
  std::vector<double> c1;
  std::vector<double> c2;
};
LossPanel build_loss_panel(const ForecastTable& table, double c1_quantile,
                           double c2_quantile);

// Decayed loss of model h at selection sample k: sum over the previous
// `loss_window` realized samples, newest weighted lambda^0.
double global_loss(const LossPanel& panel, size_t model, size_t k,
                   double lambda, int loss_window);

// Runs the full selection loop. y_at_origin[i] is the VWM at
// table.times[i]. Selections start once loss_window prior samples exist.
std::vector<SelectionRecord> run_selector(const ForecastTable& table,
                                          const std::vector<double>& y_at_origin,
                                          const SelectorConfig& config);

std::string selections_to_csv(const std::vector<SelectionRecord>& records);

// Nearest-rank quantile of a sorted ascending vector, q in (0, 1].
double nearest_rank(const std::vector<double>& sorted, double q);

} // namespace flowcast
