#include "flowcast/evaluation.hpp"

#include "flowcast/rng.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace flowcast;
using namespace flowcast::testing;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Two-day toy: per session 19 points q[0..18]; q[0] is the pre-eligible
// anchor, forecasts g[k] target q[k]. Frozen expectations computed with an
// independent arithmetic pass over the same definitions.
const std::vector<double> m1 = {100.0, 100.5, 100.3, 100.6, 100.7, 100.3, 100.5, 101.1, 101.0, 101.2, 100.9, 101.3, 101.4, 101.2, 101.7, 101.1, 101.4, 101.6, 101.5};
const std::vector<double> a1 = {101.0, 100.7, 100.9, 100.8, 101.2, 101.0, 100.5, 100.8, 100.9, 100.7, 101.3, 100.9, 101.1, 101.4, 101.3, 101.5, 101.2, 101.3, 101.7};
const std::vector<double> m2 = {99.5, 99.7, 100.0, 99.6, 99.7, 100.2, 100.0, 100.1, 99.8, 100.2, 100.4, 100.3, 100.6, 100.1, 100.3, 100.4, 100.8, 100.6, 100.9};
const std::vector<double> a2 = {100.8, 100.7, 100.3, 100.5, 100.8, 100.6, 100.7, 101.2, 100.9, 101.1, 101.0, 101.3, 100.7, 101.1, 101.2, 101.0, 101.2, 101.5, 101.1};
const std::vector<double> g_m1 = {100.25, 100.35, 100.5, 100.6, 100.05, 100.55, 101.0, 101.15, 100.95, 100.95, 101.2, 101.55, 100.95, 101.75, 101.0, 101.55, 101.35, 101.55};
const std::vector<double> g_a1 = {100.75, 100.8, 100.95, 100.8, 101.05, 100.4, 100.95, 100.65, 100.75, 101.2, 101.05, 100.85, 101.45, 101.2, 101.65, 100.95, 101.35, 101.6};
const std::vector<double> g_m2 = {99.6, 100.15, 99.35, 99.6, 100.1, 100.15, 99.85, 99.85, 100.1, 100.55, 100.05, 100.65, 100.0, 100.45, 100.15, 100.85, 100.5, 101.05};
const std::vector<double> g_a2 = {100.85, 100.05, 100.55, 100.5, 100.75, 100.45, 101.25, 100.8, 101.25, 100.75, 101.35, 100.6, 101.25, 100.95, 101.05, 101.1, 101.65, 100.85};

constexpr double kPlM1 = 0.036656063119456413;
constexpr double kPlA1 = 0.033642127740255504;
constexpr double kPlM2 = 0.04092962010565273;
constexpr double kPlA2 = 0.040595423348100991;
constexpr double kToyMse = 0.026770833333333483;
constexpr double kToyMae = 0.1423611111111113;
constexpr double kToySr = 151.79780478841514;

// session_pl arguments from the 19-point layout: prices are the 18
// eligible points, forecasts the 17 whose origins are themselves eligible.
double toy_session_pl(const std::vector<double>& q, const std::vector<double>& g) {
  const std::vector<double> prices(q.begin() + 1, q.end());
  const std::vector<double> fc(g.begin() + 1, g.end());
  return session_pl(prices, fc);
}

} // namespace

TEST_CASE("mse_mae basics") {
  const std::vector<double> f{1.0, 2.0, 3.0};
  CHECK(mse_mae(f, f) == std::pair<double, double>{0.0, 0.0});

  const std::vector<double> fc{2.0, 1.0};
  const std::vector<double> ac{1.0, 3.0}; // errors {1, -2}
  const auto [mse, mae] = mse_mae(fc, ac);
  CHECK(mse == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(mae == doctest::Approx(1.5).epsilon(1e-15));

  SUBCASE("scaling errors by k scales MAE by k, MSE by k^2") {
    const std::vector<double> fc3{4.0, -3.0};
    const std::vector<double> ac3{1.0, 3.0}; // errors {3, -6}
    const auto [mse3, mae3] = mse_mae(fc3, ac3);
    CHECK(mse3 == doctest::Approx(9.0 * mse).epsilon(1e-12));
    CHECK(mae3 == doctest::Approx(3.0 * mae).epsilon(1e-12));
  }
  SUBCASE("empty or incomplete index sets are rejected") {
    CHECK_THROWS_AS(mse_mae({}, {}), std::invalid_argument);
    const std::vector<double> with_nan{1.0, kNaN};
    CHECK_THROWS_AS(mse_mae(with_nan, ac), std::invalid_argument);
  }
}

TEST_CASE("session_pl toy values and conventions") {
  CHECK(toy_session_pl(m1, g_m1) == doctest::Approx(kPlM1).epsilon(1e-12));
  CHECK(toy_session_pl(a1, g_a1) == doctest::Approx(kPlA1).epsilon(1e-12));
  CHECK(toy_session_pl(m2, g_m2) == doctest::Approx(kPlM2).epsilon(1e-12));
  CHECK(toy_session_pl(a2, g_a2) == doctest::Approx(kPlA2).epsilon(1e-12));

  SUBCASE("bullish forecasts on rising prices collect every return") {
    std::vector<double> prices(18), fc(17);
    for (int i = 0; i < 18; ++i) prices[i] = 100.0 + i;
    for (int i = 0; i < 17; ++i) fc[i] = prices[i] + 0.5;
    double want = 0.0;
    for (int i = 0; i < 17; ++i) want += (prices[i + 1] - prices[i]) / prices[i];
    CHECK(session_pl(prices, fc) == doctest::Approx(want).epsilon(1e-15));
    SUBCASE("negating every signal negates the PL") {
      std::vector<double> bear(17);
      for (int i = 0; i < 17; ++i) bear[i] = prices[i] - 0.5;
      CHECK(session_pl(prices, bear) ==
            doctest::Approx(-want).epsilon(1e-15));
    }
  }
  SUBCASE("zero alpha and missing forecasts trade nothing") {
    std::vector<double> prices(18), fc(17, kNaN);
    for (int i = 0; i < 18; ++i) prices[i] = 100.0 + i;
    CHECK(session_pl(prices, fc) == 0.0);
    for (int i = 0; i < 17; ++i) fc[i] = prices[i]; // alpha identically 0
    CHECK(session_pl(prices, fc) == 0.0);
  }
  SUBCASE("baseline is buy-and-hold over the eligible span") {
    std::vector<double> flat(18, 100.0);
    CHECK(session_pl(flat, {}, true) == 0.0);
    const std::vector<double> prices(m1.begin() + 1, m1.end());
    CHECK(session_pl(prices, {}, true) ==
          doctest::Approx(0.0099502487562189053).epsilon(1e-12));
  }
  SUBCASE("wrong shapes are rejected") {
    std::vector<double> short_prices(17, 100.0);
    CHECK_THROWS_AS(session_pl(short_prices, {}, true), std::invalid_argument);
  }
}

TEST_CASE("sharpe ratio") {
  const std::vector<double> zero_mean{0.01, -0.01};
  CHECK(sharpe(zero_mean) == 0.0);
  const std::vector<double> two{0.02, 0.00};
  CHECK(sharpe(two) == doctest::Approx(11.224972160321823).epsilon(1e-9));
  CHECK_THROWS_AS(sharpe(std::vector<double>{0.01, 0.01, 0.01}),
                  UndefinedSharpeError);

  SUBCASE("invariant to positive scaling") {
    Rng rng(2);
    std::vector<double> pl(10);
    for (double& v : pl) v = rng.normal();
    const double base = sharpe(pl);
    for (double& v : pl) v *= 7.5;
    CHECK(sharpe(pl) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("toy-series MSE, MAE and SR match the frozen hand values") {
  std::vector<double> fc, actual;
  const std::vector<const std::vector<double>*> qs{&m1, &a1, &m2, &a2};
  const std::vector<const std::vector<double>*> gs{&g_m1, &g_a1, &g_m2, &g_a2};
  for (size_t s = 0; s < 4; ++s)
    for (int k = 1; k <= 18; ++k) {
      fc.push_back((*gs[s])[k - 1]);
      actual.push_back((*qs[s])[k]);
    }
  REQUIRE(fc.size() == 72);
  const auto [mse, mae] = mse_mae(fc, actual);
  CHECK(mse == doctest::Approx(kToyMse).epsilon(1e-12));
  CHECK(mae == doctest::Approx(kToyMae).epsilon(1e-12));

  const std::vector<double> day_pl{kPlM1 + kPlA1, kPlM2 + kPlA2};
  CHECK(sharpe(day_pl) == doctest::Approx(kToySr).epsilon(1e-10));
}

TEST_CASE("evaluate_forecasts assembles day PL from the two sessions") {
  // 3-day structured series; forecasts = next price + alternating bias
  const int days = 3;
  std::vector<double> y(days * kBracketsPerDay);
  Rng rng(21);
  double level = 100.0;
  for (double& v : y) {
    level += 0.2 * rng.normal();
    v = level;
  }
  const BracketSeries s = session_series(y);
  std::vector<int> times;
  std::vector<double> fc;
  for (int t = 0; t + 1 < static_cast<int>(s.size()); ++t) {
    if (!s.brackets[t + 1].forecast_eligible) continue;
    times.push_back(t);
    fc.push_back(y[t + 1] + ((t % 2) ? 0.05 : -0.05));
  }
  const PerfReport rep = evaluate_forecasts(s, times, fc, "toy");
  CHECK(rep.n_forecasts == days * 36);
  REQUIRE(rep.day_pl.size() == days);

  // oracle: per-session PLs summed into days
  for (int d = 0; d < days; ++d) {
    double want = 0.0;
    for (int sess = 0; sess < 2; ++sess) {
      const int s0 = d * kBracketsPerDay + sess * kBracketsPerSession;
      std::vector<double> prices(kEligiblePerSession);
      std::vector<double> sfc(kEligiblePerSession - 1);
      for (int i = 0; i < kEligiblePerSession; ++i)
        prices[i] = y[s0 + 6 + i];
      for (int i = 0; i < kEligiblePerSession - 1; ++i) {
        const int origin = s0 + 6 + i;
        sfc[i] = y[origin + 1] + ((origin % 2) ? 0.05 : -0.05);
      }
      want += session_pl(prices, sfc);
    }
    CHECK(rep.day_pl[d] == doctest::Approx(want).epsilon(1e-14));
  }

  SUBCASE("cumulative PL ends at the sum of daily PLs") {
    double total = 0.0;
    for (double v : rep.day_pl) total += v;
    CHECK(rep.cum_pl.back() == doctest::Approx(total).epsilon(1e-12));
  }
  SUBCASE("csv layouts") {
    const std::string rcsv = reports_to_csv({rep});
    CHECK(rcsv.rfind("model_code,mse,mae,sr,mean_pl,std_pl,min_pl,max_pl", 0) ==
          0);
    const std::string ccsv = cum_pl_to_csv({rep});
    CHECK(ccsv.rfind("date,model_code,cum_pl", 0) == 0);
  }
  SUBCASE("baseline uses the same session window") {
    const std::vector<double> none(times.size(), kNaN);
    const PerfReport base = evaluate_forecasts(s, times, none, "Baseline", true);
    CHECK(base.day_pl.size() == rep.day_pl.size());
    double want = 0.0;
    const std::vector<double> prices{y.begin() + 6,
                                     y.begin() + 6 + kEligiblePerSession};
    want = (prices.back() - prices.front()) / prices.front();
    // morning of day 0 contributes the buy-and-hold return
    const int s1 = kBracketsPerSession;
    const double a0 = (y[s1 + 6 + 17] - y[s1 + 6]) / y[s1 + 6];
    CHECK(base.day_pl[0] == doctest::Approx(want + a0).epsilon(1e-12));
  }
}
