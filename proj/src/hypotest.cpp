#include "flowcast/hypotest.hpp"

#include "flowcast/csvio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace flowcast {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::set<int> parse_int_set(const std::string& text) {
  std::set<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}
} // namespace

bool ModelFilter::matches(const ModelSpec& spec) const {
  if (!groups.empty() && !groups.count(spec.group)) return false;
  if (!windows.empty() && !windows.count(spec.w)) return false;
  if (!ps.empty() && !ps.count(spec.p)) return false;
  if (!ds.empty() && !ds.count(spec.d)) return false;
  if (!qs.empty() && !qs.count(spec.q)) return false;
  if (multivariate && *multivariate != spec.is_multivariate()) return false;
  return true;
}

bool ModelFilter::unconstrained() const {
  return groups.empty() && windows.empty() && ps.empty() && ds.empty() &&
         qs.empty() && !multivariate;
}

ModelFilter ModelFilter::parse(const std::string& text) {
  ModelFilter f;
  if (text.empty() || text == "all") return f;
  std::stringstream ss(text);
  std::string clause;
  while (std::getline(ss, clause, ';')) {
    if (clause.empty()) continue;
    const auto eq = clause.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("filter: expected attr=values in '" + clause + "'");
    const std::string attr = clause.substr(0, eq);
    const std::string vals = clause.substr(eq + 1);
    if (attr == "group") f.groups = parse_int_set(vals);
    else if (attr == "w") f.windows = parse_int_set(vals);
    else if (attr == "p") f.ps = parse_int_set(vals);
    else if (attr == "d") f.ds = parse_int_set(vals);
    else if (attr == "q") f.qs = parse_int_set(vals);
    else if (attr == "kind") {
      if (vals == "uni") f.multivariate = false;
      else if (vals == "multi") f.multivariate = true;
      else throw std::invalid_argument("filter: kind must be uni or multi");
    } else {
      throw std::invalid_argument("filter: unknown attribute '" + attr + "'");
    }
  }
  return f;
}

ClassSizes class_sizes(const ClassQuery& query,
                       const std::vector<ModelSpec>& universe) {
  ClassSizes sizes;
  for (const ModelSpec& spec : universe) {
    if (!query.h0.matches(spec)) continue;
    if (query.h1.matches(spec)) ++sizes.h1;
    else ++sizes.h0_minus_h1;
  }
  if (sizes.h1 == 0)
    throw std::invalid_argument("query: H1 is empty over this model universe");
  if (sizes.h0_minus_h1 == 0)
    throw std::invalid_argument("query: H1 must be a strict subset of H0");
  return sizes;
}

double bayes_factor(const ClassSizes& sizes, long n1, long n0) {
  if (n1 == 0 && n0 == 0)
    throw std::invalid_argument("bayes_factor: no selections inside H0");
  if (n0 == 0) return std::numeric_limits<double>::infinity();
  return (static_cast<double>(sizes.h0_minus_h1) / static_cast<double>(sizes.h1)) *
         (static_cast<double>(n1) / static_cast<double>(n0));
}

double binomial_upper_tail(long n, double p0, long n1) {
  if (n < 0 || n1 < 0 || n1 > n)
    throw std::invalid_argument("binomial_upper_tail: bad counts");
  if (!(p0 > 0.0 && p0 < 1.0))
    throw std::invalid_argument("binomial_upper_tail: p0 must be in (0,1)");
  if (n1 == 0) return 1.0;
  if (n1 == n) return std::pow(p0, static_cast<double>(n));
  const double lp = std::log(p0);
  const double lq = std::log1p(-p0);
  double acc = 0.0;
  for (long k = n; k >= n1; --k) {
    const double lterm = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                         std::lgamma(n - k + 1.0) + k * lp + (n - k) * lq;
    acc += std::exp(lterm);
  }
  return std::min(acc, 1.0);
}

TestResult run_test(const ClassQuery& query, const ClassSizes& sizes,
                    const std::vector<SelectionRecord>& selections,
                    size_t first, size_t len, bool g14_source) {
  TestResult res;
  res.g14_source = g14_source;
  res.period_start_t = selections[first].t;
  res.period_end_t = selections[first + len - 1].t;
  for (size_t i = first; i < first + len; ++i) {
    const SelectionRecord& r = selections[i];
    if (r.fallback || !query.h0.matches(r.spec)) {
      res.outside_h0 = true; // excluded from the counts and trials
      continue;
    }
    if (query.h1.matches(r.spec)) ++res.n1;
    else ++res.n0;
  }
  res.n = res.n1 + res.n0;
  if (res.n == 0) {
    res.bayes = kNaN;
    res.p_value = kNaN;
    return res;
  }
  res.bayes = bayes_factor(sizes, res.n1, res.n0);
  const double p0 = static_cast<double>(sizes.h1) /
                    static_cast<double>(sizes.h1 + sizes.h0_minus_h1);
  res.p_value = binomial_upper_tail(res.n, p0, res.n1);
  return res;
}

std::vector<TestResult> rolling_tests(const ClassQuery& query,
                                      const std::vector<ModelSpec>& universe,
                                      const std::vector<SelectionRecord>& selections,
                                      int period_len, bool g14_source) {
  if (period_len < 1)
    throw std::invalid_argument("rolling_tests: period must be >= 1");
  const ClassSizes sizes = class_sizes(query, universe);
  std::vector<TestResult> out;
  const size_t len = static_cast<size_t>(period_len);
  for (size_t first = 0; first + len <= selections.size(); first += len)
    out.push_back(run_test(query, sizes, selections, first, len, g14_source));
  return out;
}

std::string tests_to_csv(const std::vector<TestResult>& results) {
  CsvWriter w({"period_start", "period_end", "n", "n1", "n0", "bayes_factor",
               "p_value", "warning"});
  for (const TestResult& r : results) {
    std::string warning;
    if (r.g14_source) warning += "g14";
    if (r.outside_h0) warning += warning.empty() ? "outside" : ";outside";
    w.add_row({std::to_string(r.period_start_t), std::to_string(r.period_end_t),
               std::to_string(r.n), std::to_string(r.n1), std::to_string(r.n0),
               fmt_double(r.bayes), fmt_double(r.p_value), warning});
  }
  return w.to_string();
}

} // namespace flowcast
