#pragma once

#include "flowcast/adaptive.hpp"
#include "flowcast/model_zoo.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace flowcast {

// Predicate over model specs, conjunctive across attributes; an attribute
// with an empty value set is unconstrained. Parsed from strings like
// "all", "w=96", "group=1,2,3", "kind=uni", "w=12;d=2".
struct ModelFilter {
  std::set<int> groups;
  std::set<int> windows;
  std::set<int> ps;
  std::set<int> ds;
  std::set<int> qs;
  std::optional<bool> multivariate;

  bool matches(const ModelSpec& spec) const;
  bool unconstrained() const;
  static ModelFilter parse(const std::string& text);
};

// H1 strictly inside H0 (H0 defaults to all of H when unconstrained).
struct ClassQuery {
  std::string name = "query";
  ModelFilter h1;
  ModelFilter h0;
};

struct ClassSizes {
  long h1 = 0;
  long h0_minus_h1 = 0;
};

// Counts class memberships over the model universe of the run; throws
// std::invalid_argument when |H1| = 0 or H1 = H0.
ClassSizes class_sizes(const ClassQuery& query,
                       const std::vector<ModelSpec>& universe);

// Posterior-odds ratio under the counting prior:
//   B = (|H0 \ H1| / |H1|) * (n1 / n0),
// +infinity when n0 = 0 and n1 > 0; throws when n1 = n0 = 0.
double bayes_factor(const ClassSizes& sizes, long n1, long n0);

// Exact one-sided upper-tail binomial p-value P(X >= n1), X ~ Bin(n, p0).
double binomial_upper_tail(long n, double p0, long n1);

struct TestResult {
  int period_start_t = 0;
  int period_end_t = 0;
  long n = 0; // binomial trials: selections landing inside H0
  long n1 = 0;
  long n0 = 0;
  double bayes = 0.0;   // may be +inf; NaN when the period is empty
  double p_value = 1.0; // NaN when the period is empty
  bool outside_h0 = false; // some period selections fell outside H0
  bool g14_source = false; // selector uses penalties: binomial independence caveat
};

// One test over a selection slice [first, first + len).
TestResult run_test(const ClassQuery& query, const ClassSizes& sizes,
                    const std::vector<SelectionRecord>& selections,
                    size_t first, size_t len, bool g14_source);

// Non-overlapping consecutive periods; a trailing partial period is
// dropped. period_len is in forecast samples (180 = five trading days).
std::vector<TestResult> rolling_tests(const ClassQuery& query,
                                      const std::vector<ModelSpec>& universe,
                                      const std::vector<SelectionRecord>& selections,
                                      int period_len, bool g14_source);

std::string tests_to_csv(const std::vector<TestResult>& results);

} // namespace flowcast
