#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "handpan/error.hpp"

namespace handpan::stats {

class IncompleteTable : public Error {
 public:
  using Error::Error;
};

class ZeroErrorVariance : public Error {
 public:
  ZeroErrorVariance() : Error("error sum of squares is zero; F is undefined") {}
};

class ZeroVariance : public Error {
 public:
  ZeroVariance() : Error("paired differences have zero variance") {}
};

class LengthMismatch : public Error {
 public:
  LengthMismatch() : Error("paired samples differ in length") {}
};

/// Subjects x conditions, every cell present.
struct ScoreTable {
  std::vector<std::string> subjects;
  std::vector<std::string> conditions;
  std::vector<std::vector<double>> values;  // values[subject][condition]

  std::size_t n() const { return subjects.size(); }
  std::size_t k() const { return conditions.size(); }
  std::vector<double> column(std::size_t condition) const;
};

struct AnovaResult {
  double f = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p = 1.0;
  double eta_g = 0.0;
  double ss_cond = 0.0;
  double ss_subj = 0.0;
  double ss_err = 0.0;
  double ss_total = 0.0;
  std::string caveat = "no sphericity correction applied";
};

/// One-way within-subjects ANOVA. ss_err is accumulated from the residuals
/// x - subject mean - condition mean + grand mean, so ss_cond + ss_subj +
/// ss_err = ss_total is a real check rather than a definition.
/// No condition effect at all (ss_cond = 0) gives F = 0, p = 1. Otherwise
/// throws ZeroErrorVariance when ss_err vanishes. Throws IncompleteTable for
/// n < 2, k < 2, ragged rows or non-finite cells.
AnovaResult rm_anova(const ScoreTable& table);

struct TResult {
  double t = 0.0;
  int df = 0;
  double p_two_sided = 1.0;
  double mean_diff = 0.0;
  double sd_diff = 0.0;
};

/// Paired t-test on a - b.
TResult paired_t(std::span<const double> a, std::span<const double> b);

/// min(1, p * m) for each p.
std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m);

struct PairwiseTest {
  std::size_t a = 0;
  std::size_t b = 0;
  TResult result;          // of column a minus column b
  double p_adjusted = 1.0;
  bool significant = false;
  bool degenerate = false;  // zero-variance differences; see posthoc_all
};

struct PosthocResult {
  std::size_t m = 0;  // k(k-1)/2
  double alpha = 0.05;
  std::vector<PairwiseTest> tests;  // (a, b) with a < b, lexicographic
  // k x k view: entry [i][j] indexes `tests`, symmetric, -1 on the diagonal.
  std::vector<std::vector<int>> index;

  const PairwiseTest& at(std::size_t i, std::size_t j) const;
};

/// All k(k-1)/2 paired t-tests with Bonferroni adjustment. A pair whose
/// differences are all zero is reported as t = 0, p = 1; a pair with a
/// constant non-zero difference is reported as t = +/-inf, p = 0. Both are
/// flagged `degenerate`.
PosthocResult posthoc_all(const ScoreTable& table, double alpha = 0.05);

// Distribution tails used by the tests above.

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// P(F > f) for F(df1, df2).
double f_upper_tail(double f, double df1, double df2);
/// P(|T| > |t|) for Student t with df degrees of freedom.
double t_two_sided(double t, double df);

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_sd(std::span<const double> xs);

}  // namespace handpan::stats
