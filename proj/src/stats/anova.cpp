#include <algorithm>
#include <cmath>
#include <limits>

#include "handpan/stats.hpp"

namespace handpan::stats {

namespace {

constexpr double kRelativeZero = 1e-12;

void check_table(const ScoreTable& table) {
  if (table.n() < 2 || table.k() < 2) {
    throw IncompleteTable("need at least 2 subjects and 2 conditions");
  }
  if (table.values.size() != table.n()) {
    throw IncompleteTable("row count does not match subject count");
  }
  for (const auto& row : table.values) {
    if (row.size() != table.k()) {
      throw IncompleteTable("row length does not match condition count");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw IncompleteTable("non-finite cell");
      }
    }
  }
}

}  // namespace

std::vector<double> ScoreTable::column(std::size_t condition) const {
  std::vector<double> col;
  col.reserve(values.size());
  for (const auto& row : values) {
    col.push_back(row.at(condition));
  }
  return col;
}

AnovaResult rm_anova(const ScoreTable& table) {
  check_table(table);
  const std::size_t n = table.n();
  const std::size_t k = table.k();

  std::vector<double> subj_mean(n, 0.0);
  std::vector<double> cond_mean(k, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      subj_mean[i] += table.values[i][j];
      cond_mean[j] += table.values[i][j];
      grand += table.values[i][j];
    }
  }
  for (auto& m : subj_mean) m /= static_cast<double>(k);
  for (auto& m : cond_mean) m /= static_cast<double>(n);
  grand /= static_cast<double>(n * k);

  AnovaResult r;
  for (std::size_t j = 0; j < k; ++j) {
    r.ss_cond += (cond_mean[j] - grand) * (cond_mean[j] - grand);
  }
  r.ss_cond *= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.ss_subj += (subj_mean[i] - grand) * (subj_mean[i] - grand);
  }
  r.ss_subj *= static_cast<double>(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double x = table.values[i][j];
      const double resid = x - subj_mean[i] - cond_mean[j] + grand;
      r.ss_err += resid * resid;
      r.ss_total += (x - grand) * (x - grand);
    }
  }

  r.df1 = static_cast<int>(k - 1);
  r.df2 = static_cast<int>((k - 1) * (n - 1));
  const double denom = r.ss_cond + r.ss_subj + r.ss_err;
  r.eta_g = denom > 0.0 ? r.ss_cond / denom : 0.0;

  const double scale = std::max(r.ss_total, std::numeric_limits<double>::min());
  if (r.ss_cond <= kRelativeZero * scale) {
    r.f = 0.0;
    r.p = 1.0;
    return r;
  }
  if (r.ss_err <= kRelativeZero * scale) {
    throw ZeroErrorVariance();
  }
  r.f = (r.ss_cond / r.df1) / (r.ss_err / r.df2);
  r.p = f_upper_tail(r.f, r.df1, r.df2);
  return r;
}

TResult paired_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch();
  }
  if (a.size() < 2) {
    throw InvalidParams("paired t-test needs at least 2 pairs");
  }
  std::vector<double> d(a.size());
  double max_abs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
    max_abs = std::max(max_abs, std::abs(d[i]));
  }
  TResult r;
  r.df = static_cast<int>(a.size() - 1);
  r.mean_diff = mean(d);
  r.sd_diff = sample_sd(d);
  if (r.sd_diff <= kRelativeZero * max_abs || max_abs == 0.0) {
    throw ZeroVariance();
  }
  r.t = r.mean_diff / (r.sd_diff / std::sqrt(static_cast<double>(a.size())));
  r.p_two_sided = t_two_sided(r.t, r.df);
  return r;
}

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m) {
  if (m == 0) {
    throw InvalidParams("Bonferroni count must be >= 1");
  }
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) {
    out.push_back(std::min(1.0, p * static_cast<double>(m)));
  }
  return out;
}

const PairwiseTest& PosthocResult::at(std::size_t i, std::size_t j) const {
  const int idx = index.at(i).at(j);
  if (idx < 0) {
    throw InvalidParams("no pairwise test of a condition with itself");
  }
  return tests[static_cast<std::size_t>(idx)];
}

PosthocResult posthoc_all(const ScoreTable& table, double alpha) {
  check_table(table);
  const std::size_t k = table.k();
  PosthocResult out;
  out.alpha = alpha;
  out.m = k * (k - 1) / 2;
  out.index.assign(k, std::vector<int>(k, -1));

  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < k; ++j) {
    cols.push_back(table.column(j));
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      PairwiseTest test;
      test.a = a;
      test.b = b;
      try {
        test.result = paired_t(cols[a], cols[b]);
      } catch (const ZeroVariance&) {
        test.degenerate = true;
        test.result.df = static_cast<int>(table.n() - 1);
        test.result.mean_diff = cols[a][0] - cols[b][0];
        test.result.sd_diff = 0.0;
        if (test.result.mean_diff == 0.0) {
          test.result.t = 0.0;
          test.result.p_two_sided = 1.0;
        } else {
          test.result.t = std::copysign(std::numeric_limits<double>::infinity(), test.result.mean_diff);
          test.result.p_two_sided = 0.0;
        }
      }
      const double p = test.result.p_two_sided;
      test.p_adjusted = bonferroni(std::span<const double>(&p, 1), out.m).front();
      test.significant = test.p_adjusted < alpha;
      const int idx = static_cast<int>(out.tests.size());
      out.index[a][b] = idx;
      out.index[b][a] = idx;
      out.tests.push_back(test);
    }
  }
  return out;
}

}  // namespace handpan::stats
