#pragma once

// Independent reference implementations used only by the tests. Written
// straight from the definitions, favouring obviousness over speed.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace fairgap::oracle {

struct Counts {
  double tp, fp, tn, fn;
  double n() const { return tp + fp + tn + fn; }
};

inline std::optional<double> frac(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

inline std::optional<double> minus(std::optional<double> a, std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

inline std::optional<double> over(std::optional<double> a, std::optional<double> b) {
  if (!a || !b || *b == 0.0) return std::nullopt;
  return *a / *b;
}

// The sixteen notion table entries, one line each, group 0 first.
inline std::array<std::optional<double>, 16> notions(const Counts& g0, const Counts& g1) {
  const double N = g0.n() + g1.n();
  auto fpr = [](const Counts& c) { return frac(c.fp, c.fp + c.tn); };
  auto tpr = [](const Counts& c) { return frac(c.tp, c.tp + c.fn); };
  auto err = [&](const Counts& c) { return frac(c.fp + c.fn, N); };
  auto fdr = [](const Counts& c) { return frac(c.fp, c.tp + c.fp); };
  auto fomr = [](const Counts& c) { return frac(c.fn, c.tn + c.fn); };
  auto pos = [](const Counts& c) { return frac(c.tp + c.fp, c.n()); };
  auto fnr = [](const Counts& c) { return frac(c.fn, c.fn + c.tp); };
  auto ppv = [](const Counts& c) { return frac(c.tp, c.tp + c.fp); };
  std::optional<double> eod;
  if (auto d1 = minus(fpr(g0), fpr(g1)), d2 = minus(tpr(g0), tpr(g1)); d1 && d2)
    eod = 0.5 * (*d1 + *d2);
  return {
      eod,
      minus(err(g0), err(g1)),
      over(err(g0), err(g1)),
      minus(fdr(g0), fdr(g1)),
      over(fdr(g0), fdr(g1)),
      minus(fpr(g0), fpr(g1)),
      over(fpr(g0), fpr(g1)),
      minus(fomr(g0), fomr(g1)),
      over(fomr(g0), fomr(g1)),
      over(pos(g0), pos(g1)),
      minus(pos(g0), pos(g1)),
      minus(tpr(g0), tpr(g1)),
      minus(fnr(g0), fnr(g1)),
      over(fnr(g0), fnr(g1)),
      eod,
      minus(ppv(g0), ppv(g1)),
  };
}

// Central finite differences of a scalar function.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double step = 1e-6) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = f(x);
    x[i] = keep - step;
    const double down = f(x);
    x[i] = keep;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

struct Point2 {
  double u;
  double acc;
};

// Indices of points not dominated by any other; exact duplicates keep the first.
inline std::vector<std::size_t> nondominated(const std::vector<Point2>& pts) {
  std::vector<std::size_t> keep;
  for (std::size_t q = 0; q < pts.size(); ++q) {
    bool dominated = false;
    for (std::size_t p = 0; p < pts.size() && !dominated; ++p) {
      if (p == q) continue;
      const bool weak = pts[p].u <= pts[q].u && pts[p].acc >= pts[q].acc;
      const bool strict = pts[p].u < pts[q].u || pts[p].acc > pts[q].acc;
      if (weak && strict) dominated = true;
      if (!strict && weak && p < q) dominated = true;  // duplicate seen earlier
    }
    if (!dominated) keep.push_back(q);
  }
  return keep;
}

// W1 as the integral of |F_a(t) - F_b(t)| over the merged support.
inline double wasserstein_cdf(std::vector<double> a, std::vector<double> b) {
  std::vector<double> support(a);
  support.insert(support.end(), b.begin(), b.end());
  std::sort(support.begin(), support.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto cdf = [](const std::vector<double>& v, double t) {
    return static_cast<double>(std::upper_bound(v.begin(), v.end(), t) - v.begin()) /
           static_cast<double>(v.size());
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < support.size(); ++i)
    total += std::abs(cdf(a, support[i]) - cdf(b, support[i])) * (support[i + 1] - support[i]);
  return total;
}

}  // namespace fairgap::oracle
