#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "schac/errors.hpp"

namespace schac {

struct Summary {
  double mean = 0.0;
  double se = 0.0; ///< standard error of the mean
  std::size_t n = 0;
};

inline Summary summarize(std::span<const double> x) {
  Summary s;
  s.n = x.size();
  if (x.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 0};
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  s.mean = m;
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    s.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  }
  return s;
}

/// Moment estimate (E X^p)^{1/p} with a delta-method standard error.
inline Summary moment_estimate(std::span<const double> x, int p) {
  if (p < 1) throw ContractViolation("moment_estimate: p must be >= 1");
  std::vector<double> xp(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xp[i] = std::pow(std::abs(x[i]), p);
  const Summary m = summarize(xp);
  Summary out;
  out.n = m.n;
  out.mean = std::pow(m.mean, 1.0 / p);
  out.se = m.mean > 0.0 ? out.mean / (p * m.mean) * m.se : 0.0;
  return out;
}

struct LinearFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double slope_se = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
};

/// Ordinary least squares y = a + b x with a Student-t interval for b.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y, double confidence = 0.95) {
  if (x.size() != y.size()) throw ContractViolation("fit_line: size mismatch");
  LinearFit f;
  f.n = x.size();
  if (f.n < 2) return f;
  const double n = static_cast<double>(f.n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  if (f.n > 2) {
    const double rss = std::max(0.0, syy - f.slope * sxy);
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
    const boost::math::students_t dist(n - 2.0);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
    f.ci_low = f.slope - t * f.slope_se;
    f.ci_high = f.slope + t * f.slope_se;
  }
  return f;
}

} // namespace schac
