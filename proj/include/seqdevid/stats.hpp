#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "seqdevid/error.hpp"

namespace seqdevid::stats {

namespace detail {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
inline double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// I_x(a, b), the regularized incomplete beta function.
inline double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(Errc::DomainError, "incomplete beta requires 0<=x<=1, a>0, b>0");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * detail::beta_continued_fraction(1.0 - x, b, a) / b;
}

/// Upper tail P(F > f) of the F distribution with (d1, d2) degrees of freedom.
inline double f_survival(double f, double d1, double d2) {
  if (std::isinf(f)) return 0.0;
  if (f <= 0.0) return 1.0;
  return regularized_incomplete_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0);
}

/// Two-sided tail 2*(1 - Phi(|z|)).
inline double normal_two_sided(double z) { return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0))); }

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  bool degenerate = false;  // zero within-group variance
};

/// One-way ANOVA F-test of equal group means.
inline AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(Errc::DomainError, "ANOVA needs at least 2 groups");
  std::size_t n = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(Errc::DomainError, "every ANOVA group needs at least 2 samples");
    n += g.size();
    grand += std::accumulate(g.begin(), g.end(), 0.0);
  }
  grand /= static_cast<double>(n);

  AnovaResult r;
  r.df_between = groups.size() - 1;
  r.df_within = n - groups.size();
  for (const auto& g : groups) {
    const double m = mean(g);
    r.ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) r.ss_within += (v - m) * (v - m);
  }
  const double ms_between = r.ss_between / static_cast<double>(r.df_between);
  const double ms_within = r.ss_within / static_cast<double>(r.df_within);
  if (ms_within == 0.0) {
    r.degenerate = true;
    if (ms_between == 0.0) {
      r.f = 0.0;
      r.p = 1.0;
    } else {
      r.f = std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.f = ms_between / ms_within;
  r.p = f_survival(r.f, static_cast<double>(r.df_between), static_cast<double>(r.df_within));
  return r;
}

// ---------------------------------------------------------------------------

/// Midranks (1-based) of the pooled sample; tied values share their mean rank.
inline std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

enum class UMethod { Auto, Exact, Normal };

struct UTestResult {
  double u_a = 0.0;  // R_a - n_a(n_a+1)/2
  double u_b = 0.0;
  double u = 0.0;    // min(u_a, u_b)
  double z = 0.0;    // normal approximation, tie- and continuity-corrected
  double p = 1.0;    // two-sided
  bool exact = false;
};

inline constexpr std::size_t kExactMaxTotal = 16;

/// Two-sided Mann-Whitney U test. Auto uses exact enumeration over all
/// splits of the pooled midranks when n_a + n_b <= 16, otherwise the
/// normal approximation.
inline UTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                  UMethod method = UMethod::Auto) {
  if (a.empty() || b.empty()) throw Error(Errc::DomainError, "Mann-Whitney U needs non-empty samples");
  const std::size_t na = a.size(), nb = b.size(), N = na + nb;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);

  // Doubled midranks are integers, which keeps the exact path free of
  // rounding when comparing statistics.
  std::vector<std::int64_t> r2(N);
  for (std::size_t i = 0; i < N; ++i) r2[i] = std::llround(2.0 * ranks[i]);
  std::int64_t ra2 = 0;
  for (std::size_t i = 0; i < na; ++i) ra2 += r2[i];
  const auto ina = static_cast<std::int64_t>(na), inb = static_cast<std::int64_t>(nb);
  const std::int64_t ua2 = ra2 - ina * (ina + 1);
  const std::int64_t mu2 = ina * inb;  // 2 * n_a n_b / 2

  UTestResult res;
  res.u_a = static_cast<double>(ua2) / 2.0;
  res.u_b = static_cast<double>(na * nb) - res.u_a;
  res.u = std::min(res.u_a, res.u_b);

  double tie_sum = 0.0;
  {
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < N;) {
      std::size_t j = i;
      while (j + 1 < N && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_sum += t * t * t - t;
      i = j + 1;
    }
  }
  const double dn = static_cast<double>(N);
  const double var = static_cast<double>(na * nb) / 12.0 * ((dn + 1.0) - tie_sum / (dn * (dn - 1.0)));
  const double dev = std::abs(res.u_a - static_cast<double>(na * nb) / 2.0);
  if (var > 0.0) {
    res.z = std::max(0.0, dev - 0.5) / std::sqrt(var);
  }

  const bool use_exact = method == UMethod::Exact || (method == UMethod::Auto && N <= kExactMaxTotal);
  if (use_exact) {
    if (N > 24) throw Error(Errc::DomainError, "exact Mann-Whitney enumeration limited to 24 pooled samples");
    const std::int64_t obs = std::abs(ua2 - mu2);
    std::uint64_t hits = 0, total = 0;
    const std::uint32_t limit = 1u << N;
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != na) continue;
      std::int64_t s = 0;
      for (std::size_t i = 0; i < N; ++i) {
        if (mask >> i & 1u) s += r2[i];
      }
      ++total;
      if (std::abs(s - ina * (ina + 1) - mu2) >= obs) ++hits;
    }
    res.exact = true;
    res.p = static_cast<double>(hits) / static_cast<double>(total);
  } else {
    res.p = var > 0.0 ? normal_two_sided(res.z) : 1.0;
  }
  return res;
}

// ---------------------------------------------------------------------------

/// Five-number summary with linearly interpolated quartiles.
struct Quartiles {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(Errc::DomainError, "quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline Quartiles quartiles(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return {quantile_sorted(s, 0.0), quantile_sorted(s, 0.25), quantile_sorted(s, 0.5), quantile_sorted(s, 0.75),
          quantile_sorted(s, 1.0)};
}

}  // namespace seqdevid::stats
