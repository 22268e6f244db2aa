#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "seqdevid/nn/params.hpp"
#include "seqdevid/rng.hpp"

namespace seqdevid::nn {

struct GradCheckOptions {
  double step = 1e-5;
  /// Check at most this many scalars (sampled without replacement); 0 checks all.
  std::size_t max_params = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// |a - n| / max(1, |a|, |n|)
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

/// Compares `analytic` against central differences of `loss()` taken by
/// perturbing `params` in place. `params` is restored before returning.
template <typename LossFn>
GradCheckResult gradient_check(ParameterSet& params, const ParameterSet& analytic, LossFn&& loss,
                               const GradCheckOptions& opt = {}) {
  params.require_same_layout(analytic, "gradient check");
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  coords.reserve(params.scalar_count());
  for (std::size_t i = 0; i < params.count(); ++i) {
    for (std::size_t k = 0; k < params[i].size(); ++k) coords.emplace_back(i, k);
  }
  if (opt.max_params != 0 && coords.size() > opt.max_params) {
    Rng rng(opt.seed);
    rng.shuffle(coords);
    coords.resize(opt.max_params);
    std::sort(coords.begin(), coords.end());
  }

  GradCheckResult res;
  for (const auto& [i, k] : coords) {
    double& p = params[i].data()[k];
    const double saved = p;
    p = saved + opt.step;
    const double up = loss();
    p = saved - opt.step;
    const double down = loss();
    p = saved;
    const double numeric = (up - down) / (2.0 * opt.step);
    const double a = analytic[i].data()[k];
    const double err = relative_error(a, numeric);
    ++res.checked;
    if (res.checked == 1 || err > res.max_rel_error) {
      res.max_rel_error = err;
      res.worst_tensor = params.name(i);
      res.worst_index = k;
      res.worst_analytic = a;
      res.worst_numeric = numeric;
    }
  }
  return res;
}

}  // namespace seqdevid::nn
