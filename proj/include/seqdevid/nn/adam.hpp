#pragma once

#include <cmath>

#include "seqdevid/nn/params.hpp"

namespace seqdevid::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam with moments shaped like the parameters they track.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const ParameterSet& params, AdamConfig cfg = {})
      : cfg_(cfg), m_(params.zeros_like()), v_(params.zeros_like()) {}

  std::uint64_t step_count() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return cfg_; }
  const ParameterSet& first_moment() const noexcept { return m_; }
  const ParameterSet& second_moment() const noexcept { return v_; }

  void step(ParameterSet& params, const ParameterSet& grads) {
    params.require_same_layout(grads, "adam gradients");
    params.require_same_layout(m_, "adam state");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.count(); ++i) {
      auto& p = params[i].data();
      const auto& g = grads[i].data();
      auto& m = m_[i].data();
      auto& v = v_[i].data();
      for (std::size_t k = 0; k < p.size(); ++k) {
        m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
        v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
        const double mhat = m[k] / bc1;
        const double vhat = v[k] / bc2;
        p[k] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
      }
    }
  }

 private:
  AdamConfig cfg_;
  ParameterSet m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace seqdevid::nn
