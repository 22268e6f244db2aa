#pragma once

#include <algorithm>
#include <cmath>

#include "seqdevid/nn/tensor.hpp"

namespace seqdevid::nn {

inline constexpr double kProbFloor = 1e-15;

struct DenseWeights {
  const Tensor2& weights;  // C x H
  const Tensor2& bias;     // C x 1
};

struct DenseGradRefs {
  Tensor2& weights;
  Tensor2& bias;
};

/// Max-shifted softmax.
inline Vec softmax(std::span<const double> logits) {
  Vec p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

inline Vec dense_logits(const DenseWeights& w, std::span<const double> h) {
  require_len(h, w.weights.cols(), "dense input");
  require_shape(w.bias, w.weights.rows(), 1, "dense bias");
  Vec z(w.bias.data());
  gemv_acc(w.weights, h, z);
  return z;
}

inline Vec dense_softmax_forward(const DenseWeights& w, std::span<const double> h) {
  return softmax(dense_logits(w, h));
}

inline void require_label(std::size_t label, std::size_t classes) {
  if (label >= classes) {
    throw Error(Errc::LabelOutOfRange,
                "label " + std::to_string(label) + " outside 0.." + std::to_string(classes ? classes - 1 : 0));
  }
}

/// -log p[label], with p floored at 1e-15.
inline double cross_entropy(std::span<const double> probs, std::size_t label) {
  require_label(label, probs.size());
  return -std::log(std::max(probs[label], kProbFloor));
}

/// dL/dlogits of cross_entropy(softmax(z)). Zero when the floor is active,
/// since the floored loss is locally constant there.
inline Vec cross_entropy_grad(std::span<const double> probs, std::size_t label) {
  require_label(label, probs.size());
  Vec d(probs.begin(), probs.end());
  if (probs[label] < kProbFloor) {
    std::fill(d.begin(), d.end(), 0.0);
    return d;
  }
  d[label] -= 1.0;
  return d;
}

/// Returns dL/dh and accumulates weight gradients.
inline Vec dense_backward(const DenseWeights& w, std::span<const double> h, std::span<const double> dlogits,
                          DenseGradRefs grads) {
  outer_acc(grads.weights, dlogits, h);
  for (std::size_t c = 0; c < dlogits.size(); ++c) grads.bias(c, 0) += dlogits[c];
  Vec dh(w.weights.cols(), 0.0);
  gemv_t_acc(w.weights, dlogits, dh);
  return dh;
}

}  // namespace seqdevid::nn
