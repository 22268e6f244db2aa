#pragma once

#include <vector>

#include "seqdevid/nn/tensor.hpp"

namespace seqdevid::nn {

// Valid (unpadded) 1-D convolution along the time axis. Kernel row k holds
// W consecutive input rows flattened, so kernel(k, w*F + f) multiplies
// seq(t + w, f).
struct Conv1dWeights {
  const Tensor2& kernels;  // K x (W*F)
  const Tensor2& bias;     // K x 1
  std::size_t width;

  std::size_t channels() const { return kernels.rows(); }
};

struct Conv1dGradRefs {
  Tensor2& kernels;
  Tensor2& bias;
};

struct Conv1dTrace {
  Tensor2 input;
  Tensor2 pre;  // pre-activation, L x K
};

inline std::size_t conv_output_length(std::size_t seq_len, std::size_t width) {
  if (width == 0 || width > seq_len) {
    throw Error(Errc::KernelTooWide,
                "kernel width " + std::to_string(width) + " exceeds sequence length " + std::to_string(seq_len));
  }
  return seq_len - width + 1;
}

/// relu(conv(seq)); output is (T-W+1) x K.
inline Tensor2 conv1d_forward(const Conv1dWeights& w, const Tensor2& seq, Conv1dTrace* trace = nullptr) {
  const std::size_t F = seq.cols();
  const std::size_t L = conv_output_length(seq.rows(), w.width);
  const std::size_t K = w.channels();
  require_shape(w.kernels, K, w.width * F, "conv kernels");
  require_shape(w.bias, K, 1, "conv bias");

  Tensor2 pre(L, K);
  const std::size_t span_len = w.width * F;
  for (std::size_t t = 0; t < L; ++t) {
    const double* window = seq.data().data() + t * F;
    for (std::size_t k = 0; k < K; ++k) {
      const double* kr = w.kernels.data().data() + k * span_len;
      double s = w.bias(k, 0);
      for (std::size_t j = 0; j < span_len; ++j) s += kr[j] * window[j];
      pre(t, k) = s;
    }
  }
  Tensor2 out = pre;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  if (trace) {
    trace->input = seq;
    trace->pre = std::move(pre);
  }
  return out;
}

inline Tensor2 conv1d_backward(const Conv1dWeights& w, const Conv1dTrace& trace, const Tensor2& dout,
                               Conv1dGradRefs grads) {
  const std::size_t F = trace.input.cols();
  const std::size_t L = trace.pre.rows();
  const std::size_t K = w.channels();
  require_shape(dout, L, K, "conv upstream gradient");
  const std::size_t span_len = w.width * F;
  Tensor2 dseq(trace.input.rows(), F);
  for (std::size_t t = 0; t < L; ++t) {
    const double* window = trace.input.data().data() + t * F;
    double* dwindow = dseq.data().data() + t * F;
    for (std::size_t k = 0; k < K; ++k) {
      if (trace.pre(t, k) <= 0.0) continue;
      const double d = dout(t, k);
      if (d == 0.0) continue;
      grads.bias(k, 0) += d;
      double* gk = grads.kernels.data().data() + k * span_len;
      const double* kr = w.kernels.data().data() + k * span_len;
      for (std::size_t j = 0; j < span_len; ++j) {
        gk[j] += d * window[j];
        dwindow[j] += d * kr[j];
      }
    }
  }
  return dseq;
}

struct MaxPoolTrace {
  std::size_t in_rows = 0;
  std::vector<std::size_t> argmax;  // per output cell, source row
};

inline std::size_t pool_output_length(std::size_t len, std::size_t window) {
  if (window == 0) throw Error(Errc::InvalidSpec, "pool window must be positive");
  return (len + window - 1) / window;
}

/// Per-channel max over non-overlapping windows; a final partial window is kept.
inline Tensor2 maxpool1d(const Tensor2& seq, std::size_t window, MaxPoolTrace* trace = nullptr) {
  const std::size_t P = pool_output_length(seq.rows(), window);
  const std::size_t K = seq.cols();
  Tensor2 out(P, K);
  if (trace) {
    trace->in_rows = seq.rows();
    trace->argmax.assign(P * K, 0);
  }
  for (std::size_t j = 0; j < P; ++j) {
    const std::size_t begin = j * window;
    const std::size_t end = std::min(seq.rows(), begin + window);
    for (std::size_t k = 0; k < K; ++k) {
      std::size_t best = begin;
      for (std::size_t t = begin + 1; t < end; ++t) {
        if (seq(t, k) > seq(best, k)) best = t;
      }
      out(j, k) = seq(best, k);
      if (trace) trace->argmax[j * K + k] = best;
    }
  }
  return out;
}

inline Tensor2 maxpool1d_backward(const MaxPoolTrace& trace, const Tensor2& dout) {
  const std::size_t K = dout.cols();
  require_shape(dout, trace.argmax.size() / (K ? K : 1), K, "maxpool upstream gradient");
  Tensor2 dseq(trace.in_rows, K);
  for (std::size_t j = 0; j < dout.rows(); ++j) {
    for (std::size_t k = 0; k < K; ++k) dseq(trace.argmax[j * K + k], k) += dout(j, k);
  }
  return dseq;
}

}  // namespace seqdevid::nn
