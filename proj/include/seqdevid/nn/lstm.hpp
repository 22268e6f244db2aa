#pragma once

#include <vector>

#include "seqdevid/nn/tensor.hpp"

namespace seqdevid::nn {

// Gate blocks are stacked row-wise in the order input, forget, cell, output:
// rows [0,H) input gate, [H,2H) forget gate, [2H,3H) candidate, [3H,4H) output gate.
//
//   i = sigma(W_i x + U_i h + b_i)      f = sigma(W_f x + U_f h + b_f)
//   g = tanh(W_g x + U_g h + b_g)       o = sigma(W_o x + U_o h + b_o)
//   c' = f*c + i*g                      h' = o*tanh(c')

struct LstmWeights {
  const Tensor2& input;      // 4H x F
  const Tensor2& recurrent;  // 4H x H
  const Tensor2& bias;       // 4H x 1

  std::size_t hidden() const { return recurrent.cols(); }
  std::size_t features() const { return input.cols(); }

  void validate() const {
    const std::size_t h = hidden();
    require_shape(input, 4 * h, input.cols(), "lstm input weights");
    require_shape(recurrent, 4 * h, h, "lstm recurrent weights");
    require_shape(bias, 4 * h, 1, "lstm bias");
  }
};

struct LstmGradRefs {
  Tensor2& input;
  Tensor2& recurrent;
  Tensor2& bias;
};

/// Owning parameter bundle for standalone cell use.
struct LstmCellParams {
  Tensor2 input, recurrent, bias;

  LstmCellParams(std::size_t features, std::size_t hidden)
      : input(4 * hidden, features), recurrent(4 * hidden, hidden), bias(4 * hidden, 1) {}

  LstmWeights weights() const { return {input, recurrent, bias}; }
  LstmGradRefs grad_refs() { return {input, recurrent, bias}; }
};

struct LstmStepCache {
  Vec x, h_prev, c_prev;
  Vec i, f, g, o;
  Vec c, tanh_c, h;
};

inline LstmStepCache lstm_cell_step(const LstmWeights& w, std::span<const double> x, std::span<const double> h_prev,
                                    std::span<const double> c_prev) {
  const std::size_t H = w.hidden();
  require_len(x, w.features(), "lstm x");
  require_len(h_prev, H, "lstm h_prev");
  require_len(c_prev, H, "lstm c_prev");

  Vec pre(w.bias.data());
  gemv_acc(w.input, x, pre);
  gemv_acc(w.recurrent, h_prev, pre);

  LstmStepCache s;
  s.x.assign(x.begin(), x.end());
  s.h_prev.assign(h_prev.begin(), h_prev.end());
  s.c_prev.assign(c_prev.begin(), c_prev.end());
  s.i.resize(H);
  s.f.resize(H);
  s.g.resize(H);
  s.o.resize(H);
  s.c.resize(H);
  s.tanh_c.resize(H);
  s.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.i[k] = sigmoid(pre[k]);
    s.f[k] = sigmoid(pre[H + k]);
    s.g[k] = std::tanh(pre[2 * H + k]);
    s.o[k] = sigmoid(pre[3 * H + k]);
    s.c[k] = s.f[k] * c_prev[k] + s.i[k] * s.g[k];
    s.tanh_c[k] = std::tanh(s.c[k]);
    s.h[k] = s.o[k] * s.tanh_c[k];
  }
  return s;
}

struct LstmStepGrad {
  Vec dx, dh_prev, dc_prev;
  Vec dpre;  // gradient w.r.t. the 4H gate pre-activations
};

/// Backpropagates dL/dh' and dL/dc' through one step, accumulating
/// parameter gradients into `grads`.
inline LstmStepGrad lstm_cell_backward(const LstmWeights& w, const LstmStepCache& s, std::span<const double> dh,
                                       std::span<const double> dc, LstmGradRefs grads) {
  const std::size_t H = w.hidden();
  LstmStepGrad out;
  out.dpre.resize(4 * H);
  out.dc_prev.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    const double d_o = dh[k] * s.tanh_c[k];
    const double dct = dc[k] + dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
    const double d_i = dct * s.g[k];
    const double d_f = dct * s.c_prev[k];
    const double d_g = dct * s.i[k];
    out.dc_prev[k] = dct * s.f[k];
    out.dpre[k] = d_i * s.i[k] * (1.0 - s.i[k]);
    out.dpre[H + k] = d_f * s.f[k] * (1.0 - s.f[k]);
    out.dpre[2 * H + k] = d_g * (1.0 - s.g[k] * s.g[k]);
    out.dpre[3 * H + k] = d_o * s.o[k] * (1.0 - s.o[k]);
  }
  outer_acc(grads.input, out.dpre, s.x);
  outer_acc(grads.recurrent, out.dpre, s.h_prev);
  auto& db = grads.bias.data();
  for (std::size_t k = 0; k < 4 * H; ++k) db[k] += out.dpre[k];

  out.dx.assign(w.features(), 0.0);
  out.dh_prev.assign(H, 0.0);
  gemv_t_acc(w.input, out.dpre, out.dx);
  gemv_t_acc(w.recurrent, out.dpre, out.dh_prev);
  return out;
}

enum class ReturnMode { Last, All };

struct LstmTrace {
  std::vector<LstmStepCache> steps;
  ReturnMode mode = ReturnMode::Last;
};

/// Unrolls the cell over the rows of `seq` from zero state. Returns 1xH
/// (Last) or TxH (All).
inline Tensor2 lstm_layer_forward(const LstmWeights& w, const Tensor2& seq, ReturnMode mode, LstmTrace* trace = nullptr) {
  w.validate();
  if (seq.rows() == 0) throw Error(Errc::ShapeMismatch, "lstm layer: empty sequence");
  require_shape(seq, seq.rows(), w.features(), "lstm layer input");
  const std::size_t T = seq.rows();
  const std::size_t H = w.hidden();

  Vec h(H, 0.0), c(H, 0.0);
  Tensor2 out(mode == ReturnMode::All ? T : 1, H);
  if (trace) {
    trace->steps.clear();
    trace->steps.reserve(T);
    trace->mode = mode;
  }
  for (std::size_t t = 0; t < T; ++t) {
    auto s = lstm_cell_step(w, seq.row(t), h, c);
    h = s.h;
    c = s.c;
    if (mode == ReturnMode::All) std::copy(h.begin(), h.end(), out.row(t).begin());
    if (trace) trace->steps.push_back(std::move(s));
  }
  if (mode == ReturnMode::Last) std::copy(h.begin(), h.end(), out.row(0).begin());
  return out;
}

struct LayerBackward {
  Tensor2 dinput;  // T x F
  Tensor2 dpre;    // T x (gate rows); per-step pre-activation gradients
};

/// BPTT through an unrolled layer. `dout` has the shape of the forward output.
inline LayerBackward lstm_layer_backward(const LstmWeights& w, const LstmTrace& trace, const Tensor2& dout,
                                         LstmGradRefs grads) {
  const std::size_t T = trace.steps.size();
  const std::size_t H = w.hidden();
  require_shape(dout, trace.mode == ReturnMode::All ? T : 1, H, "lstm layer upstream gradient");
  require_shape(grads.input, w.input.rows(), w.input.cols(), "lstm input grad");
  require_shape(grads.recurrent, w.recurrent.rows(), w.recurrent.cols(), "lstm recurrent grad");
  require_shape(grads.bias, w.bias.rows(), 1, "lstm bias grad");

  LayerBackward out{Tensor2(T, w.features()), Tensor2(T, 4 * H)};
  Vec dh(H, 0.0), dc(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    if (trace.mode == ReturnMode::All) {
      for (std::size_t k = 0; k < H; ++k) dh[k] += dout(t, k);
    } else if (t == T - 1) {
      for (std::size_t k = 0; k < H; ++k) dh[k] += dout(0, k);
    }
    auto g = lstm_cell_backward(w, trace.steps[t], dh, dc, grads);
    std::copy(g.dx.begin(), g.dx.end(), out.dinput.row(t).begin());
    std::copy(g.dpre.begin(), g.dpre.end(), out.dpre.row(t).begin());
    dh = std::move(g.dh_prev);
    dc = std::move(g.dc_prev);
  }
  return out;
}

}  // namespace seqdevid::nn
