#pragma once

#include <vector>

#include "seqdevid/nn/lstm.hpp"
#include "seqdevid/nn/tensor.hpp"

namespace seqdevid::nn {

// Row blocks of `input` and `bias`: [0,H) update gate z, [H,2H) reset gate r,
// [2H,3H) candidate. The recurrent weights are split because the candidate
// sees r*h rather than h.
//
//   z = sigma(W_z x + U_z h + b_z)      r = sigma(W_r x + U_r h + b_r)
//   n = tanh(W_n x + U_n (r*h) + b_n)   h' = (1-z)*h + z*n

struct GruWeights {
  const Tensor2& input;           // 3H x F
  const Tensor2& recurrent_gates; // 2H x H
  const Tensor2& recurrent_cand;  // H x H
  const Tensor2& bias;            // 3H x 1

  std::size_t hidden() const { return recurrent_cand.cols(); }
  std::size_t features() const { return input.cols(); }

  void validate() const {
    const std::size_t h = hidden();
    require_shape(input, 3 * h, input.cols(), "gru input weights");
    require_shape(recurrent_gates, 2 * h, h, "gru gate recurrent weights");
    require_shape(recurrent_cand, h, h, "gru candidate recurrent weights");
    require_shape(bias, 3 * h, 1, "gru bias");
  }
};

struct GruGradRefs {
  Tensor2& input;
  Tensor2& recurrent_gates;
  Tensor2& recurrent_cand;
  Tensor2& bias;
};

struct GruCellParams {
  Tensor2 input, recurrent_gates, recurrent_cand, bias;

  GruCellParams(std::size_t features, std::size_t hidden)
      : input(3 * hidden, features),
        recurrent_gates(2 * hidden, hidden),
        recurrent_cand(hidden, hidden),
        bias(3 * hidden, 1) {}

  GruWeights weights() const { return {input, recurrent_gates, recurrent_cand, bias}; }
  GruGradRefs grad_refs() { return {input, recurrent_gates, recurrent_cand, bias}; }
};

struct GruStepCache {
  Vec x, h_prev;
  Vec z, r, n, rh;
  Vec h;
};

inline GruStepCache gru_cell_step(const GruWeights& w, std::span<const double> x, std::span<const double> h_prev) {
  const std::size_t H = w.hidden();
  require_len(x, w.features(), "gru x");
  require_len(h_prev, H, "gru h_prev");

  Vec pre(w.bias.data());
  gemv_acc(w.input, x, pre);
  std::span<double> gates(pre.data(), 2 * H);
  gemv_acc(w.recurrent_gates, h_prev, gates);

  GruStepCache s;
  s.x.assign(x.begin(), x.end());
  s.h_prev.assign(h_prev.begin(), h_prev.end());
  s.z.resize(H);
  s.r.resize(H);
  s.rh.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.z[k] = sigmoid(pre[k]);
    s.r[k] = sigmoid(pre[H + k]);
    s.rh[k] = s.r[k] * h_prev[k];
  }
  std::span<double> cand(pre.data() + 2 * H, H);
  gemv_acc(w.recurrent_cand, s.rh, cand);
  s.n.resize(H);
  s.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.n[k] = std::tanh(cand[k]);
    s.h[k] = (1.0 - s.z[k]) * h_prev[k] + s.z[k] * s.n[k];
  }
  return s;
}

struct GruStepGrad {
  Vec dx, dh_prev, dpre;
};

inline GruStepGrad gru_cell_backward(const GruWeights& w, const GruStepCache& s, std::span<const double> dh,
                                     GruGradRefs grads) {
  const std::size_t H = w.hidden();
  GruStepGrad out;
  out.dpre.assign(3 * H, 0.0);
  out.dh_prev.assign(H, 0.0);
  for (std::size_t k = 0; k < H; ++k) {
    const double dz = dh[k] * (s.n[k] - s.h_prev[k]);
    const double dn = dh[k] * s.z[k];
    out.dh_prev[k] = dh[k] * (1.0 - s.z[k]);
    out.dpre[k] = dz * s.z[k] * (1.0 - s.z[k]);
    out.dpre[2 * H + k] = dn * (1.0 - s.n[k] * s.n[k]);
  }
  std::span<const double> dcand(out.dpre.data() + 2 * H, H);
  Vec drh(H, 0.0);
  gemv_t_acc(w.recurrent_cand, dcand, drh);
  outer_acc(grads.recurrent_cand, dcand, s.rh);
  for (std::size_t k = 0; k < H; ++k) {
    const double dr = drh[k] * s.h_prev[k];
    out.dh_prev[k] += drh[k] * s.r[k];
    out.dpre[H + k] = dr * s.r[k] * (1.0 - s.r[k]);
  }
  std::span<const double> dgates(out.dpre.data(), 2 * H);
  outer_acc(grads.recurrent_gates, dgates, s.h_prev);
  gemv_t_acc(w.recurrent_gates, dgates, out.dh_prev);

  outer_acc(grads.input, out.dpre, s.x);
  auto& db = grads.bias.data();
  for (std::size_t k = 0; k < 3 * H; ++k) db[k] += out.dpre[k];
  out.dx.assign(w.features(), 0.0);
  gemv_t_acc(w.input, out.dpre, out.dx);
  return out;
}

struct GruTrace {
  std::vector<GruStepCache> steps;
  ReturnMode mode = ReturnMode::Last;
};

inline Tensor2 gru_layer_forward(const GruWeights& w, const Tensor2& seq, ReturnMode mode, GruTrace* trace = nullptr) {
  w.validate();
  if (seq.rows() == 0) throw Error(Errc::ShapeMismatch, "gru layer: empty sequence");
  require_shape(seq, seq.rows(), w.features(), "gru layer input");
  const std::size_t T = seq.rows();
  const std::size_t H = w.hidden();
  Vec h(H, 0.0);
  Tensor2 out(mode == ReturnMode::All ? T : 1, H);
  if (trace) {
    trace->steps.clear();
    trace->mode = mode;
  }
  for (std::size_t t = 0; t < T; ++t) {
    auto s = gru_cell_step(w, seq.row(t), h);
    h = s.h;
    if (mode == ReturnMode::All) std::copy(h.begin(), h.end(), out.row(t).begin());
    if (trace) trace->steps.push_back(std::move(s));
  }
  if (mode == ReturnMode::Last) std::copy(h.begin(), h.end(), out.row(0).begin());
  return out;
}

inline LayerBackward gru_layer_backward(const GruWeights& w, const GruTrace& trace, const Tensor2& dout,
                                        GruGradRefs grads) {
  const std::size_t T = trace.steps.size();
  const std::size_t H = w.hidden();
  require_shape(dout, trace.mode == ReturnMode::All ? T : 1, H, "gru layer upstream gradient");
  LayerBackward out{Tensor2(T, w.features()), Tensor2(T, 3 * H)};
  Vec dh(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    if (trace.mode == ReturnMode::All) {
      for (std::size_t k = 0; k < H; ++k) dh[k] += dout(t, k);
    } else if (t == T - 1) {
      for (std::size_t k = 0; k < H; ++k) dh[k] += dout(0, k);
    }
    auto g = gru_cell_backward(w, trace.steps[t], dh, grads);
    std::copy(g.dx.begin(), g.dx.end(), out.dinput.row(t).begin());
    std::copy(g.dpre.begin(), g.dpre.end(), out.dpre.row(t).begin());
    dh = std::move(g.dh_prev);
  }
  return out;
}

}  // namespace seqdevid::nn
