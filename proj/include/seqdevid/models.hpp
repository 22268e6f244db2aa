#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqdevid/error.hpp"
#include "seqdevid/features.hpp"
#include "seqdevid/nn/adam.hpp"
#include "seqdevid/nn/conv.hpp"
#include "seqdevid/nn/dense.hpp"
#include "seqdevid/nn/gradcheck.hpp"
#include "seqdevid/nn/lstm.hpp"
#include "seqdevid/nn/params.hpp"
#include "seqdevid/rng.hpp"

namespace seqdevid::models {

using features::LabelCodec;
using features::Normalizer;
using features::SessionMatrix;
using nn::ParameterSet;
using nn::Tensor2;
using nn::Vec;

enum class Arch { VanillaLstm, StackedLstm, CnnLstm, EncoderDecoderLstm };

inline constexpr Arch kAllArchs[] = {Arch::CnnLstm, Arch::EncoderDecoderLstm, Arch::StackedLstm, Arch::VanillaLstm};

inline const char* arch_id(Arch a) {
  switch (a) {
    case Arch::VanillaLstm: return "VanillaLstm";
    case Arch::StackedLstm: return "StackedLstm";
    case Arch::CnnLstm: return "CnnLstm";
    case Arch::EncoderDecoderLstm: return "EncoderDecoderLstm";
  }
  return "?";
}

/// Column label used in reports.
inline const char* arch_display_name(Arch a) {
  switch (a) {
    case Arch::VanillaLstm: return "Vanilla-LSTM";
    case Arch::StackedLstm: return "Stacked-LSTM";
    case Arch::CnnLstm: return "CNN-LSTM";
    case Arch::EncoderDecoderLstm: return "ED-LSTM";
  }
  return "?";
}

inline Arch parse_arch(const std::string& s) {
  for (Arch a : kAllArchs) {
    if (s == arch_id(a) || s == arch_display_name(a)) return a;
  }
  if (s == "vanilla") return Arch::VanillaLstm;
  if (s == "stacked") return Arch::StackedLstm;
  if (s == "cnn") return Arch::CnnLstm;
  if (s == "encdec" || s == "ed") return Arch::EncoderDecoderLstm;
  throw Error(Errc::InvalidSpec, "unknown architecture '" + s + "'");
}

struct ModelSpec {
  Arch arch = Arch::VanillaLstm;
  std::size_t hidden = 64;
  std::size_t stacked_layers = 2;
  std::size_t conv_kernels = 32;
  std::size_t conv_width = 3;
  std::size_t pool_window = 2;
  std::size_t encoder_hidden = 0;  // 0 means `hidden`
  std::size_t decoder_hidden = 0;  // 0 means `hidden`
  std::size_t decoder_steps = 4;
  std::size_t classes = 27;
  std::size_t seq_len = 12;
  std::size_t features = 25;

  std::size_t enc_hidden() const { return encoder_hidden ? encoder_hidden : hidden; }
  std::size_t dec_hidden() const { return decoder_hidden ? decoder_hidden : hidden; }

  void validate() const {
    auto fail = [](const std::string& m) { throw Error(Errc::InvalidSpec, m); };
    if (hidden == 0) fail("hidden size must be positive");
    if (classes < 2) fail("need at least 2 classes");
    if (seq_len == 0 || features == 0) fail("input shape must be positive");
    if (arch == Arch::StackedLstm && stacked_layers < 2) fail("stacked LSTM needs at least 2 layers");
    if (arch == Arch::CnnLstm) {
      if (conv_kernels == 0 || pool_window == 0) fail("conv kernels and pool window must be positive");
      if (conv_width == 0 || conv_width > seq_len) {
        throw Error(Errc::KernelTooWide, "conv width " + std::to_string(conv_width) + " vs sequence length " +
                                             std::to_string(seq_len));
      }
    }
    if (arch == Arch::EncoderDecoderLstm && decoder_steps == 0) fail("decoder needs at least one step");
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline nlohmann::json spec_to_json(const ModelSpec& s) {
  nlohmann::json j{{"arch", arch_id(s.arch)},
                   {"hidden", s.hidden},
                   {"classes", s.classes},
                   {"seq_len", s.seq_len},
                   {"features", s.features}};
  switch (s.arch) {
    case Arch::StackedLstm: j["stacked_layers"] = s.stacked_layers; break;
    case Arch::CnnLstm:
      j["conv_kernels"] = s.conv_kernels;
      j["conv_width"] = s.conv_width;
      j["pool_window"] = s.pool_window;
      break;
    case Arch::EncoderDecoderLstm:
      j["encoder_hidden"] = s.enc_hidden();
      j["decoder_hidden"] = s.dec_hidden();
      j["decoder_steps"] = s.decoder_steps;
      break;
    case Arch::VanillaLstm: break;
  }
  return j;
}

/// Reads architecture hyperparameters; fields absent from `j` keep the
/// values already in `base`.
inline ModelSpec spec_from_json(const nlohmann::json& j, ModelSpec base = {}) {
  try {
    if (j.contains("arch")) base.arch = parse_arch(j.at("arch").get<std::string>());
    base.hidden = j.value("hidden", base.hidden);
    base.stacked_layers = j.value("stacked_layers", base.stacked_layers);
    base.conv_kernels = j.value("conv_kernels", base.conv_kernels);
    base.conv_width = j.value("conv_width", base.conv_width);
    base.pool_window = j.value("pool_window", base.pool_window);
    base.encoder_hidden = j.value("encoder_hidden", base.encoder_hidden);
    base.decoder_hidden = j.value("decoder_hidden", base.decoder_hidden);
    base.decoder_steps = j.value("decoder_steps", base.decoder_steps);
    base.classes = j.value("classes", base.classes);
    base.seq_len = j.value("seq_len", base.seq_len);
    base.features = j.value("features", base.features);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidSpec, std::string("model spec: ") + e.what());
  }
  return base;
}

// ---------------------------------------------------------------------------

struct LstmSlot {
  std::size_t input, recurrent, bias;
};

class Model;

/// Everything the backward pass needs from one forward evaluation.
struct ForwardPass {
  const Model* owner = nullptr;
  std::uint64_t version = 0;

  Tensor2 input;
  nn::Conv1dTrace conv;
  nn::MaxPoolTrace pool;
  std::vector<nn::LstmTrace> lstm;
  Vec head_input;
  Vec logits;
  Vec probs;
};

/// One of the four benchmark architectures with its parameters.
class Model {
 public:
  Model(const ModelSpec& spec, std::uint64_t seed) : spec_(spec) {
    spec_.validate();
    Rng rng(seed);
    const std::size_t F = spec_.features;
    switch (spec_.arch) {
      case Arch::VanillaLstm:
        add_lstm("lstm", F, spec_.hidden, rng);
        add_head(spec_.hidden, rng);
        break;
      case Arch::StackedLstm: {
        std::size_t in = F;
        for (std::size_t l = 0; l < spec_.stacked_layers; ++l) {
          add_lstm("lstm" + std::to_string(l), in, spec_.hidden, rng);
          in = spec_.hidden;
        }
        add_head(spec_.hidden, rng);
        break;
      }
      case Arch::CnnLstm: {
        const std::size_t K = spec_.conv_kernels, W = spec_.conv_width;
        conv_kernels_ = params_.add("conv.kernels", K, W * F);
        conv_bias_ = params_.add("conv.bias", K, 1);
        nn::glorot_uniform(params_[conv_kernels_], W * F, K, rng);
        add_lstm("lstm", K, spec_.hidden, rng);
        add_head(spec_.hidden, rng);
        break;
      }
      case Arch::EncoderDecoderLstm:
        add_lstm("encoder", F, spec_.enc_hidden(), rng);
        add_lstm("decoder", spec_.enc_hidden(), spec_.dec_hidden(), rng);
        add_head(spec_.dec_hidden(), rng);
        break;
    }
  }

  const ModelSpec& spec() const noexcept { return spec_; }
  const ParameterSet& parameters() const noexcept { return params_; }

  /// Mutable access invalidates outstanding forward passes.
  ParameterSet& mutable_parameters() noexcept {
    ++version_;
    return params_;
  }

  void set_parameters(ParameterSet p) {
    params_.require_same_layout(p, "set_parameters");
    for (std::size_t i = 0; i < p.count(); ++i) {
      if (p.name(i) != params_.name(i)) {
        throw Error(Errc::ShapeMismatch, "parameter '" + p.name(i) + "' where '" + params_.name(i) + "' expected");
      }
    }
    params_ = std::move(p);
    ++version_;
  }

  std::uint64_t version() const noexcept { return version_; }

  /// Number of time steps the (last) recurrent layer sees.
  std::size_t recurrent_steps() const {
    switch (spec_.arch) {
      case Arch::CnnLstm:
        return nn::pool_output_length(nn::conv_output_length(spec_.seq_len, spec_.conv_width), spec_.pool_window);
      case Arch::EncoderDecoderLstm: return spec_.decoder_steps;
      default: return spec_.seq_len;
    }
  }

  ForwardPass forward(const Tensor2& x) const {
    nn::require_shape(x, spec_.seq_len, spec_.features, "model input");
    ForwardPass fp;
    fp.owner = this;
    fp.version = version_;
    fp.input = x;
    fp.lstm.resize(lstm_.size());

    Tensor2 h;
    switch (spec_.arch) {
      case Arch::VanillaLstm: h = nn::lstm_layer_forward(lstm(0), x, nn::ReturnMode::Last, &fp.lstm[0]); break;
      case Arch::StackedLstm: {
        Tensor2 seq = x;
        for (std::size_t l = 0; l < lstm_.size(); ++l) {
          const auto mode = l + 1 == lstm_.size() ? nn::ReturnMode::Last : nn::ReturnMode::All;
          seq = nn::lstm_layer_forward(lstm(l), seq, mode, &fp.lstm[l]);
        }
        h = std::move(seq);
        break;
      }
      case Arch::CnnLstm: {
        const Tensor2 a = nn::conv1d_forward(conv(), x, &fp.conv);
        const Tensor2 p = nn::maxpool1d(a, spec_.pool_window, &fp.pool);
        h = nn::lstm_layer_forward(lstm(0), p, nn::ReturnMode::Last, &fp.lstm[0]);
        break;
      }
      case Arch::EncoderDecoderLstm: {
        const Tensor2 ctx = nn::lstm_layer_forward(lstm(0), x, nn::ReturnMode::Last, &fp.lstm[0]);
        Tensor2 rep(spec_.decoder_steps, ctx.cols());
        for (std::size_t t = 0; t < rep.rows(); ++t) std::copy(ctx.row(0).begin(), ctx.row(0).end(), rep.row(t).begin());
        h = nn::lstm_layer_forward(lstm(1), rep, nn::ReturnMode::Last, &fp.lstm[1]);
        break;
      }
    }
    fp.head_input.assign(h.row(0).begin(), h.row(0).end());
    fp.logits = nn::dense_logits(head(), fp.head_input);
    fp.probs = nn::softmax(fp.logits);
    return fp;
  }

  Vec predict_proba(const Tensor2& x) const { return forward(x).probs; }

  /// Argmax class; ties go to the lowest id.
  std::size_t predict(const Tensor2& x) const {
    const Vec p = predict_proba(x);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }

  double loss(const Tensor2& x, std::size_t label) const { return nn::cross_entropy(forward(x).probs, label); }

  /// Accumulates dL/dparams into `grads` given dL/dlogits.
  void backward_into(const ForwardPass& fp, std::span<const double> dlogits, ParameterSet& grads) const {
    if (fp.owner != this || fp.version != version_) {
      throw Error(Errc::StaleCache, "forward pass does not belong to the current parameters");
    }
    params_.require_same_layout(grads, "gradient set");
    nn::require_len(dlogits, spec_.classes, "dlogits");

    const Vec dh = nn::dense_backward(head(), fp.head_input, dlogits, {grads[head_w_], grads[head_b_]});
    Tensor2 dout(1, dh.size(), dh);
    switch (spec_.arch) {
      case Arch::VanillaLstm: lstm_backward(0, fp, dout, grads); break;
      case Arch::StackedLstm:
        for (std::size_t l = lstm_.size(); l-- > 0;) dout = lstm_backward(l, fp, dout, grads);
        break;
      case Arch::CnnLstm: {
        const Tensor2 dpool = lstm_backward(0, fp, dout, grads);
        const Tensor2 dconv = nn::maxpool1d_backward(fp.pool, dpool);
        nn::conv1d_backward(conv(), fp.conv, dconv, {grads[conv_kernels_], grads[conv_bias_]});
        break;
      }
      case Arch::EncoderDecoderLstm: {
        const Tensor2 drep = lstm_backward(1, fp, dout, grads);
        Tensor2 dctx(1, drep.cols());
        for (std::size_t t = 0; t < drep.rows(); ++t) {
          for (std::size_t k = 0; k < drep.cols(); ++k) dctx(0, k) += drep(t, k);
        }
        lstm_backward(0, fp, dctx, grads);
        break;
      }
    }
  }

  /// Cross-entropy gradient for one labelled example.
  ParameterSet backward(const ForwardPass& fp, std::size_t label) const {
    ParameterSet grads = params_.zeros_like();
    const Vec d = nn::cross_entropy_grad(fp.probs, label);
    backward_into(fp, d, grads);
    return grads;
  }

 private:
  void add_lstm(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng) {
    LstmSlot s{params_.add(name + ".input", 4 * hidden, in), params_.add(name + ".recurrent", 4 * hidden, hidden),
               params_.add(name + ".bias", 4 * hidden, 1)};
    nn::glorot_uniform(params_[s.input], in, hidden, rng);
    nn::glorot_uniform(params_[s.recurrent], hidden, hidden, rng);
    for (std::size_t k = 0; k < hidden; ++k) params_[s.bias](hidden + k, 0) = 1.0;  // forget gate
    lstm_.push_back(s);
  }

  void add_head(std::size_t hidden, Rng& rng) {
    head_w_ = params_.add("head.weights", spec_.classes, hidden);
    head_b_ = params_.add("head.bias", spec_.classes, 1);
    nn::glorot_uniform(params_[head_w_], hidden, spec_.classes, rng);
  }

  nn::LstmWeights lstm(std::size_t l) const {
    const auto& s = lstm_[l];
    return {params_[s.input], params_[s.recurrent], params_[s.bias]};
  }
  nn::Conv1dWeights conv() const { return {params_[conv_kernels_], params_[conv_bias_], spec_.conv_width}; }
  nn::DenseWeights head() const { return {params_[head_w_], params_[head_b_]}; }

  Tensor2 lstm_backward(std::size_t l, const ForwardPass& fp, const Tensor2& dout, ParameterSet& grads) const {
    const auto& s = lstm_[l];
    return nn::lstm_layer_backward(lstm(l), fp.lstm[l], dout, {grads[s.input], grads[s.recurrent], grads[s.bias]})
        .dinput;
  }

  ModelSpec spec_;
  ParameterSet params_;
  std::vector<LstmSlot> lstm_;
  std::size_t conv_kernels_ = 0, conv_bias_ = 0;
  std::size_t head_w_ = 0, head_b_ = 0;
  std::uint64_t version_ = 0;
};

inline Model build_model(const ModelSpec& spec, std::uint64_t seed) { return Model(spec, seed); }

/// Finite-difference check of the cross-entropy gradient on one example.
inline nn::GradCheckResult gradient_check(Model& model, const Tensor2& x, std::size_t label,
                                          const nn::GradCheckOptions& opt = {}) {
  const ParameterSet analytic = model.backward(model.forward(x), label);
  ParameterSet& params = model.mutable_parameters();
  return nn::gradient_check(params, analytic, [&] { return model.loss(x, label); }, opt);
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double train_fraction = 0.75;
  std::size_t patience = 30;

  void validate() const {
    if (epochs < 1) throw Error(Errc::BadConfig, "epochs must be >= 1");
    if (batch_size < 1) throw Error(Errc::BadConfig, "batch_size must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error(Errc::BadConfig, "train_fraction must be in (0,1)");
    if (!(learning_rate > 0.0)) throw Error(Errc::BadConfig, "learning_rate must be positive");
  }
};

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"train_fraction", c.train_fraction},
          {"patience", c.patience}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {}) {
  try {
    base.epochs = j.value("epochs", base.epochs);
    base.batch_size = j.value("batch_size", base.batch_size);
    base.learning_rate = j.value("learning_rate", base.learning_rate);
    base.train_fraction = j.value("train_fraction", base.train_fraction);
    base.patience = j.value("patience", base.patience);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadConfig, std::string("train config: ") + e.what());
  }
  return base;
}

struct Split {
  std::vector<std::size_t> train, test;
};

/// Per-class shuffled holdout; each class keeps at least one example on
/// each side.
inline Split stratified_split(const std::vector<SessionMatrix>& data, double train_fraction, std::uint64_t seed) {
  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data[i].label].push_back(i);
  Rng rng(derive_seed(seed, 0x5eed));
  Split s;
  for (auto& [label, idx] : by_class) {
    if (idx.size() < 2) {
      throw Error(Errc::ClassTooSmall, "class " + std::to_string(label) + " ('" + data[idx[0]].device_name +
                                           "') has fewer than 2 examples");
    }
    rng.shuffle(idx);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

struct TrainedModel {
  Model model;
  Normalizer normalizer;
  LabelCodec codec;
  std::vector<double> history;  // mean train loss per epoch
  std::uint64_t seed = 0;
  Split split;
};

inline void check_dataset_shape(const ModelSpec& spec, const std::vector<SessionMatrix>& data) {
  for (const auto& m : data) {
    nn::require_shape(m.values, spec.seq_len, spec.features, "dataset matrix");
    nn::require_label(m.label, spec.classes);
  }
}

/// Mini-batch Adam on mean cross-entropy over the training part of a
/// stratified split drawn from `cfg.seed`. Deterministic in (data, model, cfg).
inline TrainedModel train(Model model, const std::vector<SessionMatrix>& data, const TrainConfig& cfg) {
  cfg.validate();
  check_dataset_shape(model.spec(), data);
  Split split = stratified_split(data, cfg.train_fraction, cfg.seed);

  std::vector<SessionMatrix> train_raw;
  train_raw.reserve(split.train.size());
  for (std::size_t i : split.train) train_raw.push_back(data[i]);
  Normalizer norm = Normalizer::fit(train_raw);
  const auto train_set = norm.apply(train_raw);

  nn::AdamState adam(model.parameters(), {cfg.learning_rate});
  ParameterSet grads = model.parameters().zeros_like();
  Rng rng(derive_seed(cfg.seed, 0xba7c));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> history;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      grads.set_zero();
      for (std::size_t k = b; k < e; ++k) {
        const auto& ex = train_set[order[k]];
        const ForwardPass fp = model.forward(ex.values);
        const double l = nn::cross_entropy(fp.probs, ex.label);
        if (!std::isfinite(l)) {
          throw Error(Errc::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch));
        }
        total += l;
        model.backward_into(fp, nn::cross_entropy_grad(fp.probs, ex.label), grads);
      }
      grads.scale(1.0 / static_cast<double>(e - b));
      adam.step(model.mutable_parameters(), grads);
    }
    const double mean = total / static_cast<double>(train_set.size());
    history.push_back(mean);
    if (!model.parameters().all_finite()) {
      throw Error(Errc::NonFiniteLoss, "parameters became non-finite at epoch " + std::to_string(epoch));
    }
    if (mean < best - 1e-9) {
      best = mean;
      stale = 0;
    } else if (cfg.patience > 0 && ++stale >= cfg.patience) {
      break;
    }
  }
  return TrainedModel{std::move(model), std::move(norm), LabelCodec::from_dataset(data), std::move(history), cfg.seed,
                      std::move(split)};
}

inline TrainedModel train(const ModelSpec& spec, const std::vector<SessionMatrix>& data, const TrainConfig& cfg) {
  return train(build_model(spec, derive_seed(cfg.seed, 0x1417)), data, cfg);
}

struct Evaluation {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

/// Accuracy and confusion matrix on raw (un-normalized) matrices.
inline Evaluation evaluate(const Model& model, const Normalizer& norm, const std::vector<SessionMatrix>& test) {
  if (test.empty()) throw Error(Errc::EmptyTestSet, "no examples to evaluate");
  const std::size_t C = model.spec().classes;
  check_dataset_shape(model.spec(), test);
  Evaluation ev;
  ev.confusion.assign(C, std::vector<std::size_t>(C, 0));
  for (const auto& raw : test) {
    const std::size_t pred = model.predict(norm.apply(raw).values);
    ++ev.confusion[raw.label][pred];
    ev.correct += pred == raw.label;
  }
  ev.total = test.size();
  ev.accuracy = static_cast<double>(ev.correct) / static_cast<double>(ev.total);
  return ev;
}

inline Evaluation evaluate(const TrainedModel& tm, const std::vector<SessionMatrix>& test) {
  return evaluate(tm.model, tm.normalizer, test);
}

/// Evaluates on the held-out part of the split used for training.
inline Evaluation evaluate_holdout(const TrainedModel& tm, const std::vector<SessionMatrix>& data) {
  std::vector<SessionMatrix> test;
  for (std::size_t i : tm.split.test) test.push_back(data.at(i));
  return evaluate(tm, test);
}

// ---------------------------------------------------------------------------
// Persistence: parameter file plus JSON sidecar.

inline nlohmann::json normalizer_to_json(const Normalizer& n) {
  return {{"mode", n.mode() == features::NormMode::MinMax01 ? "minmax01" : "none"}, {"min", n.min()}, {"max", n.max()}};
}

inline Normalizer normalizer_from_json(const nlohmann::json& j) {
  const auto mode = j.at("mode").get<std::string>() == "none" ? features::NormMode::None : features::NormMode::MinMax01;
  return Normalizer::from_bounds(j.at("min").get<std::vector<double>>(), j.at("max").get<std::vector<double>>(), mode);
}

inline nlohmann::json sidecar_json(const TrainedModel& tm) {
  return {{"format", "seqdevid-model"},
          {"version", 1},
          {"spec", spec_to_json(tm.model.spec())},
          {"seed", tm.seed},
          {"labels", tm.codec.names()},
          {"normalizer", normalizer_to_json(tm.normalizer)},
          {"history", tm.history},
          {"train_indices", tm.split.train},
          {"test_indices", tm.split.test}};
}

inline void save_trained(const TrainedModel& tm, const std::filesystem::path& param_path,
                         const std::filesystem::path& sidecar_path) {
  nn::save_parameters(param_path.string(), tm.model.parameters());
  std::ofstream out(sidecar_path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + sidecar_path.string());
  out << sidecar_json(tm).dump(2) << '\n';
}

inline TrainedModel load_trained(const std::filesystem::path& param_path, const std::filesystem::path& sidecar_path) {
  std::ifstream in(sidecar_path);
  if (!in) throw Error(Errc::MissingFile, sidecar_path.string());
  try {
    nlohmann::json j;
    in >> j;
    const ModelSpec spec = spec_from_json(j.at("spec"));
    Model model(spec, 0);
    model.set_parameters(nn::load_parameters(param_path.string()));
    TrainedModel tm{std::move(model),
                    normalizer_from_json(j.at("normalizer")),
                    LabelCodec::from_ordered(j.at("labels").get<std::vector<std::string>>()),
                    j.at("history").get<std::vector<double>>(),
                    j.at("seed").get<std::uint64_t>(),
                    {j.at("train_indices").get<std::vector<std::size_t>>(),
                     j.at("test_indices").get<std::vector<std::size_t>>()}};
    return tm;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaMismatch, sidecar_path.string() + ": " + e.what());
  }
}

}  // namespace seqdevid::models
