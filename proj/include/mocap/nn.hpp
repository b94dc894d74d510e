#pragma once

#include "mocap/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace mocap {
namespace nn {

enum class Activation { Relu, Linear };

inline double apply_act(Activation a, double v) {
  return a == Activation::Relu ? std::max(0.0, v) : v;
}

inline double act_deriv(Activation a, double pre) {
  return a == Activation::Relu ? (pre > 0 ? 1.0 : 0.0) : 1.0;
}

/// All trainable parameters. Hidden weights double as the tied autoencoder:
/// the encoder applies W_l^T, the decoder re-uses the same W_l in reverse;
/// there is no decoder-only storage. U and the output bias belong to the
/// classification head only.
struct NetworkParams {
  std::vector<MatX> hidden_weights;          // W_l: (size_{l-1} x size_l)
  std::vector<VecX> hidden_biases;
  std::vector<Activation> hidden_activations;
  MatX output_weights;                       // U: (size_L x q)
  VecX output_bias;

  int num_layers() const { return static_cast<int>(hidden_weights.size()); }
  int input_dim() const { return static_cast<int>(hidden_weights.front().rows()); }
  int num_classes() const { return static_cast<int>(output_weights.cols()); }

  void validate() const {
    if (hidden_weights.empty()) throw std::invalid_argument("network needs >= 1 hidden layer");
    for (int l = 1; l < num_layers(); ++l)
      if (hidden_weights[l].rows() != hidden_weights[l - 1].cols())
        throw std::invalid_argument("hidden layer dimensions do not chain");
    if (output_weights.rows() != hidden_weights.back().cols())
      throw std::invalid_argument("output weights do not chain");
    if (output_weights.cols() < 1) throw std::invalid_argument("need q >= 1 outputs");
  }
};

/// Gradient (or optimizer accumulator) with the same shape as the params.
struct ParamTensors {
  std::vector<MatX> hidden_weights;
  std::vector<VecX> hidden_biases;
  MatX output_weights;
  VecX output_bias;

  static ParamTensors zeros_like(const NetworkParams& p) {
    ParamTensors t;
    for (const MatX& w : p.hidden_weights) t.hidden_weights.push_back(MatX::Zero(w.rows(), w.cols()));
    for (const VecX& b : p.hidden_biases) t.hidden_biases.push_back(VecX::Zero(b.size()));
    t.output_weights = MatX::Zero(p.output_weights.rows(), p.output_weights.cols());
    t.output_bias = VecX::Zero(p.output_bias.size());
    return t;
  }
};

struct ForwardPass {
  std::vector<VecX> pre;   // per hidden layer, before the nonlinearity
  std::vector<VecX> act;   // per hidden layer, after
  VecX logits;
  VecX output;             // sigmoid(logits), each component in (0,1)
};

inline ForwardPass forward(const NetworkParams& p, const VecX& x) {
  ForwardPass f;
  const int L = p.num_layers();
  f.pre.resize(L);
  f.act.resize(L);
  const VecX* prev = &x;
  for (int l = 0; l < L; ++l) {
    f.pre[l].noalias() = p.hidden_weights[l].transpose() * (*prev);
    f.pre[l] += p.hidden_biases[l];
    f.act[l] = f.pre[l].unaryExpr(
        [a = p.hidden_activations[l]](double v) { return apply_act(a, v); });
    prev = &f.act[l];
  }
  f.logits.noalias() = p.output_weights.transpose() * (*prev);
  f.logits += p.output_bias;
  f.output = f.logits.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  if (!f.output.allFinite()) throw std::runtime_error("forward: non-finite network output");
  return f;
}

/// Encoder half of the tied autoencoder: the hidden stack without U.
inline VecX encode(const NetworkParams& p, const VecX& x) {
  VecX s = x;
  for (int l = 0; l < p.num_layers(); ++l) {
    VecX pre = p.hidden_weights[l].transpose() * s + p.hidden_biases[l];
    s = pre.unaryExpr([a = p.hidden_activations[l]](double v) { return apply_act(a, v); });
  }
  return s;
}

/// Tied decoder: W_l applied in reverse order, rectified at intermediate
/// layers, linear at the reconstruction layer.
inline VecX decode(const NetworkParams& p, const VecX& h) {
  VecX s = h;
  for (int l = p.num_layers() - 1; l >= 0; --l) {
    VecX r = p.hidden_weights[l] * s;
    s = l > 0 ? VecX(r.cwiseMax(0.0)) : r;
  }
  return s;
}

struct LabeledFrameDataset {
  std::vector<VecX> inputs;
  std::vector<int> labels;        // class index per frame
  std::vector<int> sequence_ids;  // frames of one sequence share an id
  int num_classes = 0;

  std::size_t size() const { return inputs.size(); }

  void validate() const {
    if (inputs.empty()) throw std::invalid_argument("dataset is empty");
    if (labels.size() != inputs.size() || sequence_ids.size() != inputs.size())
      throw std::invalid_argument("dataset column lengths differ");
    for (int y : labels)
      if (y < 0 || y >= num_classes) throw std::invalid_argument("label out of range");
  }
};

/// Bernoulli log-likelihood over all outputs, <= 0; probabilities are
/// clipped to [1e-12, 1-1e-12] so it stays finite.
inline double loss_supervised(const NetworkParams& p, const std::vector<VecX>& inputs,
                              const std::vector<int>& labels) {
  double ll = 0;
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const VecX u = forward(p, inputs[n]).output;
    for (int j = 0; j < u.size(); ++j) {
      const double uj = clip_prob(u[j]);
      ll += labels[n] == j ? std::log(uj) : std::log(1.0 - uj);
    }
  }
  return ll;
}

/// Negative squared reconstruction error through the tied autoencoder, <= 0.
inline double loss_unsupervised(const NetworkParams& p, const std::vector<VecX>& inputs) {
  double ll = 0;
  for (const VecX& x : inputs) ll -= 0.5 * (x - decode(p, encode(p, x))).squaredNorm();
  return ll;
}

inline double loss_hybrid(const NetworkParams& p, const std::vector<VecX>& inputs,
                          const std::vector<int>& labels, double lambda,
                          const std::vector<VecX>* unlabeled = nullptr) {
  if (lambda < 0 || lambda > 1) throw std::invalid_argument("lambda must be in [0,1]");
  double l = (1.0 - lambda) * loss_supervised(p, inputs, labels);
  if (lambda > 0) {
    double lu = loss_unsupervised(p, inputs);
    if (unlabeled && !unlabeled->empty()) lu += loss_unsupervised(p, *unlabeled);
    l += lambda * lu;
  }
  return l;
}

namespace detail {

/// Adds the reconstruction term's gradient for one input with weight w.
/// Both the decoder pass (W_l used forward) and the encoder pass
/// (W_l^T used, with biases) contribute to each W_l.
inline void accumulate_unsup(const NetworkParams& p, const VecX& x, double w, ParamTensors& g) {
  const int L = p.num_layers();

  // encoder pass, keeping pre-activations
  std::vector<VecX> pre(L), act(L);
  const VecX* prev = &x;
  for (int l = 0; l < L; ++l) {
    pre[l].noalias() = p.hidden_weights[l].transpose() * (*prev);
    pre[l] += p.hidden_biases[l];
    act[l] = pre[l].unaryExpr([a = p.hidden_activations[l]](double v) { return apply_act(a, v); });
    prev = &act[l];
  }

  // decoder pass: s[l] feeds W_{l} (0-based), s[L] = h
  std::vector<VecX> s(L + 1);
  s[L] = act[L - 1];
  for (int l = L - 1; l >= 0; --l) {
    VecX r = p.hidden_weights[l] * s[l + 1];
    s[l] = l > 0 ? VecX(r.cwiseMax(0.0)) : r;
  }

  // walk back up the decoder
  VecX e = w * (x - s[0]);  // d/d(reconstruction), final layer linear
  for (int l = 0; l < L; ++l) {
    g.hidden_weights[l].noalias() += e * s[l + 1].transpose();
    VecX back = p.hidden_weights[l].transpose() * e;
    if (l + 1 < L) {
      // s[l+1] = relu(W_{l+1} s[l+2])
      e = back.cwiseProduct(
          (p.hidden_weights[l + 1] * s[l + 2]).unaryExpr([](double v) { return v > 0 ? 1.0 : 0.0; }));
    } else {
      e = back;  // gradient w.r.t. the code h
    }
  }

  // continue into the encoder from the code
  VecX delta = e.cwiseProduct(pre[L - 1].unaryExpr(
      [a = p.hidden_activations[L - 1]](double v) { return act_deriv(a, v); }));
  for (int l = L - 1; l >= 0; --l) {
    const VecX& below = l > 0 ? act[l - 1] : x;
    g.hidden_weights[l].noalias() += below * delta.transpose();
    g.hidden_biases[l] += delta;
    if (l > 0) {
      VecX back = p.hidden_weights[l] * delta;
      delta = back.cwiseProduct(pre[l - 1].unaryExpr(
          [a = p.hidden_activations[l - 1]](double v) { return act_deriv(a, v); }));
    }
  }
}

inline VecX pre_deriv(const NetworkParams& p, const ForwardPass& f, int l) {
  return f.pre[l].unaryExpr(
      [a = p.hidden_activations[l]](double v) { return act_deriv(a, v); });
}

inline void accumulate_sup(const NetworkParams& p, const VecX& x, int label, double w,
                           ParamTensors& g) {
  const ForwardPass f = forward(p, x);
  const int L = p.num_layers();
  const int q = p.num_classes();

  VecX delta_out(q);
  for (int j = 0; j < q; ++j) delta_out[j] = w * ((label == j ? 1.0 : 0.0) - f.output[j]);

  g.output_weights.noalias() += f.act[L - 1] * delta_out.transpose();
  g.output_bias += delta_out;

  VecX back = p.output_weights * delta_out;
  for (int l = L - 1; l >= 0; --l) {
    VecX delta = back.cwiseProduct(pre_deriv(p, f, l));
    const VecX& below = l > 0 ? f.act[l - 1] : x;
    g.hidden_weights[l].noalias() += below * delta.transpose();
    g.hidden_biases[l] += delta;
    if (l > 0) back.noalias() = p.hidden_weights[l] * delta;
  }
}

}  // namespace detail

/// Exact ascent gradient of (1-lambda) L_sup + lambda L_unsup.
/// U only ever receives the supervised term.
inline ParamTensors gradients(const NetworkParams& p, const std::vector<VecX>& inputs,
                              const std::vector<int>& labels, double lambda,
                              const std::vector<VecX>* unlabeled = nullptr) {
  if (lambda < 0 || lambda > 1) throw std::invalid_argument("lambda must be in [0,1]");
  ParamTensors g = ParamTensors::zeros_like(p);
  if (lambda < 1)
    for (std::size_t n = 0; n < inputs.size(); ++n)
      detail::accumulate_sup(p, inputs[n], labels[n], 1.0 - lambda, g);
  if (lambda > 0) {
    for (const VecX& x : inputs) detail::accumulate_unsup(p, x, lambda, g);
    if (unlabeled)
      for (const VecX& x : *unlabeled) detail::accumulate_unsup(p, x, lambda, g);
  }
  return g;
}

struct AdadeltaState {
  ParamTensors sq_grad;    // E[g^2]
  ParamTensors sq_update;  // E[dx^2]

  static AdadeltaState zeros_like(const NetworkParams& p) {
    return {ParamTensors::zeros_like(p), ParamTensors::zeros_like(p)};
  }
};

namespace detail {

template <typename T>
void adadelta_apply(T& param, const T& grad, T& eg, T& ex, double rho, double eps) {
  eg.array() = rho * eg.array() + (1 - rho) * grad.array().square();
  T delta = ((ex.array() + eps).sqrt() / (eg.array() + eps).sqrt() * grad.array()).matrix();
  ex.array() = rho * ex.array() + (1 - rho) * delta.array().square();
  param += delta;
}

}  // namespace detail

/// One ADADELTA ascent step: per parameter,
///   E[g^2] <- rho E[g^2] + (1-rho) g^2
///   dx      = sqrt(E[dx^2]+eps)/sqrt(E[g^2]+eps) * g
///   E[dx^2] <- rho E[dx^2] + (1-rho) dx^2
///   param  += dx
inline void adadelta_step(NetworkParams& p, const ParamTensors& g, AdadeltaState& state,
                          double rho, double eps) {
  for (int l = 0; l < p.num_layers(); ++l) {
    detail::adadelta_apply(p.hidden_weights[l], g.hidden_weights[l], state.sq_grad.hidden_weights[l],
                           state.sq_update.hidden_weights[l], rho, eps);
    detail::adadelta_apply(p.hidden_biases[l], g.hidden_biases[l], state.sq_grad.hidden_biases[l],
                           state.sq_update.hidden_biases[l], rho, eps);
  }
  detail::adadelta_apply(p.output_weights, g.output_weights, state.sq_grad.output_weights,
                         state.sq_update.output_weights, rho, eps);
  detail::adadelta_apply(p.output_bias, g.output_bias, state.sq_grad.output_bias,
                         state.sq_update.output_bias, rho, eps);
}

struct TrainConfig {
  double lambda = 0.1;
  int epochs = 100;
  int minibatch_size = 128;
  double adadelta_rho = 0.95;
  double adadelta_epsilon = 1e-6;
  std::uint64_t seed = 0;
  std::vector<VecX> unlabeled;  // extra reconstruction-only samples
  bool log_epochs = true;

  void validate() const {
    if (lambda < 0 || lambda > 1) throw std::invalid_argument("lambda must be in [0,1]");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (minibatch_size < 1) throw std::invalid_argument("minibatch_size must be >= 1");
    if (adadelta_rho <= 0 || adadelta_rho >= 1)
      throw std::invalid_argument("adadelta_rho must be in (0,1)");
    if (adadelta_epsilon <= 0) throw std::invalid_argument("adadelta_epsilon must be > 0");
  }
};

struct EpochLog {
  double l_sup = 0;
  double l_unsup = 0;
  double l_hybrid = 0;
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochLog> log;
};

/// Glorot-uniform initialization from the given seed; biases start at zero.
inline NetworkParams init_params(int input_dim, const std::vector<int>& hidden_sizes,
                                 int num_classes, std::uint64_t seed,
                                 bool linear_last_hidden = false) {
  if (hidden_sizes.empty()) throw std::invalid_argument("need at least one hidden layer");
  std::mt19937_64 rng(seed);
  auto glorot = [&rng](int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    MatX m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = u(rng);
    return m;
  };

  NetworkParams p;
  int prev = input_dim;
  for (std::size_t l = 0; l < hidden_sizes.size(); ++l) {
    p.hidden_weights.push_back(glorot(prev, hidden_sizes[l]));
    p.hidden_biases.push_back(VecX::Zero(hidden_sizes[l]));
    const bool last = l + 1 == hidden_sizes.size();
    p.hidden_activations.push_back(last && linear_last_hidden ? Activation::Linear
                                                              : Activation::Relu);
    prev = hidden_sizes[l];
  }
  p.output_weights = glorot(prev, num_classes);
  p.output_bias = VecX::Zero(num_classes);
  p.validate();
  return p;
}

/// Minibatch ADADELTA training of the hybrid objective. Deterministic for a
/// fixed seed: shuffling, initialization and the gradient reduction order
/// are all tied to the seeded stream.
inline TrainResult train(const LabeledFrameDataset& dataset, const std::vector<int>& hidden_sizes,
                         const TrainConfig& config, bool linear_last_hidden = false) {
  dataset.validate();
  config.validate();

  TrainResult result;
  result.params = init_params(static_cast<int>(dataset.inputs.front().size()), hidden_sizes,
                              dataset.num_classes, config.seed, linear_last_hidden);
  AdadeltaState state = AdadeltaState::zeros_like(result.params);
  std::mt19937_64 rng(config.seed + 0x9e3779b97f4a7c15ull);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t unlabeled_cursor = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.minibatch_size) {
      const std::size_t end = std::min(order.size(), start + config.minibatch_size);
      std::vector<VecX> bx;
      std::vector<int> by;
      bx.reserve(end - start);
      by.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(dataset.inputs[order[i]]);
        by.push_back(dataset.labels[order[i]]);
      }
      std::vector<VecX> bu;
      if (!config.unlabeled.empty() && config.lambda > 0) {
        for (std::size_t i = 0; i < bx.size(); ++i) {
          bu.push_back(config.unlabeled[unlabeled_cursor]);
          unlabeled_cursor = (unlabeled_cursor + 1) % config.unlabeled.size();
        }
      }
      ParamTensors g = gradients(result.params, bx, by, config.lambda, bu.empty() ? nullptr : &bu);
      adadelta_step(result.params, g, state, config.adadelta_rho, config.adadelta_epsilon);
    }
    if (config.log_epochs) {
      EpochLog log;
      log.l_sup = loss_supervised(result.params, dataset.inputs, dataset.labels);
      log.l_unsup = loss_unsupervised(result.params, dataset.inputs);
      log.l_hybrid = (1 - config.lambda) * log.l_sup + config.lambda * log.l_unsup;
      if (!std::isfinite(log.l_hybrid))
        throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch + 1));
      result.log.push_back(log);
    }
  }
  return result;
}

}  // namespace nn
}  // namespace mocap
