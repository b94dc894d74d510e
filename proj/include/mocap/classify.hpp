#pragma once

#include "mocap/nn.hpp"

#include <random>
#include <utility>
#include <vector>

namespace mocap {

/// Rows = frames, columns = classes; entries are clipped posteriors in (0,1).
using PosteriorMatrix = MatX;

inline PosteriorMatrix frame_posteriors(const nn::NetworkParams& model,
                                        const std::vector<VecX>& frames) {
  PosteriorMatrix out(frames.size(), model.num_classes());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].size() != model.input_dim())
      throw std::invalid_argument("frame_posteriors: feature dimension mismatch");
    const VecX u = nn::forward(model, frames[i]).output;
    for (int c = 0; c < u.size(); ++c) out(i, c) = clip_prob(u[c]);
  }
  return out;
}

/// Sequence decision: the class maximizing the per-frame log-posterior sum
/// (the product rule evaluated in the log domain; same argmax, no
/// underflow). Ties break toward the lowest class index.
inline std::pair<int, VecX> classify_sequence(const PosteriorMatrix& posteriors) {
  if (posteriors.rows() < 1) throw std::invalid_argument("classify_sequence: empty matrix");
  VecX scores = VecX::Zero(posteriors.cols());
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i)
    for (Eigen::Index c = 0; c < posteriors.cols(); ++c) scores[c] += std::log(posteriors(i, c));
  int best = 0;
  for (int c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return {best, scores};
}

/// Most frequent label, ties toward the lowest index.
inline int majority_vote(const std::vector<int>& frame_labels) {
  if (frame_labels.empty()) throw std::invalid_argument("majority_vote: empty input");
  int max_label = 0;
  for (int l : frame_labels) max_label = std::max(max_label, l);
  std::vector<int> counts(max_label + 1, 0);
  for (int l : frame_labels) {
    if (l < 0) throw std::invalid_argument("majority_vote: negative label");
    ++counts[l];
  }
  int best = 0;
  for (int c = 1; c <= max_label; ++c)
    if (counts[c] > counts[best]) best = c;
  return best;
}

/// Extreme learning machine: a frozen random sigmoid hidden layer with a
/// ridge-regression readout.
struct ElmModel {
  MatX input_weights;  // (input_dim x hidden)
  VecX input_bias;
  MatX readout;        // (hidden x q)
  double ridge = 1e-3;

  VecX hidden(const VecX& x) const {
    VecX z = input_weights.transpose() * x + input_bias;
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
};

inline ElmModel elm_train(const nn::LabeledFrameDataset& dataset, int hidden, double ridge,
                          std::uint64_t seed) {
  dataset.validate();
  if (hidden < 1) throw std::invalid_argument("elm_train: hidden must be >= 1");
  if (ridge < 0) throw std::invalid_argument("elm_train: ridge must be >= 0");

  const int d = static_cast<int>(dataset.inputs.front().size());
  ElmModel m;
  m.ridge = ridge;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  m.input_weights.resize(d, hidden);
  for (int c = 0; c < hidden; ++c)
    for (int r = 0; r < d; ++r) m.input_weights(r, c) = u(rng);
  m.input_bias.resize(hidden);
  for (int c = 0; c < hidden; ++c) m.input_bias[c] = u(rng);

  const Eigen::Index n = static_cast<Eigen::Index>(dataset.size());
  MatX h(n, hidden);
  for (Eigen::Index i = 0; i < n; ++i) h.row(i) = m.hidden(dataset.inputs[i]).transpose();
  MatX t = MatX::Zero(n, dataset.num_classes);
  for (Eigen::Index i = 0; i < n; ++i) t(i, dataset.labels[i]) = 1.0;

  MatX gram = h.transpose() * h;
  gram.diagonal().array() += ridge;
  Eigen::LDLT<MatX> ldlt(gram);
  if (ldlt.info() != Eigen::Success || (ridge == 0 && ldlt.isNegative()))
    throw std::runtime_error("elm_train: singular system; use ridge > 0");
  m.readout = ldlt.solve(h.transpose() * t);
  if (!m.readout.allFinite()) throw std::runtime_error("elm_train: singular system; use ridge > 0");
  return m;
}

inline std::vector<int> elm_predict(const ElmModel& m, const std::vector<VecX>& frames) {
  std::vector<int> out;
  out.reserve(frames.size());
  for (const VecX& x : frames) {
    const VecX y = m.readout.transpose() * m.hidden(x);
    int best = 0;
    for (int c = 1; c < y.size(); ++c)
      if (y[c] > y[best]) best = c;
    out.push_back(best);
  }
  return out;
}

}  // namespace mocap
