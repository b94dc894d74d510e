#pragma once

#include "mocap/features.hpp"
#include "mocap/nn.hpp"

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace mocap {

using Vec2 = Eigen::Vector2d;

struct EmbeddedSequence {
  std::string label;
  std::string source_id;
  std::vector<Vec2> points;  // one per frame, in order
};

using Embedding = std::vector<EmbeddedSequence>;

/// Autoencoder used for 2-D visualization: rectified hidden stack with a
/// 2-unit linear bottleneck, trained on reconstruction only (no labels).
struct VizAutoencoder {
  nn::NetworkParams params;
};

inline VizAutoencoder train_viz_autoencoder(const std::vector<VecX>& features,
                                            const std::vector<int>& hidden_sizes,
                                            const nn::TrainConfig& base_config) {
  if (features.empty()) throw std::invalid_argument("train_viz_autoencoder: no features");
  if (hidden_sizes.empty() || hidden_sizes.back() != 2)
    throw std::invalid_argument("train_viz_autoencoder: architecture must end in a 2-unit layer");

  nn::LabeledFrameDataset data;
  data.inputs = features;
  data.labels.assign(features.size(), 0);
  data.sequence_ids.assign(features.size(), 0);
  data.num_classes = 1;  // unused at lambda = 1

  nn::TrainConfig config = base_config;
  config.lambda = 1.0;

  VizAutoencoder ae;
  if (config.epochs == 0) {
    ae.params = nn::init_params(static_cast<int>(features.front().size()), hidden_sizes, 1,
                                config.seed, /*linear_last_hidden=*/true);
  } else {
    ae.params = nn::train(data, hidden_sizes, config, /*linear_last_hidden=*/true).params;
  }
  return ae;
}

inline Embedding embed_2d(const VizAutoencoder& model,
                          const std::vector<FeatureSequence>& sequences) {
  Embedding out;
  for (const FeatureSequence& s : sequences) {
    EmbeddedSequence e;
    e.label = s.label;
    e.source_id = s.source_id;
    for (const VecX& f : s.frames) {
      const VecX h = nn::encode(model.params, f);
      e.points.emplace_back(h[0], h[1]);
    }
    out.push_back(std::move(e));
  }
  return out;
}

struct PcaModel {
  VecX mean;
  MatX components;  // (dim x 2), orthonormal columns, leading variance first
  Vec2 eigenvalues;
};

/// Mean-centered covariance eigendecomposition, keeping the two leading
/// components.
inline PcaModel pca_fit(const std::vector<VecX>& frames) {
  if (frames.size() < 2) throw std::invalid_argument("pca_fit: need >= 2 samples");
  const Eigen::Index d = frames.front().size();
  if (d < 2) throw std::invalid_argument("pca_fit: need dimension >= 2");

  PcaModel m;
  m.mean = VecX::Zero(d);
  for (const VecX& f : frames) m.mean += f;
  m.mean /= static_cast<double>(frames.size());

  MatX cov = MatX::Zero(d, d);
  for (const VecX& f : frames) {
    const VecX c = f - m.mean;
    cov.noalias() += c * c.transpose();
  }
  cov /= static_cast<double>(frames.size() - 1);

  if (cov.trace() < 1e-14)
    throw std::invalid_argument("pca_fit: degenerate input (all samples identical)");

  Eigen::SelfAdjointEigenSolver<MatX> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigensolver failed");
  // SelfAdjointEigenSolver sorts ascending
  m.components.resize(d, 2);
  m.components.col(0) = eig.eigenvectors().col(d - 1);
  m.components.col(1) = eig.eigenvectors().col(d - 2);
  m.eigenvalues = Vec2(eig.eigenvalues()(d - 1), eig.eigenvalues()(d - 2));
  return m;
}

inline Embedding pca_project(const PcaModel& model, const std::vector<FeatureSequence>& sequences) {
  Embedding out;
  for (const FeatureSequence& s : sequences) {
    EmbeddedSequence e;
    e.label = s.label;
    e.source_id = s.source_id;
    for (const VecX& f : s.frames) {
      const Vec2 p = model.components.transpose() * (f - model.mean);
      e.points.push_back(p);
    }
    out.push_back(std::move(e));
  }
  return out;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> colors = {"#1f77b4", "#9467bd", "#d62728", "#2ca02c",
                                                  "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
                                                  "#bcbd22", "#17becf"};
  return colors;
}

}  // namespace detail

inline void emit_points_csv(const Embedding& embeddings, std::ostream& out) {
  out << "source_id,label,frame,x,y\n";
  for (const EmbeddedSequence& s : embeddings) {
    for (std::size_t i = 0; i < s.points.size(); ++i)
      out << s.source_id << "," << s.label << "," << i + 1 << "," << detail::fmt(s.points[i].x())
          << "," << detail::fmt(s.points[i].y()) << "\n";
  }
}

/// Per-sequence trajectory plot: one arrow per consecutive frame pair,
/// color-keyed by label, with a legend. Byte-identical for identical input.
inline void emit_trajectory_svg(const Embedding& embeddings, std::ostream& out) {
  if (embeddings.empty()) throw std::invalid_argument("emit_trajectory_svg: no embeddings");

  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (const EmbeddedSequence& s : embeddings) {
    for (const Vec2& p : s.points) {
      min_x = std::min(min_x, p.x());
      max_x = std::max(max_x, p.x());
      min_y = std::min(min_y, p.y());
      max_y = std::max(max_y, p.y());
    }
  }
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  const double w = 720, h = 720, margin = 40;
  auto sx = [&](double x) { return margin + (x - min_x) / span_x * (w - 2 * margin); };
  auto sy = [&](double y) { return h - margin - (y - min_y) / span_y * (h - 2 * margin); };

  std::vector<std::string> labels;
  for (const EmbeddedSequence& s : embeddings)
    if (std::find(labels.begin(), labels.end(), s.label) == labels.end()) labels.push_back(s.label);
  auto color_of = [&](const std::string& label) {
    const auto it = std::find(labels.begin(), labels.end(), label);
    return detail::palette()[(it - labels.begin()) % detail::palette().size()];
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  out << "<defs>\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << "<marker id=\"arrow" << i
        << "\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"5\" markerHeight=\"5\" "
           "orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\""
        << color_of(labels[i]) << "\"/></marker>\n";
  }
  out << "</defs>\n<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";

  for (const EmbeddedSequence& s : embeddings) {
    const std::string color = color_of(s.label);
    const auto marker =
        std::find(labels.begin(), labels.end(), s.label) - labels.begin();
    for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
      out << "<line x1=\"" << detail::fmt(sx(s.points[i].x())) << "\" y1=\""
          << detail::fmt(sy(s.points[i].y())) << "\" x2=\"" << detail::fmt(sx(s.points[i + 1].x()))
          << "\" y2=\"" << detail::fmt(sy(s.points[i + 1].y())) << "\" stroke=\"" << color
          << "\" stroke-width=\"1\" marker-end=\"url(#arrow" << marker << ")\"/>\n";
    }
  }

  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double ly = margin / 2.0 + 16.0 * i;
    out << "<rect x=\"" << margin << "\" y=\"" << detail::fmt(ly - 8) << "\" width=\"10\" "
        << "height=\"10\" fill=\"" << color_of(labels[i]) << "\"/>\n";
    out << "<text x=\"" << margin + 14 << "\" y=\"" << detail::fmt(ly + 1)
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << labels[i] << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace mocap
