#pragma once

#include "mocap/features.hpp"
#include "mocap/nn.hpp"

#include <json.hpp>

#include <istream>
#include <optional>
#include <ostream>

namespace mocap {

/// Self-describing trained model: weights, architecture, the feature recipe
/// that produced its inputs, and the resolved run configuration.
struct ModelArtifact {
  nn::NetworkParams params;
  std::vector<std::string> class_names;
  FeatureConfig feature_config;
  std::optional<PoseFrame> template_frame;  // for needs-alignment data
  std::vector<nn::EpochLog> training_log;
  nlohmann::json run_config;  // resolved CLI/config values, incl. seed
};

namespace detail {

inline nlohmann::json matrix_to_json(const MatX& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = std::move(data);
  return j;
}

inline MatX matrix_from_json(const nlohmann::json& j) {
  MatX m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[i++].get<double>();
  return m;
}

inline nlohmann::json vector_to_json(const VecX& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

inline VecX vector_from_json(const nlohmann::json& j) {
  VecX v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace detail

inline void save_model(std::ostream& out, const ModelArtifact& m) {
  nlohmann::json j;
  j["format"] = "mocap-model";
  j["version"] = 1;

  nlohmann::json net;
  net["hidden_weights"] = nlohmann::json::array();
  net["hidden_biases"] = nlohmann::json::array();
  net["hidden_activations"] = nlohmann::json::array();
  for (int l = 0; l < m.params.num_layers(); ++l) {
    net["hidden_weights"].push_back(detail::matrix_to_json(m.params.hidden_weights[l]));
    net["hidden_biases"].push_back(detail::vector_to_json(m.params.hidden_biases[l]));
    net["hidden_activations"].push_back(
        m.params.hidden_activations[l] == nn::Activation::Relu ? "relu" : "linear");
  }
  net["output_weights"] = detail::matrix_to_json(m.params.output_weights);
  net["output_bias"] = detail::vector_to_json(m.params.output_bias);
  j["network"] = std::move(net);

  j["class_names"] = m.class_names;
  j["features"] = {{"po_joints", m.feature_config.po_joints},
                   {"td_offset_seconds", m.feature_config.td_offset_seconds},
                   {"include_nt", m.feature_config.include_nt}};
  if (m.template_frame) {
    nlohmann::json tf = nlohmann::json::array();
    for (const Vec3& p : m.template_frame->joint_positions) tf.push_back({p.x(), p.y(), p.z()});
    j["template_frame"] = std::move(tf);
  }
  nlohmann::json log = nlohmann::json::array();
  for (const nn::EpochLog& e : m.training_log)
    log.push_back({{"l_sup", e.l_sup}, {"l_unsup", e.l_unsup}, {"l_hybrid", e.l_hybrid}});
  j["training_log"] = std::move(log);
  j["config"] = m.run_config;
  out << j.dump(2) << "\n";
}

inline ModelArtifact load_model(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  if (j.value("format", "") != "mocap-model") throw ParseError("not a mocap model file");

  ModelArtifact m;
  const auto& net = j.at("network");
  for (const auto& w : net.at("hidden_weights"))
    m.params.hidden_weights.push_back(detail::matrix_from_json(w));
  for (const auto& b : net.at("hidden_biases"))
    m.params.hidden_biases.push_back(detail::vector_from_json(b));
  for (const auto& a : net.at("hidden_activations"))
    m.params.hidden_activations.push_back(a.get<std::string>() == "linear" ? nn::Activation::Linear
                                                                           : nn::Activation::Relu);
  m.params.output_weights = detail::matrix_from_json(net.at("output_weights"));
  m.params.output_bias = detail::vector_from_json(net.at("output_bias"));
  m.params.validate();

  m.class_names = j.value("class_names", std::vector<std::string>{});
  if (j.contains("features")) {
    const auto& f = j.at("features");
    m.feature_config.po_joints = f.value("po_joints", m.feature_config.po_joints);
    m.feature_config.td_offset_seconds =
        f.value("td_offset_seconds", m.feature_config.td_offset_seconds);
    m.feature_config.include_nt = f.value("include_nt", m.feature_config.include_nt);
  }
  if (j.contains("template_frame")) {
    PoseFrame tf;
    for (const auto& p : j.at("template_frame"))
      tf.joint_positions.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    if (!tf.joint_positions.empty()) tf.root_position = tf.joint_positions.front();
    m.template_frame = std::move(tf);
  }
  for (const auto& e : j.value("training_log", nlohmann::json::array()))
    m.training_log.push_back({e.value("l_sup", 0.0), e.value("l_unsup", 0.0),
                              e.value("l_hybrid", 0.0)});
  m.run_config = j.value("config", nlohmann::json());
  return m;
}

}  // namespace mocap
