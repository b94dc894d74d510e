#pragma once

#include "mocap/classify.hpp"
#include "mocap/features.hpp"

#include <functional>
#include <map>
#include <sstream>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace mocap {

/// Raw motion-class name -> merged action name.
struct ClassMergeMap {
  std::map<std::string, std::string> rules;

  std::size_t merged_count() const {
    std::set<std::string> merged;
    for (const auto& [raw, m] : rules) merged.insert(m);
    return merged.size();
  }
};

/// Reads lines of the form `rawName -> mergedName`.
inline ClassMergeMap load_merge_map(std::istream& in) {
  ClassMergeMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    std::string raw, arrow, merged;
    if (!(ls >> raw)) continue;
    if (!(ls >> arrow >> merged) || arrow != "->")
      throw ParseError("line " + std::to_string(line_no) + ": expected `raw -> merged`");
    if (map.rules.count(raw))
      throw ParseError("line " + std::to_string(line_no) + ": duplicate rule for '" + raw + "'");
    map.rules[raw] = merged;
  }
  return map;
}

inline std::vector<std::string> merge_classes(const std::vector<std::string>& labels,
                                              const ClassMergeMap& map) {
  std::vector<std::string> missing;
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (const std::string& l : labels) {
    auto it = map.rules.find(l);
    if (it == map.rules.end()) {
      missing.push_back(l);
      continue;
    }
    out.push_back(it->second);
  }
  if (!missing.empty()) {
    std::string msg = "merge_classes: unmapped labels:";
    std::set<std::string> uniq(missing.begin(), missing.end());
    for (const std::string& m : uniq) msg += " " + m;
    throw std::invalid_argument(msg);
  }
  return out;
}

struct FoldAssignment {
  int k = 0;
  std::vector<int> assignment;  // sequence index -> fold
  std::uint64_t seed = 0;
};

/// Class-stratified folds: within each class, sequences are shuffled and
/// dealt round-robin. A cursor carries across classes so fold sizes stay
/// balanced overall.
inline FoldAssignment stratified_kfold(const std::vector<std::string>& labels, int k,
                                       std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  fa.assignment.assign(labels.size(), -1);

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  std::mt19937_64 rng(seed);
  int cursor = 0;
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) {
      fa.assignment[i] = cursor % k;
      ++cursor;
    }
  }
  return fa;
}

struct EvalReport {
  std::vector<double> fold_frame_accuracy;
  std::vector<double> fold_sequence_accuracy;
  double mean_frame_accuracy = 0;
  double std_frame_accuracy = 0;
  double mean_sequence_accuracy = 0;
  double std_sequence_accuracy = 0;
  std::vector<std::string> class_names;
  MatX confusion;  // rows = truth, cols = predicted, sequence level
  std::string config_fingerprint;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1))};  // sample standard deviation
}

}  // namespace detail

/// Flattens labeled feature sequences into a per-frame training set.
/// Class indices follow the sorted order of the distinct labels.
struct FrameDataset {
  nn::LabeledFrameDataset data;
  std::vector<std::string> class_names;
};

inline FrameDataset make_frame_dataset(const std::vector<FeatureSequence>& sequences) {
  FrameDataset out;
  std::set<std::string> class_set;
  for (const FeatureSequence& s : sequences) class_set.insert(s.label);
  out.class_names.assign(class_set.begin(), class_set.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < out.class_names.size(); ++i)
    index[out.class_names[i]] = static_cast<int>(i);
  out.data.num_classes = static_cast<int>(out.class_names.size());
  for (std::size_t si = 0; si < sequences.size(); ++si) {
    const int y = index[sequences[si].label];
    for (const VecX& f : sequences[si].frames) {
      out.data.inputs.push_back(f);
      out.data.labels.push_back(y);
      out.data.sequence_ids.push_back(static_cast<int>(si));
    }
  }
  return out;
}

/// A trained frame-level classifier: features in, posterior matrix out.
using FramePredictor = std::function<PosteriorMatrix(const std::vector<VecX>&)>;
using Trainer = std::function<FramePredictor(const nn::LabeledFrameDataset&)>;

inline Trainer mlp_trainer(std::vector<int> hidden_sizes, nn::TrainConfig config) {
  return [hidden_sizes = std::move(hidden_sizes), config](const nn::LabeledFrameDataset& data) {
    nn::NetworkParams params = nn::train(data, hidden_sizes, config).params;
    return FramePredictor([params = std::move(params)](const std::vector<VecX>& frames) {
      return frame_posteriors(params, frames);
    });
  };
}

/// k-fold cross validation over sequences (frames of one sequence never
/// straddle the train/test split). Reports per-fold frame and sequence
/// accuracy, their mean and sample standard deviation, and the pooled
/// sequence-level confusion matrix.
inline EvalReport run_cv(const std::vector<FeatureSequence>& sequences, int k, std::uint64_t seed,
                         const Trainer& trainer, std::string config_fingerprint = "") {
  if (sequences.empty()) throw std::invalid_argument("run_cv: no sequences");

  std::vector<std::string> labels;
  for (const FeatureSequence& s : sequences) labels.push_back(s.label);

  std::set<std::string> class_set(labels.begin(), labels.end());
  std::vector<std::string> class_names(class_set.begin(), class_set.end());
  std::map<std::string, int> class_index;
  for (std::size_t i = 0; i < class_names.size(); ++i) class_index[class_names[i]] = static_cast<int>(i);
  const int q = static_cast<int>(class_names.size());

  const FoldAssignment folds = stratified_kfold(labels, k, seed);

  EvalReport report;
  report.class_names = class_names;
  report.confusion = MatX::Zero(q, q);
  report.config_fingerprint = std::move(config_fingerprint);

  for (int fold = 0; fold < k; ++fold) {
    nn::LabeledFrameDataset train_data;
    train_data.num_classes = q;
    for (std::size_t si = 0; si < sequences.size(); ++si) {
      if (folds.assignment[si] == fold) continue;
      const int y = class_index[labels[si]];
      for (const VecX& f : sequences[si].frames) {
        train_data.inputs.push_back(f);
        train_data.labels.push_back(y);
        train_data.sequence_ids.push_back(static_cast<int>(si));
      }
    }
    const FramePredictor predict = trainer(train_data);

    std::size_t frames_total = 0, frames_correct = 0, seqs_total = 0, seqs_correct = 0;
    for (std::size_t si = 0; si < sequences.size(); ++si) {
      if (folds.assignment[si] != fold) continue;
      const int truth = class_index[labels[si]];
      const PosteriorMatrix post = predict(sequences[si].frames);
      for (Eigen::Index i = 0; i < post.rows(); ++i) {
        Eigen::Index best = 0;
        post.row(i).maxCoeff(&best);
        ++frames_total;
        if (static_cast<int>(best) == truth) ++frames_correct;
      }
      const int decided = classify_sequence(post).first;
      ++seqs_total;
      if (decided == truth) ++seqs_correct;
      report.confusion(truth, decided) += 1.0;
    }
    if (seqs_total == 0) continue;  // fold received no sequences
    report.fold_frame_accuracy.push_back(static_cast<double>(frames_correct) / frames_total);
    report.fold_sequence_accuracy.push_back(static_cast<double>(seqs_correct) / seqs_total);
  }

  std::tie(report.mean_frame_accuracy, report.std_frame_accuracy) =
      detail::mean_std(report.fold_frame_accuracy);
  std::tie(report.mean_sequence_accuracy, report.std_sequence_accuracy) =
      detail::mean_std(report.fold_sequence_accuracy);
  return report;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["fold_frame_accuracy"] = r.fold_frame_accuracy;
  j["fold_sequence_accuracy"] = r.fold_sequence_accuracy;
  j["mean_frame_accuracy"] = r.mean_frame_accuracy;
  j["std_frame_accuracy"] = r.std_frame_accuracy;
  j["mean_sequence_accuracy"] = r.mean_sequence_accuracy;
  j["std_sequence_accuracy"] = r.std_sequence_accuracy;
  j["class_names"] = r.class_names;
  j["config_fingerprint"] = r.config_fingerprint;
  nlohmann::json conf = nlohmann::json::array();
  for (Eigen::Index row = 0; row < r.confusion.rows(); ++row) {
    nlohmann::json jr = nlohmann::json::array();
    for (Eigen::Index col = 0; col < r.confusion.cols(); ++col) jr.push_back(r.confusion(row, col));
    conf.push_back(std::move(jr));
  }
  j["confusion"] = std::move(conf);
  return j;
}

inline void confusion_to_csv(const EvalReport& r, std::ostream& out) {
  out << "truth\\predicted";
  for (const std::string& c : r.class_names) out << "," << c;
  out << "\n";
  for (Eigen::Index row = 0; row < r.confusion.rows(); ++row) {
    out << r.class_names[row];
    for (Eigen::Index col = 0; col < r.confusion.cols(); ++col)
      out << "," << static_cast<long long>(r.confusion(row, col));
    out << "\n";
  }
}

}  // namespace mocap
