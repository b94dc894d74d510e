#include "mocap/acclaim.hpp"
#include "mocap/classify.hpp"
#include "mocap/embed.hpp"
#include "mocap/eval.hpp"
#include "mocap/features.hpp"
#include "mocap/jsonl.hpp"
#include "mocap/model_io.hpp"
#include "mocap/synth.hpp"
#include "mocap/toml.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using mocap::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

std::vector<int> parse_arch(const std::string& s) {
  std::vector<int> arch;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    arch.push_back(std::stoi(tok));
    if (arch.back() < 1) throw std::runtime_error("layer sizes must be positive: " + s);
  }
  if (arch.empty()) throw std::runtime_error("empty architecture: " + s);
  return arch;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

// Loads either a features JSONL produced by `featurize`, or raw sequences
// (jsonl / asf+amc) that still need featurizing.
std::vector<mocap::MotionSequence> load_sequences(const std::string& in_path,
                                                  const std::string& asf_path,
                                                  const std::string& amc_path, double fps) {
  if (!asf_path.empty()) {
    if (amc_path.empty()) throw std::runtime_error("--asf requires --amc");
    const auto skel = mocap::parse_asf(read_file(asf_path));
    auto seq = mocap::parse_amc(read_file(amc_path), skel, fps);
    seq.source_id = amc_path;
    return {std::move(seq)};
  }
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + in_path);
  return mocap::load_jsonl(in);
}

struct GlobalOpts {
  std::uint64_t seed = 0;
  bool seed_set = false;
};

std::uint64_t effective_seed(const GlobalOpts& g, std::uint64_t stage_seed_value,
                             bool stage_seed_set, const char* stage) {
  if (stage_seed_set) return stage_seed_value;
  return mocap::stage_seed(g.seed, stage);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion-capture gesture recognition pipeline"};
  app.require_subcommand(1);

  GlobalOpts global;
  app.add_option("--seed", global.seed, "Global seed; fans out to per-stage seeds")
      ->each([&](const std::string&) { global.seed_set = true; });

  // ---- parse ----
  auto* cmd_parse = app.add_subcommand("parse", "Parse ASF/AMC into the JSONL interchange format");
  std::string p_asf, p_amc, p_out;
  double p_fps = 120.0;
  cmd_parse->add_option("--asf", p_asf, "ASF skeleton file")->required();
  cmd_parse->add_option("--amc", p_amc, "AMC motion file")->required();
  cmd_parse->add_option("--fps", p_fps, "Frame rate when the file does not state one");
  cmd_parse->add_option("--out", p_out, "Write the sequence as JSONL");

  // ---- synth ----
  auto* cmd_synth = app.add_subcommand("synth", "Generate a labeled synthetic gesture dataset");
  std::string s_config, s_out;
  std::uint64_t s_seed = 0;
  bool s_seed_set = false, s_benchmark = false;
  int s_per_class = 0;
  cmd_synth->add_option("--config", s_config, "TOML synth config");
  cmd_synth->add_flag("--benchmark", s_benchmark, "Use the built-in six-class benchmark recipe");
  cmd_synth->add_option("--sequences-per-class", s_per_class,
                        "Override sequences per class (benchmark mode)");
  cmd_synth->add_option("--synth-seed", s_seed, "Stage seed override")
      ->each([&](const std::string&) { s_seed_set = true; });
  cmd_synth->add_option("--out", s_out, "Output JSONL path")->required();

  // ---- featurize ----
  auto* cmd_feat = app.add_subcommand("featurize", "Extract per-frame [PO | TD | NT] features");
  std::string f_in, f_asf, f_amc, f_joints = "head,lhand,rhand,lfoot,rfoot", f_out;
  double f_td = 0.3, f_fps = 120.0;
  bool f_no_nt = false;
  cmd_feat->add_option("--in", f_in, "Input sequences (JSONL)");
  cmd_feat->add_option("--asf", f_asf, "ASF skeleton file (with --amc)");
  cmd_feat->add_option("--amc", f_amc, "AMC motion file");
  cmd_feat->add_option("--fps", f_fps, "Frame rate for ASF/AMC input");
  cmd_feat->add_option("--joints", f_joints, "Comma-separated PO joints");
  cmd_feat->add_option("--td-seconds", f_td, "Temporal-difference offset in seconds");
  cmd_feat->add_flag("--no-nt", f_no_nt, "Drop the trajectory feature");
  cmd_feat->add_option("--out", f_out, "Output features JSONL")->required();

  // ---- train ----
  auto* cmd_train = app.add_subcommand("train", "Train the hybrid MLP on a feature file");
  std::string t_features, t_arch = "1000,500", t_out, t_unlabeled;
  double t_lambda = 0.1, t_rho = 0.95, t_eps = 1e-6;
  int t_epochs = 100, t_batch = 128;
  std::uint64_t t_seed = 0;
  bool t_seed_set = false;
  cmd_train->add_option("--features", t_features, "Features JSONL")->required();
  cmd_train->add_option("--arch", t_arch, "Hidden layer sizes, e.g. 1000,500");
  cmd_train->add_option("--lambda", t_lambda, "Reconstruction weight in [0,1]");
  cmd_train->add_option("--epochs", t_epochs, "Training epochs");
  cmd_train->add_option("--batch", t_batch, "Minibatch size");
  cmd_train->add_option("--rho", t_rho, "ADADELTA decay");
  cmd_train->add_option("--eps", t_eps, "ADADELTA epsilon");
  cmd_train->add_option("--unlabeled", t_unlabeled, "Extra reconstruction-only features JSONL");
  cmd_train->add_option("--train-seed", t_seed, "Stage seed override")
      ->each([&](const std::string&) { t_seed_set = true; });
  cmd_train->add_option("--out", t_out, "Model artifact path")->required();

  // ---- classify ----
  auto* cmd_classify = app.add_subcommand("classify", "Classify feature sequences with a model");
  std::string c_model, c_in, c_out;
  cmd_classify->add_option("--model", c_model, "Model artifact")->required();
  cmd_classify->add_option("--in", c_in, "Features JSONL")->required();
  cmd_classify->add_option("--out", c_out, "Predictions CSV")->required();

  // ---- eval ----
  auto* cmd_eval = app.add_subcommand("eval", "k-fold cross validation");
  std::string e_features, e_arch = "1000,500", e_merge, e_report, e_confusion;
  double e_lambda = 0.1;
  int e_k = 10, e_epochs = 100, e_batch = 128;
  std::uint64_t e_seed = 0;
  bool e_seed_set = false;
  cmd_eval->add_option("--features", e_features, "Features JSONL")->required();
  cmd_eval->add_option("--merge-map", e_merge, "Class merge rules (raw -> merged)");
  cmd_eval->add_option("--arch", e_arch, "Hidden layer sizes");
  cmd_eval->add_option("--lambda", e_lambda, "Reconstruction weight");
  cmd_eval->add_option("--k", e_k, "Fold count");
  cmd_eval->add_option("--epochs", e_epochs, "Training epochs per fold");
  cmd_eval->add_option("--batch", e_batch, "Minibatch size");
  cmd_eval->add_option("--eval-seed", e_seed, "Stage seed override")
      ->each([&](const std::string&) { e_seed_set = true; });
  cmd_eval->add_option("--report", e_report, "Report JSON path")->required();
  cmd_eval->add_option("--confusion", e_confusion, "Confusion matrix CSV path");

  // ---- embed ----
  auto* cmd_embed = app.add_subcommand("embed", "2-D embedding via autoencoder or PCA");
  std::string m_features, m_method = "ae", m_arch = "1000,500,100,2", m_svg, m_csv;
  int m_epochs = 50, m_batch = 128, m_subsample = 0;
  std::uint64_t m_seed = 0;
  bool m_seed_set = false;
  cmd_embed->add_option("--features", m_features, "Features JSONL")->required();
  cmd_embed->add_option("--method", m_method, "ae or pca")
      ->check(CLI::IsMember({"ae", "pca"}));
  cmd_embed->add_option("--arch", m_arch, "Autoencoder hidden sizes, must end in 2");
  cmd_embed->add_option("--epochs", m_epochs, "Autoencoder training epochs");
  cmd_embed->add_option("--batch", m_batch, "Minibatch size");
  cmd_embed->add_option("--subsample", m_subsample, "Sequences per class to plot (0 = all)");
  cmd_embed->add_option("--embed-seed", m_seed, "Stage seed override")
      ->each([&](const std::string&) { m_seed_set = true; });
  cmd_embed->add_option("--out", m_svg, "Trajectory plot SVG path")->required();
  cmd_embed->add_option("--csv", m_csv, "Point CSV path");

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_parse) {
      const auto skel = mocap::parse_asf(read_file(p_asf));
      auto seq = mocap::parse_amc(read_file(p_amc), skel, p_fps);
      seq.source_id = p_amc;
      std::cout << "joints: " << skel.joints.size() << ", frames: " << seq.frames.size()
                << ", fps: " << seq.frame_rate << "\n";
      if (!p_out.empty()) {
        auto out = open_out(p_out);
        json config = {{"stage", "parse"}, {"asf", p_asf}, {"amc", p_amc}, {"fps", p_fps}};
        mocap::save_jsonl(out, {seq}, config);
      }
    } else if (*cmd_synth) {
      mocap::SynthConfig config;
      if (s_benchmark) {
        const auto seed = effective_seed(global, s_seed, s_seed_set, "synth");
        config = mocap::benchmark_config(seed, s_per_class > 0 ? s_per_class : 40);
      } else if (!s_config.empty()) {
        std::ifstream in(s_config);
        if (!in) throw std::runtime_error("cannot open file: " + s_config);
        config = mocap::synth_config_from_json(mocap::toml::parse(in));
        if (s_seed_set || global.seed_set)
          config.seed = effective_seed(global, s_seed, s_seed_set, "synth");
      } else {
        throw std::runtime_error("synth needs --config or --benchmark");
      }
      const auto seqs = mocap::synth_generate(config);
      auto out = open_out(s_out);
      json header = {{"stage", "synth"}, {"synth", mocap::synth_config_to_json(config)}};
      mocap::save_jsonl(out, seqs, header);
      std::cout << "wrote " << seqs.size() << " sequences to " << s_out << "\n";
    } else if (*cmd_feat) {
      if (f_in.empty() && f_asf.empty())
        throw std::runtime_error("featurize needs --in or --asf/--amc");
      auto seqs = load_sequences(f_in, f_asf, f_amc, f_fps);
      mocap::FeatureConfig config;
      config.po_joints = split_csv(f_joints);
      config.td_offset_seconds = f_td;
      config.include_nt = !f_no_nt;
      const auto features = mocap::featurize_all(seqs, config);
      auto out = open_out(f_out);
      json header = {{"stage", "featurize"},
                     {"in", f_in.empty() ? f_asf + "+" + f_amc : f_in},
                     {"joints", config.po_joints},
                     {"td_seconds", config.td_offset_seconds},
                     {"include_nt", config.include_nt}};
      mocap::save_features(out, features, header);
      std::cout << "featurized " << features.size() << " sequences (dim " << config.dimension()
                << ") to " << f_out << "\n";
    } else if (*cmd_train) {
      std::ifstream fin(t_features, std::ios::binary);
      if (!fin) throw std::runtime_error("cannot open file: " + t_features);
      const auto features = mocap::load_features(fin);
      const auto dataset = mocap::make_frame_dataset(features);

      mocap::nn::TrainConfig config;
      config.lambda = t_lambda;
      config.epochs = t_epochs;
      config.minibatch_size = t_batch;
      config.adadelta_rho = t_rho;
      config.adadelta_epsilon = t_eps;
      config.seed = effective_seed(global, t_seed, t_seed_set, "train");
      if (!t_unlabeled.empty()) {
        std::ifstream uin(t_unlabeled, std::ios::binary);
        if (!uin) throw std::runtime_error("cannot open file: " + t_unlabeled);
        for (const auto& s : mocap::load_features(uin))
          for (const auto& f : s.frames) config.unlabeled.push_back(f);
      }
      const auto arch = parse_arch(t_arch);
      const auto result = mocap::nn::train(dataset.data, arch, config);

      mocap::ModelArtifact artifact;
      artifact.params = result.params;
      artifact.class_names = dataset.class_names;
      artifact.training_log = result.log;
      artifact.run_config = {{"stage", "train"},       {"features", t_features},
                             {"arch", arch},           {"lambda", t_lambda},
                             {"epochs", t_epochs},     {"batch", t_batch},
                             {"rho", t_rho},           {"eps", t_eps},
                             {"seed", config.seed},    {"unlabeled", t_unlabeled}};
      auto out = open_out(t_out);
      mocap::save_model(out, artifact);
      std::cout << "trained on " << dataset.data.size() << " frames, " << dataset.class_names.size()
                << " classes; final L = " << (result.log.empty() ? 0.0 : result.log.back().l_hybrid)
                << "\n";
    } else if (*cmd_classify) {
      std::ifstream min(c_model, std::ios::binary);
      if (!min) throw std::runtime_error("cannot open file: " + c_model);
      const auto model = mocap::load_model(min);
      std::ifstream fin(c_in, std::ios::binary);
      if (!fin) throw std::runtime_error("cannot open file: " + c_in);
      const auto features = mocap::load_features(fin);

      auto out = open_out(c_out);
      out << "source_id,predicted_class,true_class";
      for (const auto& c : model.class_names) out << ",log_score_" << c;
      out << "\n";
      std::size_t correct = 0, labeled = 0;
      for (const auto& s : features) {
        const auto post = mocap::frame_posteriors(model.params, s.frames);
        const auto [cls, scores] = mocap::classify_sequence(post);
        const std::string predicted =
            cls < static_cast<int>(model.class_names.size()) ? model.class_names[cls]
                                                             : std::to_string(cls);
        out << s.source_id << "," << predicted << "," << s.label;
        for (int c = 0; c < scores.size(); ++c) out << "," << scores[c];
        out << "\n";
        if (!s.label.empty()) {
          ++labeled;
          if (predicted == s.label) ++correct;
        }
      }
      if (labeled > 0)
        std::cout << "sequence accuracy: " << static_cast<double>(correct) / labeled << " ("
                  << correct << "/" << labeled << ")\n";
    } else if (*cmd_eval) {
      std::ifstream fin(e_features, std::ios::binary);
      if (!fin) throw std::runtime_error("cannot open file: " + e_features);
      auto features = mocap::load_features(fin);
      if (!e_merge.empty()) {
        std::ifstream mi(e_merge);
        if (!mi) throw std::runtime_error("cannot open file: " + e_merge);
        const auto map = mocap::load_merge_map(mi);
        std::vector<std::string> raw;
        for (const auto& s : features) raw.push_back(s.label);
        const auto merged = mocap::merge_classes(raw, map);
        for (std::size_t i = 0; i < features.size(); ++i) features[i].label = merged[i];
      }
      mocap::nn::TrainConfig config;
      config.lambda = e_lambda;
      config.epochs = e_epochs;
      config.minibatch_size = e_batch;
      config.seed = effective_seed(global, e_seed, e_seed_set, "eval");
      const auto arch = parse_arch(e_arch);
      json fingerprint = {{"stage", "eval"},   {"features", e_features}, {"merge_map", e_merge},
                          {"arch", arch},      {"lambda", e_lambda},     {"k", e_k},
                          {"epochs", e_epochs}, {"batch", e_batch},      {"seed", config.seed}};
      const auto report = mocap::run_cv(features, e_k, config.seed,
                                        mocap::mlp_trainer(arch, config), fingerprint.dump());
      auto out = open_out(e_report);
      out << mocap::report_to_json(report).dump(2) << "\n";
      if (!e_confusion.empty()) {
        auto cout_file = open_out(e_confusion);
        mocap::confusion_to_csv(report, cout_file);
      }
      std::cout << "sequence accuracy: " << report.mean_sequence_accuracy << " (std "
                << report.std_sequence_accuracy << "), frame accuracy: "
                << report.mean_frame_accuracy << " (std " << report.std_frame_accuracy << ")\n";
    } else if (*cmd_embed) {
      std::ifstream fin(m_features, std::ios::binary);
      if (!fin) throw std::runtime_error("cannot open file: " + m_features);
      auto features = mocap::load_features(fin);
      if (m_subsample > 0) {
        std::map<std::string, int> kept;
        std::vector<mocap::FeatureSequence> subset;
        for (auto& s : features)
          if (kept[s.label]++ < m_subsample) subset.push_back(std::move(s));
        features = std::move(subset);
      }
      std::vector<mocap::VecX> all_frames;
      for (const auto& s : features)
        for (const auto& f : s.frames) all_frames.push_back(f);

      mocap::Embedding embedding;
      const auto seed = effective_seed(global, m_seed, m_seed_set, "embed");
      if (m_method == "ae") {
        mocap::nn::TrainConfig config;
        config.epochs = m_epochs;
        config.minibatch_size = m_batch;
        config.seed = seed;
        const auto ae = mocap::train_viz_autoencoder(all_frames, parse_arch(m_arch), config);
        embedding = mocap::embed_2d(ae, features);
      } else {
        const auto pca = mocap::pca_fit(all_frames);
        embedding = mocap::pca_project(pca, features);
      }
      auto svg = open_out(m_svg);
      mocap::emit_trajectory_svg(embedding, svg);
      if (!m_csv.empty()) {
        auto csv = open_out(m_csv);
        json config = {{"stage", "embed"},   {"features", m_features}, {"method", m_method},
                       {"arch", m_arch},     {"epochs", m_epochs},     {"batch", m_batch},
                       {"seed", seed},       {"subsample", m_subsample}};
        csv << "# config " << config.dump() << "\n";
        mocap::emit_points_csv(embedding, csv);
      }
      std::cout << "embedded " << features.size() << " sequences via " << m_method << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
