#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mocap/nn.hpp"

#include <random>

using namespace mocap;
using namespace mocap::nn;

namespace {

NetworkParams random_net(const std::vector<int>& sizes, int q, std::uint64_t seed,
                         bool linear_last = false) {
  NetworkParams p = init_params(sizes.front(), {sizes.begin() + 1, sizes.end()}, q, seed,
                                linear_last);
  // nonzero biases so the gradient check exercises them
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (VecX& b : p.hidden_biases)
    for (int i = 0; i < b.size(); ++i) b[i] = u(rng);
  for (int i = 0; i < p.output_bias.size(); ++i) p.output_bias[i] = u(rng);
  return p;
}

std::vector<VecX> random_batch(int n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<VecX> out;
  for (int i = 0; i < n; ++i) {
    VecX x(dim);
    for (int d = 0; d < dim; ++d) x[d] = g(rng);
    out.push_back(x);
  }
  return out;
}

std::vector<int> random_labels(int n, int q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, q - 1);
  std::vector<int> out;
  for (int i = 0; i < n; ++i) out.push_back(u(rng));
  return out;
}

// Walks every scalar parameter, reporting the analytic gradient entry and a
// central finite difference of the hybrid loss.
double max_relative_gradient_error(NetworkParams p, const std::vector<VecX>& x,
                                   const std::vector<int>& y, double lambda,
                                   double step = 1e-5) {
  const ParamTensors g = gradients(p, x, y, lambda);
  double worst = 0;
  auto probe = [&](double* value, double analytic) {
    const double saved = *value;
    *value = saved + step;
    const double up = loss_hybrid(p, x, y, lambda);
    *value = saved - step;
    const double down = loss_hybrid(p, x, y, lambda);
    *value = saved;
    const double numeric = (up - down) / (2 * step);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  };
  for (int l = 0; l < p.num_layers(); ++l) {
    for (int i = 0; i < p.hidden_weights[l].size(); ++i)
      probe(p.hidden_weights[l].data() + i, g.hidden_weights[l].data()[i]);
    for (int i = 0; i < p.hidden_biases[l].size(); ++i)
      probe(p.hidden_biases[l].data() + i, g.hidden_biases[l].data()[i]);
  }
  for (int i = 0; i < p.output_weights.size(); ++i)
    probe(p.output_weights.data() + i, g.output_weights.data()[i]);
  for (int i = 0; i < p.output_bias.size(); ++i)
    probe(p.output_bias.data() + i, g.output_bias.data()[i]);
  return worst;
}

}  // namespace

TEST_CASE("forward with zero parameters outputs one half") {
  NetworkParams p;
  p.hidden_weights = {MatX::Zero(4, 3)};
  p.hidden_biases = {VecX::Zero(3)};
  p.hidden_activations = {Activation::Relu};
  p.output_weights = MatX::Zero(3, 2);
  p.output_bias = VecX::Zero(2);
  const auto f = forward(p, VecX::Ones(4));
  CHECK(f.output.isApproxToConstant(0.5, 1e-12));
}

TEST_CASE("forward 1-1-1 rectifier kills negative input") {
  NetworkParams p;
  p.hidden_weights = {MatX::Ones(1, 1)};
  p.hidden_biases = {VecX::Zero(1)};
  p.hidden_activations = {Activation::Relu};
  p.output_weights = MatX::Ones(1, 1);
  p.output_bias = VecX::Zero(1);
  VecX x(1);
  x << -2.0;
  const auto f = forward(p, x);
  CHECK(f.act[0][0] == 0.0);
  CHECK(f.output[0] == doctest::Approx(0.5));
}

TEST_CASE("forward matches an independently coded oracle") {
  const NetworkParams p = random_net({7, 5, 4}, 3, 99);
  const auto batch = random_batch(10, 7, 100);
  for (const VecX& x : batch) {
    // straight-line re-implementation with explicit loops
    std::vector<double> s(x.data(), x.data() + x.size());
    for (int l = 0; l < p.num_layers(); ++l) {
      std::vector<double> next(p.hidden_weights[l].cols());
      for (std::size_t j = 0; j < next.size(); ++j) {
        double acc = p.hidden_biases[l][j];
        for (std::size_t i = 0; i < s.size(); ++i) acc += p.hidden_weights[l](i, j) * s[i];
        next[j] = acc > 0 ? acc : 0;
      }
      s = next;
    }
    std::vector<double> u(p.num_classes());
    for (std::size_t j = 0; j < u.size(); ++j) {
      double acc = p.output_bias[j];
      for (std::size_t i = 0; i < s.size(); ++i) acc += p.output_weights(i, j) * s[i];
      u[j] = 1.0 / (1.0 + std::exp(-acc));
    }
    const auto f = forward(p, x);
    for (std::size_t j = 0; j < u.size(); ++j) CHECK(f.output[j] == doctest::Approx(u[j]).epsilon(1e-12));
  }
}

TEST_CASE("output components always lie in (0,1)") {
  const NetworkParams p = random_net({6, 8, 4}, 5, 3);
  for (const VecX& x : random_batch(50, 6, 4)) {
    const VecX u = forward(p, x).output;
    for (int j = 0; j < u.size(); ++j) {
      CHECK(u[j] > 0.0);
      CHECK(u[j] < 1.0);
    }
  }
}

TEST_CASE("loss_supervised closed forms") {
  NetworkParams p;
  p.hidden_weights = {MatX::Zero(3, 2)};
  p.hidden_biases = {VecX::Zero(2)};
  p.hidden_activations = {Activation::Relu};
  p.output_weights = MatX::Zero(2, 4);
  p.output_bias = VecX::Zero(4);
  // u = 0.5 everywhere: L = -n*q*log(2)
  const auto batch = random_batch(6, 3, 5);
  const auto labels = random_labels(6, 4, 6);
  CHECK(loss_supervised(p, batch, labels) == doctest::Approx(-6 * 4 * std::log(2.0)));
}

TEST_CASE("loss_supervised hand arithmetic sample") {
  // q = 2, y = (1,0), u = (0.9, 0.2): log 0.9 + log 0.8
  NetworkParams p;
  p.hidden_weights = {MatX::Identity(2, 2)};
  p.hidden_biases = {VecX::Zero(2)};
  p.hidden_activations = {Activation::Linear};
  p.output_weights = MatX::Identity(2, 2);
  p.output_bias = VecX::Zero(2);
  const double logit09 = std::log(0.9 / 0.1), logit02 = std::log(0.2 / 0.8);
  VecX x(2);
  x << logit09, logit02;
  const double l = loss_supervised(p, {x}, {0});
  CHECK(l == doctest::Approx(std::log(0.9) + std::log(0.8)).epsilon(1e-9));
  CHECK(l == doctest::Approx(-0.3285).epsilon(1e-3));
}

TEST_CASE("loss_supervised near-perfect prediction is near zero") {
  NetworkParams p;
  p.hidden_weights = {MatX::Identity(2, 2)};
  p.hidden_biases = {VecX::Zero(2)};
  p.hidden_activations = {Activation::Linear};
  p.output_weights = MatX::Identity(2, 2);
  p.output_bias = VecX::Zero(2);
  VecX x(2);
  x << 60.0, -60.0;  // saturates the sigmoid to ~1 and ~0
  CHECK(std::abs(loss_supervised(p, {x}, {0})) < 1e-8);
}

TEST_CASE("encode/decode: orthogonal tied pair reconstructs positive-cone input") {
  NetworkParams p;
  const Mat3 rot = Eigen::AngleAxisd(0.3, Vec3(1, 2, 2).normalized()).toRotationMatrix();
  p.hidden_weights = {rot};
  p.hidden_biases = {VecX::Zero(3)};
  p.hidden_activations = {Activation::Relu};
  p.output_weights = MatX::Zero(3, 2);
  p.output_bias = VecX::Zero(2);
  const Vec3 positive(0.5, 1.0, 2.0);
  const VecX x = rot * positive;  // W^T x = positive, so the rectifier is inactive
  const VecX h = encode(p, x);
  CHECK((h - positive).norm() < 1e-12);
  CHECK((decode(p, h) - x).norm() < 1e-9);
}

TEST_CASE("decode with zero weights reconstructs zero") {
  NetworkParams p;
  p.hidden_weights = {MatX::Zero(4, 3), MatX::Zero(3, 2)};
  p.hidden_biases = {VecX::Zero(3), VecX::Zero(2)};
  p.hidden_activations = {Activation::Relu, Activation::Relu};
  p.output_weights = MatX::Zero(2, 2);
  p.output_bias = VecX::Zero(2);
  const VecX xt = decode(p, encode(p, VecX::Ones(4)));
  CHECK(xt.size() == 4);
  CHECK(xt.norm() == 0.0);
}

TEST_CASE("encode/decode shape round trip") {
  const NetworkParams p = random_net({9, 6, 4, 3}, 2, 7);
  const VecX x = random_batch(1, 9, 8)[0];
  CHECK(decode(p, encode(p, x)).size() == x.size());
}

TEST_CASE("loss_unsupervised closed forms and oracle") {
  const NetworkParams p = random_net({5, 4, 3}, 2, 21);
  const auto batch = random_batch(8, 5, 22);
  // brute-force per-component summation oracle
  double oracle = 0;
  for (const VecX& x : batch) {
    const VecX xt = decode(p, encode(p, x));
    for (int d = 0; d < x.size(); ++d) oracle -= 0.5 * (x[d] - xt[d]) * (x[d] - xt[d]);
  }
  CHECK(loss_unsupervised(p, batch) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("hybrid endpoints and interpolation") {
  const NetworkParams p = random_net({6, 5, 4}, 3, 31);
  const auto x = random_batch(12, 6, 32);
  const auto y = random_labels(12, 3, 33);
  const double ls = loss_supervised(p, x, y);
  const double lu = loss_unsupervised(p, x);
  CHECK(loss_hybrid(p, x, y, 0.0) == ls);
  CHECK(loss_hybrid(p, x, y, 1.0) == lu);
  for (double lambda : {0.1, 0.25, 0.5, 0.75, 0.9})
    CHECK(loss_hybrid(p, x, y, lambda) ==
          doctest::Approx((1 - lambda) * ls + lambda * lu).epsilon(1e-14));
  // trivial arithmetic case from fixed values
  CHECK(0.5 * -4.0 + 0.5 * -2.0 == -3.0);
}

TEST_CASE("gradients match central finite differences") {
  for (double lambda : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    for (std::uint64_t seed : {101ull, 102ull, 103ull}) {
      const NetworkParams p = random_net({6, 5, 4}, 3, seed);
      const auto x = random_batch(5, 6, seed + 10);
      const auto y = random_labels(5, 3, seed + 20);
      CHECK(max_relative_gradient_error(p, x, y, lambda) < 1e-4);
    }
  }
}

TEST_CASE("U receives no reconstruction gradient") {
  const NetworkParams p = random_net({6, 5, 4}, 3, 41);
  const auto x = random_batch(9, 6, 42);
  const auto y = random_labels(9, 3, 43);
  const ParamTensors g = gradients(p, x, y, 1.0);
  CHECK(g.output_weights.norm() == 0.0);
  CHECK(g.output_bias.norm() == 0.0);
}

TEST_CASE("tied weights: mutating W changes both encode and decode") {
  NetworkParams p;
  p.hidden_weights = {MatX::Ones(5, 4) * 0.1, MatX::Ones(4, 3) * 0.1};
  p.hidden_biases = {VecX::Zero(4), VecX::Zero(3)};
  p.hidden_activations = {Activation::Relu, Activation::Relu};
  p.output_weights = MatX::Zero(3, 2);
  p.output_bias = VecX::Zero(2);
  const VecX x = VecX::Ones(5);  // every relu stays active
  const VecX h0 = encode(p, x);
  const VecX d0 = decode(p, h0);
  p.hidden_weights[0](0, 0) += 0.5;
  const VecX h1 = encode(p, x);
  CHECK((h0 - h1).norm() > 0);
  CHECK((d0 - decode(p, h0)).norm() > 0);  // decode path changed for the same code
}

TEST_CASE("adadelta zero gradient leaves parameters fixed") {
  NetworkParams p = random_net({4, 3}, 2, 61);
  const NetworkParams before = p;
  AdadeltaState state = AdadeltaState::zeros_like(p);
  state.sq_grad.hidden_weights[0].setConstant(0.2);
  adadelta_step(p, ParamTensors::zeros_like(p), state, 0.95, 1e-6);
  CHECK(p.hidden_weights[0] == before.hidden_weights[0]);
  CHECK(state.sq_grad.hidden_weights[0](0, 0) == doctest::Approx(0.95 * 0.2));
}

TEST_CASE("adadelta first step magnitude") {
  NetworkParams p;
  p.hidden_weights = {MatX::Zero(1, 1)};
  p.hidden_biases = {VecX::Zero(1)};
  p.hidden_activations = {Activation::Relu};
  p.output_weights = MatX::Zero(1, 1);
  p.output_bias = VecX::Zero(1);
  AdadeltaState state = AdadeltaState::zeros_like(p);
  ParamTensors g = ParamTensors::zeros_like(p);
  g.hidden_weights[0](0, 0) = 1.0;
  adadelta_step(p, g, state, 0.95, 1e-6);
  // sqrt(eps) / sqrt(0.05 + eps)
  CHECK(p.hidden_weights[0](0, 0) == doctest::Approx(4.4721e-3).epsilon(1e-3));

  const double first = p.hidden_weights[0](0, 0);
  adadelta_step(p, g, state, 0.95, 1e-6);
  const double second = p.hidden_weights[0](0, 0) - first;
  CHECK(second > first);  // accumulated update history grows the step
}

TEST_CASE("train reaches 100% on separable blobs") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> g(0.0, 0.3);
  LabeledFrameDataset data;
  data.num_classes = 2;
  for (int i = 0; i < 60; ++i) {
    VecX x(2);
    const int y = i % 2;
    x << (y == 0 ? -2.0 : 2.0) + g(rng), (y == 0 ? -2.0 : 2.0) + g(rng);
    data.inputs.push_back(x);
    data.labels.push_back(y);
    data.sequence_ids.push_back(i);
  }
  TrainConfig config;
  config.lambda = 0.0;
  config.epochs = 50;
  config.minibatch_size = 16;
  config.seed = 5;
  const auto result = train(data, {8}, config);
  int correct = 0;
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    const VecX u = forward(result.params, data.inputs[i]).output;
    if ((u[1] > u[0]) == (data.labels[i] == 1)) ++correct;
  }
  CHECK(correct == 60);
}

TEST_CASE("train deterministic for a fixed seed") {
  LabeledFrameDataset data;
  data.num_classes = 2;
  std::mt19937_64 rng(81);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    VecX x(3);
    x << g(rng), g(rng), g(rng);
    data.inputs.push_back(x);
    data.labels.push_back(i % 2);
    data.sequence_ids.push_back(i);
  }
  TrainConfig config;
  config.lambda = 0.3;
  config.epochs = 5;
  config.minibatch_size = 8;
  config.seed = 9;
  const auto a = train(data, {6, 4}, config);
  const auto b = train(data, {6, 4}, config);
  for (int l = 0; l < a.params.num_layers(); ++l)
    CHECK(a.params.hidden_weights[l] == b.params.hidden_weights[l]);
  CHECK(a.params.output_weights == b.params.output_weights);
}

TEST_CASE("train improves the hybrid objective") {
  LabeledFrameDataset data;
  data.num_classes = 3;
  std::mt19937_64 rng(91);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 90; ++i) {
    VecX x(4);
    const int y = i % 3;
    x << y + g(rng) * 0.2, -y + g(rng) * 0.2, g(rng) * 0.2, g(rng) * 0.2;
    data.inputs.push_back(x);
    data.labels.push_back(y);
    data.sequence_ids.push_back(i);
  }
  TrainConfig config;
  config.lambda = 0.1;
  config.epochs = 20;
  config.minibatch_size = 16;
  config.seed = 13;
  const auto result = train(data, {10, 6}, config);
  REQUIRE(result.log.size() == 20);
  CHECK(result.log.back().l_hybrid > result.log.front().l_hybrid);
}

TEST_CASE("unlabeled samples contribute to the reconstruction gradient") {
  const NetworkParams p = random_net({5, 4}, 2, 111);
  const auto x = random_batch(4, 5, 112);
  const auto y = random_labels(4, 2, 113);
  const auto extra = random_batch(4, 5, 114);
  const ParamTensors without = gradients(p, x, y, 0.5);
  const ParamTensors with = gradients(p, x, y, 0.5, &extra);
  CHECK((with.hidden_weights[0] - without.hidden_weights[0]).norm() > 0);
  CHECK(with.output_weights == without.output_weights);  // U untouched by the extra term
}
