#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "oracles.hpp"
#include "pf0/binio.hpp"
#include "pf0/dataset.hpp"
#include "pf0/error.hpp"
#include "pf0/mlp.hpp"

using namespace pf0;

namespace {

Eigen::MatrixXd random_inputs(int n, std::uint64_t seed) {
  Rng r(seed);
  Eigen::MatrixXd x(24, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = r.gaussian();
  return x;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pf0_mlp_" + name);
}

}  // namespace

TEST(Init, DeterministicHeScaledZeroBias) {
  const auto a = init_model(kDefaultLayerDims, 5);
  const auto b = init_model(kDefaultLayerDims, 5);
  const auto c = init_model(kDefaultLayerDims, 6);
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    EXPECT_EQ(a.weights[l], b.weights[l]);
    EXPECT_TRUE(a.biases[l].isZero(0.0));
  }
  EXPECT_NE(a.weights[0], c.weights[0]);

  const auto big = init_model(std::vector<int>{24, 512, 128, 4}, 9);
  for (std::size_t l = 0; l < 2; ++l) {
    const auto& w = big.weights[l];
    const double mean = w.mean();
    const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
    const double target = 2.0 / w.cols();
    ASSERT_GE(w.size(), 10000);
    EXPECT_NEAR(var / target, 1.0, 0.1) << "layer " << l;
  }
}

TEST(Init, RejectsShortDims) {
  EXPECT_THROW(init_model(std::vector<int>{24}, 1), ArgumentError);
  EXPECT_THROW(init_model(std::vector<int>{24, 0, 4}, 1), ArgumentError);
}

TEST(Forward, SoftmaxNormalized) {
  Rng r(17);
  for (int t = 0; t < 10000; ++t) {
    auto gc = oracle::random_grad_case(1000 + static_cast<std::uint64_t>(t));
    const Eigen::VectorXd x = gc.x.col(0) * (1.0 + 10.0 * r.uniform());
    const auto out = forward(gc.model, as_span(x), Mode::Infer);
    ASSERT_NEAR(out.probs.sum(), 1.0, 1e-6);
    ASSERT_GE(out.probs.minCoeff(), 0.0);
    ASSERT_LE(out.probs.maxCoeff(), 1.0);
  }
}

TEST(Forward, ZeroWeightsGiveUniformOutput) {
  auto m = init_model(kDefaultLayerDims, 1);
  for (auto& w : m.weights) w.setZero();
  const Eigen::VectorXd x = random_inputs(1, 2).col(0);
  const auto out = forward(m, as_span(x), Mode::Infer);
  for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(out.probs(k), 0.25);
}

TEST(Forward, InferIsDeterministic) {
  const auto m = init_model(kDefaultLayerDims, 3);
  const Eigen::VectorXd x = random_inputs(1, 4).col(0);
  const auto a = forward(m, as_span(x), Mode::Infer);
  const auto b = forward(m, as_span(x), Mode::Infer);
  EXPECT_EQ(a.probs, b.probs);
}

TEST(Forward, InputChecks) {
  const auto m = init_model(kDefaultLayerDims, 3);
  std::vector<double> short_x(23, 0.0);
  EXPECT_THROW(forward(m, short_x, Mode::Infer), ArgumentError);
  std::vector<double> bad(24, 0.0);
  bad[3] = std::nan("");
  EXPECT_THROW(forward(m, bad, Mode::Infer), ArgumentError);
  std::vector<double> ok(24, 0.0);
  EXPECT_THROW(forward(m, ok, Mode::Train, nullptr), ArgumentError);
}

TEST(Forward, DropoutExpectationMatchesInference) {
  auto m = init_model(kDefaultLayerDims, 12);
  const Eigen::VectorXd x = random_inputs(1, 13).col(0);
  const int masks = 100000;
  const Eigen::MatrixXd batch = x.replicate(1, masks);
  Rng r(14);
  const auto train = forward_batch(m, batch, Mode::Train, &r);
  const auto infer = forward_batch(m, x, Mode::Infer);
  // inputs[1] is the first hidden activation after dropout.
  const Eigen::VectorXd mean = train.inputs[1].rowwise().mean();
  const Eigen::VectorXd ref = infer.inputs[1].col(0);
  int checked = 0;
  for (Eigen::Index i = 0; i < ref.size(); ++i) {
    if (ref(i) < 0.05 * ref.maxCoeff()) {
      EXPECT_EQ(mean(i), ref(i) == 0.0 ? 0.0 : mean(i));
      continue;
    }
    EXPECT_NEAR(mean(i) / ref(i), 1.0, 0.02) << "unit " << i;
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Loss, Examples) {
  const double one[] = {0.0, 1.0, 0.0, 0.0};
  EXPECT_EQ(loss_ce(one, 1), 0.0);
  const double uniform[] = {0.25, 0.25, 0.25, 0.25};
  EXPECT_NEAR(loss_ce(uniform, 2), std::log(4.0), 1e-15);
  EXPECT_NEAR(loss_ce(one, 0), -std::log(1e-12), 1e-9);
  EXPECT_TRUE(std::isfinite(loss_ce(one, 0)));
}

TEST(Backward, OutputBiasGradientIsResidual) {
  const auto m = init_model(kDefaultLayerDims, 21);
  const Eigen::MatrixXd x = random_inputs(1, 22);
  const auto cache = forward_batch(m, x, Mode::Infer);
  const int label = 2;
  const auto g = backward(m, cache, std::vector<int>{label});
  Eigen::VectorXd expect = cache.probs.col(0);
  expect(label) -= 1.0;
  EXPECT_EQ(g.biases.back(), expect);
}

TEST(Backward, MatchesFiniteDifferences) {
  for (std::uint64_t s = 0; s < 25; ++s) {
    const auto gc = oracle::random_grad_case(s);
    EXPECT_LT(oracle::gradient_check(gc.model, gc.x, gc.y), 1e-5) << "case " << s;
  }
}

TEST(Backward, DuplicatedInstanceDoublesGradient) {
  const auto m = init_model(kDefaultLayerDims, 31);
  const Eigen::MatrixXd x1 = random_inputs(1, 32);
  Eigen::MatrixXd x2(24, 2);
  x2 << x1, x1;
  const auto g1 = backward(m, forward_batch(m, x1, Mode::Infer), std::vector<int>{1});
  const auto g2 = backward(m, forward_batch(m, x2, Mode::Infer), std::vector<int>{1, 1});
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    EXPECT_EQ(g2.weights[l], (2.0 * g1.weights[l]).eval()) << "layer " << l;
    EXPECT_EQ(g2.biases[l], (2.0 * g1.biases[l]).eval()) << "layer " << l;
  }
}

TEST(Sgd, Recursion) {
  const auto base = init_model(std::vector<int>{24, 8, 4}, 41);
  Gradients g;
  for (std::size_t l = 0; l < base.num_layers(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Constant(base.weights[l].rows(), base.weights[l].cols(), 0.5));
    g.biases.push_back(Eigen::VectorXd::Constant(base.biases[l].size(), -0.25));
  }
  const double lr = 0.01;

  auto plain = base;
  auto st = OptimizerState::zeros_like(plain);
  sgd_momentum_step(plain, g, st, lr, 0.0);
  EXPECT_TRUE(plain.weights[0].isApprox(base.weights[0] - lr * g.weights[0], 1e-15));

  auto still = base;
  auto st0 = OptimizerState::zeros_like(still);
  Gradients zero = g;
  for (auto& w : zero.weights) w.setZero();
  for (auto& b : zero.biases) b.setZero();
  sgd_momentum_step(still, zero, st0, lr, 0.9);
  EXPECT_EQ(still.weights[0], base.weights[0]);

  auto two = base;
  auto st2 = OptimizerState::zeros_like(two);
  sgd_momentum_step(two, g, st2, lr, 0.9);
  sgd_momentum_step(two, g, st2, lr, 0.9);
  const Eigen::MatrixXd delta = two.weights[1] - base.weights[1];
  EXPECT_TRUE(delta.isApprox(-lr * 2.9 * g.weights[1], 1e-12));
  const Eigen::VectorXd dbias = two.biases[0] - base.biases[0];
  EXPECT_TRUE(dbias.isApprox(-lr * 2.9 * g.biases[0], 1e-12));
}

TEST(Train, SeparableToyProblem) {
  TrainingData d;
  d.features = Eigen::MatrixXd::Zero(24, 4);
  for (int k = 0; k < 4; ++k) d.features(k, k) = 1.0;
  d.labels = {0, 1, 2, 3};
  TrainConfig cfg;
  cfg.batch_size = 4;
  const auto r = train(init_model(kDefaultLayerDims, 1), d, {}, cfg);
  EXPECT_EQ(r.history.epochs.size(), 200u);
  EXPECT_EQ(evaluate(r.model, d).accuracy, 1.0);
  EXPECT_TRUE(std::isnan(r.history.epochs.back().val_loss));
}

TEST(Train, DeterministicPerSeed) {
  const Eigen::MatrixXd x = random_inputs(300, 50);
  TrainingData d{x, {}};
  for (int i = 0; i < 300; ++i) d.labels.push_back(x(0, i) > 0 ? (x(1, i) > 0 ? 0 : 1) : (x(2, i) > 0 ? 2 : 3));
  TrainConfig cfg;
  cfg.epochs = 5;
  const auto a = train(init_model(kDefaultLayerDims, 2), d, d, cfg);
  const auto b = train(init_model(kDefaultLayerDims, 2), d, d, cfg);
  for (std::size_t l = 0; l < a.model.num_layers(); ++l) EXPECT_EQ(a.model.weights[l], b.model.weights[l]);
  EXPECT_EQ(model_hash(a.model), model_hash(b.model));
  cfg.seed = 3;
  const auto c = train(init_model(kDefaultLayerDims, 2), d, d, cfg);
  EXPECT_NE(model_hash(a.model), model_hash(c.model));
}

TEST(Train, Errors) {
  TrainConfig cfg;
  EXPECT_THROW(train(init_model(kDefaultLayerDims, 1), TrainingData{}, {}, cfg), ArgumentError);
  cfg.epochs = 0;
  TrainingData d{Eigen::MatrixXd::Zero(24, 1), {0}};
  EXPECT_THROW(train(init_model(kDefaultLayerDims, 1), d, {}, cfg), ArgumentError);
  cfg = {};
  d.labels = {4};
  EXPECT_THROW(train(init_model(kDefaultLayerDims, 1), d, {}, cfg), ArgumentError);
}

TEST(Train, DivergenceIsNumericalError) {
  TrainingData d{Eigen::MatrixXd::Constant(24, 8, 1e300), {0, 1, 2, 3, 0, 1, 2, 3}};
  TrainConfig cfg;
  cfg.epochs = 2;
  EXPECT_THROW(train(init_model(kDefaultLayerDims, 1), d, {}, cfg), NumericalError);
}

TEST(Train, FirstEpochBeatsUniformLossAtTenDb) {
  GenerationConfig g;
  g.count = 20000;
  g.snr = SnrSpec::db(10);
  const auto data = generate_dataset(g).to_training_data();
  const auto init = init_model(kDefaultLayerDims, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto r = train(init, data, {}, cfg);
  EXPECT_LT(r.history.epochs[0].train_loss, std::log(4.0));
  EXPECT_LT(r.history.epochs[0].train_loss, evaluate(init, data).loss);
}

// Flat fading: without noise every instance stays separable. Under TDL-C a few
// noiseless instances sit in deep frequency-selective fades (see test_dataset).
TEST(Train, NoiselessDatasetFitsWithinFiftyEpochs) {
  GenerationConfig g;
  g.count = 2000;
  g.snr = SnrSpec::noiseless();
  g.channel.profile = ChannelProfile::FlatRayleigh;
  const auto data = generate_dataset(g).to_training_data();
  TrainConfig cfg;
  cfg.epochs = 50;
  const auto r = train(init_model(kDefaultLayerDims, 1), data, {}, cfg);
  EXPECT_EQ(evaluate(r.model, data).accuracy, 1.0);
}

TEST(Evaluate, PermutationInvariant) {
  const auto m = init_model(kDefaultLayerDims, 61);
  const Eigen::MatrixXd x = random_inputs(500, 62);
  TrainingData d{x, std::vector<int>(500)};
  for (int i = 0; i < 500; ++i) d.labels[i] = i % 4;
  TrainingData p{Eigen::MatrixXd(24, 500), std::vector<int>(500)};
  for (int i = 0; i < 500; ++i) {
    p.features.col(i) = x.col(499 - i);
    p.labels[i] = d.labels[499 - i];
  }
  EXPECT_EQ(evaluate(m, d).accuracy, evaluate(m, p).accuracy);
}

TEST(ModelFile, RoundTripPredictsIdentically) {
  auto m = init_model(kDefaultLayerDims, 71);
  // A trained model is float-snapped; do the same so the f32 file is exact.
  TrainingData tiny{random_inputs(8, 1), {0, 1, 2, 3, 0, 1, 2, 3}};
  TrainConfig cfg;
  cfg.epochs = 1;
  m = train(m, tiny, {}, cfg).model;
  m.tags = {FeatureLayout::Interleaved, Normalization::None};
  const auto path = temp_file("roundtrip.bin");
  save_model(m, path);
  const auto back = load_model(path);
  EXPECT_EQ(back.layer_dims, m.layer_dims);
  EXPECT_EQ(back.tags, m.tags);
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    EXPECT_EQ(back.weights[l], m.weights[l]);
    EXPECT_EQ(back.biases[l], m.biases[l]);
  }
  const Eigen::MatrixXd x = random_inputs(1000, 72);
  EXPECT_EQ(predict(back, x), predict(m, x));
  EXPECT_EQ(model_hash(back), model_hash(m));
  std::filesystem::remove(path);
}

TEST(ModelFile, MalformedInputsRejected) {
  const auto m = init_model(std::vector<int>{24, 4, 4}, 81);
  const auto bytes = serialize_model(m);
  // Every truncation fails cleanly.
  for (std::size_t cut = 0; cut < bytes.size(); cut += 7) {
    std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(deserialize_model(t), FormatError) << cut;
  }
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_model(bad_magic), FormatError);
  auto bad_version = bytes;
  bad_version[4] = 99;
  try {
    deserialize_model(bad_version);
    FAIL() << "version 99 accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(deserialize_model(trailing), FormatError);
  EXPECT_THROW(load_model("/nonexistent/dir/model.bin"), FormatError);
}
