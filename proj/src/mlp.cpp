#include "pf0/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pf0/binio.hpp"
#include "pf0/error.hpp"

namespace pf0 {

namespace {

// Stream ids for Rng::stream() so that init, shuffling and dropout never share draws.
constexpr std::uint64_t kInitStream = 0x494e4954;     // "INIT"
constexpr std::uint64_t kShuffleStream = 0x53485546;  // "SHUF"
constexpr std::uint64_t kDropoutStream = 0x44524f50;  // "DROP"

constexpr double kProbFloor = 1e-12;

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  const double keep = 1.0 - p;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
  }
  return m;
}

void softmax_columns(Eigen::MatrixXd& z) {
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    auto col = z.col(c);
    const double mx = col.maxCoeff();
    col = (col.array() - mx).exp();
    col /= col.sum();
  }
}

Eigen::Index argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

void check_data(const MlpModel& model, const TrainingData& data, const char* what) {
  if (data.features.cols() != static_cast<Eigen::Index>(data.labels.size())) {
    throw ArgumentError(std::string(what) + ": feature columns and labels differ in count");
  }
  if (data.size() > 0 && data.features.rows() != model.input_dim()) {
    throw ArgumentError(std::string(what) + ": feature dimension does not match the model input");
  }
  for (int y : data.labels) {
    if (y < 0 || y >= model.num_classes()) {
      throw ArgumentError(std::string(what) + ": label " + std::to_string(y) + " out of range");
    }
  }
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& x, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = x.col(static_cast<Eigen::Index>(idx[i]));
  return out;
}

void snap_to_float(MlpModel& model) {
  auto snap = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  for (auto& w : model.weights) w = w.unaryExpr(snap);
  for (auto& b : model.biases) b = b.unaryExpr(snap);
}

}  // namespace

void MlpModel::validate() const {
  if (layer_dims.size() < 2) throw ArgumentError("model needs at least an input and an output layer");
  for (int d : layer_dims) {
    if (d < 1) throw ArgumentError("layer dimensions must be positive");
  }
  if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
    throw ArgumentError("parameter count does not match layer dims");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].rows() != layer_dims[i + 1] || weights[i].cols() != layer_dims[i] ||
        biases[i].size() != layer_dims[i + 1]) {
      throw ArgumentError("layer " + std::to_string(i) + " has inconsistent shapes");
    }
    if (!weights[i].allFinite() || !biases[i].allFinite()) {
      throw ArgumentError("layer " + std::to_string(i) + " has non-finite parameters");
    }
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ArgumentError("dropout_p must lie in [0, 1)");
}

MlpModel init_model(std::span<const int> layer_dims, std::uint64_t seed, double dropout_p) {
  if (layer_dims.size() < 2) throw ArgumentError("model needs at least two layer dims");
  MlpModel m;
  m.layer_dims.assign(layer_dims.begin(), layer_dims.end());
  m.dropout_p = dropout_p;
  for (int d : m.layer_dims) {
    if (d < 1) throw ArgumentError("layer dimensions must be positive");
  }
  Rng rng = Rng::stream(seed, kInitStream, 0);
  for (std::size_t i = 0; i + 1 < m.layer_dims.size(); ++i) {
    const int fan_in = m.layer_dims[i];
    const int fan_out = m.layer_dims[i + 1];
    const double sd = std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = sd * rng.gaussian();
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  m.validate();
  return m;
}

// Products are evaluated coefficient by coefficient (lazyProduct) rather than
// through Eigen's blocked GEMM/GEMV kernels: every column then sees the same
// summation order whatever the batch size, so a batch of one and a batch of
// many give bit-identical per-instance results.
ForwardCache forward_batch(const MlpModel& model, const Eigen::MatrixXd& x, Mode mode, Rng* rng) {
  if (x.rows() != model.input_dim()) {
    throw ArgumentError("input has " + std::to_string(x.rows()) + " features, model expects " +
                        std::to_string(model.input_dim()));
  }
  if (!x.allFinite()) throw ArgumentError("non-finite input to forward");
  const bool drop = mode == Mode::Train && model.dropout_p > 0.0;
  if (drop && rng == nullptr) throw ArgumentError("training-mode dropout needs an rng");

  const std::size_t layers = model.num_layers();
  ForwardCache c;
  c.inputs.reserve(layers);
  c.masks.resize(layers);
  c.pre.reserve(layers - 1);

  Eigen::MatrixXd a = x;
  if (drop && model.dropout_input) {
    c.masks[0] = dropout_mask(a.rows(), a.cols(), model.dropout_p, *rng);
    a = a.cwiseProduct(c.masks[0]);
  }
  for (std::size_t i = 0; i + 1 < layers; ++i) {
    Eigen::MatrixXd z = model.weights[i].lazyProduct(a);
    z.colwise() += model.biases[i];
    c.inputs.push_back(std::move(a));
    a = z.cwiseMax(0.0);
    c.pre.push_back(std::move(z));
    if (drop) {
      c.masks[i + 1] = dropout_mask(a.rows(), a.cols(), model.dropout_p, *rng);
      a = a.cwiseProduct(c.masks[i + 1]);
    }
  }
  Eigen::MatrixXd logits = model.weights.back().lazyProduct(a);
  logits.colwise() += model.biases.back();
  c.inputs.push_back(std::move(a));
  softmax_columns(logits);
  c.probs = std::move(logits);
  return c;
}

ForwardResult forward(const MlpModel& model, std::span<const double> x, Mode mode, Rng* rng) {
  if (static_cast<int>(x.size()) != model.input_dim()) {
    throw ArgumentError("input has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(model.input_dim()));
  }
  const Eigen::MatrixXd col = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  ForwardResult r;
  r.cache = forward_batch(model, col, mode, rng);
  r.probs = r.cache.probs.col(0);
  return r;
}

double loss_ce(std::span<const double> probs, int label) {
  if (label < 0 || label >= static_cast<int>(probs.size())) throw ArgumentError("label out of range");
  return -std::log(std::max(probs[static_cast<std::size_t>(label)], kProbFloor));
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, std::span<const int> labels) {
  const std::size_t layers = model.num_layers();
  if (cache.inputs.size() != layers || cache.probs.cols() != static_cast<Eigen::Index>(labels.size())) {
    throw ArgumentError("forward cache does not match the model or the label batch");
  }
  Gradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);

  // Fused softmax + cross-entropy: dL/dlogits = p - onehot(label).
  Eigen::MatrixXd delta = cache.probs;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const int y = labels[b];
    if (y < 0 || y >= model.num_classes()) throw ArgumentError("label out of range");
    delta(y, static_cast<Eigen::Index>(b)) -= 1.0;
  }
  for (std::size_t i = layers; i-- > 0;) {
    g.weights[i] = delta.lazyProduct(cache.inputs[i].transpose());
    g.biases[i] = delta.rowwise().sum();
    if (i == 0) break;
    Eigen::MatrixXd back = model.weights[i].transpose().lazyProduct(delta);
    back = back.cwiseProduct((cache.pre[i - 1].array() > 0.0).cast<double>().matrix());
    if (cache.masks[i].size() > 0) back = back.cwiseProduct(cache.masks[i]);
    delta = std::move(back);
  }
  return g;
}

OptimizerState OptimizerState::zeros_like(const MlpModel& model) {
  OptimizerState s;
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    s.weight_velocity.push_back(Eigen::MatrixXd::Zero(model.weights[i].rows(), model.weights[i].cols()));
    s.bias_velocity.push_back(Eigen::VectorXd::Zero(model.biases[i].size()));
  }
  return s;
}

void sgd_momentum_step(MlpModel& model, const Gradients& grads, OptimizerState& state, double lr,
                       double momentum) {
  const std::size_t layers = model.num_layers();
  if (grads.weights.size() != layers || grads.biases.size() != layers ||
      state.weight_velocity.size() != layers || state.bias_velocity.size() != layers) {
    throw ArgumentError("gradient/optimizer state does not match the model");
  }
  for (std::size_t i = 0; i < layers; ++i) {
    if (grads.weights[i].rows() != model.weights[i].rows() || grads.weights[i].cols() != model.weights[i].cols() ||
        grads.biases[i].size() != model.biases[i].size()) {
      throw ArgumentError("gradient shape mismatch at layer " + std::to_string(i));
    }
    state.weight_velocity[i] = momentum * state.weight_velocity[i] - lr * grads.weights[i];
    state.bias_velocity[i] = momentum * state.bias_velocity[i] - lr * grads.biases[i];
    model.weights[i] += state.weight_velocity[i];
    model.biases[i] += state.bias_velocity[i];
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("momentum must lie in [0, 1)");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ArgumentError("dropout must lie in [0, 1)");
}

EvalStats evaluate(const MlpModel& model, const TrainingData& data) {
  if (data.size() == 0) throw ArgumentError("cannot evaluate on an empty dataset");
  check_data(model, data, "evaluate");
  constexpr Eigen::Index kChunk = 4096;
  double loss = 0.0;
  std::size_t correct = 0;
  const Eigen::Index n = data.features.cols();
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - start);
    const auto cache = forward_batch(model, data.features.middleCols(start, len), Mode::Infer);
    for (Eigen::Index b = 0; b < len; ++b) {
      const int y = data.labels[static_cast<std::size_t>(start + b)];
      loss += -std::log(std::max(cache.probs(y, b), kProbFloor));
      if (argmax(cache.probs.col(b)) == y) ++correct;
    }
  }
  return {loss / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)};
}

std::vector<int> predict(const MlpModel& model, const Eigen::MatrixXd& x) {
  constexpr Eigen::Index kChunk = 4096;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index start = 0; start < x.cols(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, x.cols() - start);
    const auto cache = forward_batch(model, x.middleCols(start, len), Mode::Infer);
    for (Eigen::Index b = 0; b < len; ++b) out.push_back(static_cast<int>(argmax(cache.probs.col(b))));
  }
  return out;
}

TrainResult train(MlpModel model, const TrainingData& train_set, const TrainingData& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.size() == 0) throw ArgumentError("training set is empty");
  model.dropout_p = cfg.dropout_p;
  model.dropout_input = cfg.dropout_input;
  model.validate();
  check_data(model, train_set, "training set");
  if (val_set.size() > 0) check_data(model, val_set, "validation set");

  Rng shuffle_rng = Rng::stream(cfg.seed, kShuffleStream, 0);
  Rng dropout_rng = Rng::stream(cfg.seed, kDropoutStream, 0);
  OptimizerState opt = OptimizerState::zeros_like(model);

  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.history.epochs.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    std::size_t correct = 0;
    std::vector<int> labels;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n - start);
      const std::span<const std::size_t> idx(order.data() + start, len);
      labels.resize(len);
      for (std::size_t b = 0; b < len; ++b) labels[b] = train_set.labels[idx[b]];

      const ForwardCache cache = forward_batch(model, gather_columns(train_set.features, idx), Mode::Train,
                                               &dropout_rng);
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < len; ++b) {
        const auto col = static_cast<Eigen::Index>(b);
        batch_loss += -std::log(std::max(cache.probs(labels[b], col), kProbFloor));
        if (argmax(cache.probs.col(col)) == labels[b]) ++correct;
      }
      batch_loss /= static_cast<double>(len);
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("non-finite training loss in epoch " + std::to_string(epoch + 1));
      }
      loss_sum += batch_loss;
      ++batches;

      Gradients g = backward(model, cache, labels);
      const double inv = 1.0 / static_cast<double>(len);
      for (auto& w : g.weights) w *= inv;
      for (auto& b : g.biases) b *= inv;
      sgd_momentum_step(model, g, opt, cfg.learning_rate, cfg.momentum);
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(batches);
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (val_set.size() > 0) {
      const EvalStats v = evaluate(model, val_set);
      stats.val_loss = v.loss;
      stats.val_accuracy = v.accuracy;
    } else {
      stats.val_loss = std::numeric_limits<double>::quiet_NaN();
      stats.val_accuracy = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.epochs.push_back(stats);
    if (on_epoch) on_epoch(epoch + 1, stats);
  }

  snap_to_float(model);
  try {
    model.validate();
  } catch (const ArgumentError& e) {
    throw NumericalError(std::string("training produced an invalid model: ") + e.what());
  }
  result.model = std::move(model);
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> serialize_model(const MlpModel& model) {
  model.validate();
  binio::Writer w;
  w.bytes("PF0M");
  w.u32(kModelFileVersion);
  w.u32(static_cast<std::uint32_t>(model.layer_dims.size()));
  for (int d : model.layer_dims) w.u32(static_cast<std::uint32_t>(d));
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    const auto& W = model.weights[i];
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) w.f32(static_cast<float>(W(r, c)));
    }
    for (Eigen::Index r = 0; r < model.biases[i].size(); ++r) w.f32(static_cast<float>(model.biases[i](r)));
  }
  w.u8(static_cast<std::uint8_t>(model.tags.layout));
  w.u8(static_cast<std::uint8_t>(model.tags.normalization));
  return w.take();
}

MlpModel deserialize_model(std::span<const std::uint8_t> bytes) {
  binio::Reader r(bytes);
  r.expect_magic("PF0M", "model file");
  const auto version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kModelFileVersion) {
    throw FormatError("unsupported model file version " + std::to_string(version), version_at);
  }
  const auto count_at = r.offset();
  const std::uint32_t count = r.u32("layer count");
  if (count < 2 || count > 64) throw FormatError("implausible layer count " + std::to_string(count), count_at);

  MlpModel m;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto at = r.offset();
    const std::uint32_t d = r.u32("layer dim");
    if (d == 0 || d > (1u << 16)) throw FormatError("implausible layer dim " + std::to_string(d), at);
    m.layer_dims.push_back(static_cast<int>(d));
  }
  for (std::size_t i = 0; i + 1 < m.layer_dims.size(); ++i) {
    const int in = m.layer_dims[i];
    const int out = m.layer_dims[i + 1];
    r.need(4ull * static_cast<std::uint64_t>(out) * static_cast<std::uint64_t>(in + 1), "layer parameters");
    Eigen::MatrixXd W(out, in);
    for (int row = 0; row < out; ++row) {
      for (int col = 0; col < in; ++col) W(row, col) = r.f32("weight");
    }
    Eigen::VectorXd b(out);
    for (int row = 0; row < out; ++row) b(row) = r.f32("bias");
    m.weights.push_back(std::move(W));
    m.biases.push_back(std::move(b));
  }
  const auto tags_at = r.offset();
  const std::uint8_t layout = r.u8("feature layout tag");
  const std::uint8_t norm = r.u8("normalization tag");
  if (layout > 1 || norm > 1) throw FormatError("unknown feature tags", tags_at);
  m.tags = {static_cast<FeatureLayout>(layout), static_cast<Normalization>(norm)};
  if (r.remaining() != 0) throw FormatError("trailing bytes after model", r.offset());
  try {
    m.validate();
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("invalid model: ") + e.what(), r.offset());
  }
  return m;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  binio::write_file(path, serialize_model(model));
}

MlpModel load_model(const std::filesystem::path& path) { return deserialize_model(binio::read_file(path)); }

std::string model_hash(const MlpModel& model) { return binio::fnv1a_hex(serialize_model(model)); }

}  // namespace pf0
