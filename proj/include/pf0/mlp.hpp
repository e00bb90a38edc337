#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pf0/features.hpp"
#include "pf0/rng.hpp"

namespace pf0 {

/**
 * Fully connected classifier: ReLU hidden layers, softmax output.
 *
 * weights[i] is out x in for the map from layer_dims[i] to layer_dims[i+1].
 * Dropout (inverted, keep-scaled) follows every hidden activation during
 * training, and the raw input too when dropout_input is set.
 */
struct MlpModel {
  std::vector<int> layer_dims;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  double dropout_p = 0.5;
  bool dropout_input = false;
  FeatureTags tags;  ///< featurization the model was trained on

  int input_dim() const { return layer_dims.front(); }
  int num_classes() const { return layer_dims.back(); }
  std::size_t num_layers() const { return weights.size(); }

  /// Throws ArgumentError on inconsistent shapes or non-finite parameters.
  void validate() const;
};

inline const std::vector<int> kDefaultLayerDims = {kFeatureDim, 128, 128, 4};

/// He initialization: weights ~ N(0, 2 / fan_in), biases zero. Needs >= 2 dims.
MlpModel init_model(std::span<const int> layer_dims, std::uint64_t seed, double dropout_p = 0.5);

enum class Mode { Train, Infer };

/// Activations of one forward pass over a batch (one column per instance).
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  ///< input of weight layer i, after dropout
  std::vector<Eigen::MatrixXd> pre;     ///< pre-activation of hidden layer i
  std::vector<Eigen::MatrixXd> masks;   ///< keep-scale mask of inputs[i]; empty if not dropped
  Eigen::MatrixXd probs;                ///< num_classes x batch
};

/// Batched forward. `rng` is only used (and required) in Train mode with dropout.
ForwardCache forward_batch(const MlpModel& model, const Eigen::MatrixXd& x, Mode mode, Rng* rng = nullptr);

struct ForwardResult {
  Eigen::VectorXd probs;
  ForwardCache cache;
};

/// Single-instance forward. Throws ArgumentError on wrong length or non-finite input.
ForwardResult forward(const MlpModel& model, std::span<const double> x, Mode mode, Rng* rng = nullptr);

/// -log(max(p_label, 1e-12)).
double loss_ce(std::span<const double> probs, int label);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Gradient of the summed cross-entropy over the batch in `cache`.
Gradients backward(const MlpModel& model, const ForwardCache& cache, std::span<const int> labels);

struct OptimizerState {
  std::vector<Eigen::MatrixXd> weight_velocity;
  std::vector<Eigen::VectorXd> bias_velocity;

  static OptimizerState zeros_like(const MlpModel& model);
};

/// v <- momentum * v - lr * g;  theta <- theta + v.
void sgd_momentum_step(MlpModel& model, const Gradients& grads, OptimizerState& state, double lr,
                       double momentum);

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int batch_size = 64;
  std::uint64_t seed = 1;
  double dropout_p = 0.5;
  bool dropout_input = false;

  void validate() const;
};

/// Features as columns (feature_dim x N) with one label per column.
struct TrainingData {
  Eigen::MatrixXd features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

struct EpochStats {
  double train_loss = 0.0;      ///< mean over the epoch's mini-batches, dropout active
  double train_accuracy = 0.0;
  double val_loss = 0.0;        ///< NaN when no validation data was given
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

struct TrainResult {
  MlpModel model;
  TrainHistory history;
};

using EpochCallback = std::function<void(int epoch, const EpochStats&)>;

/**
 * Shuffled mini-batch SGD with momentum on the mean batch cross-entropy.
 *
 * Deterministic for a given seed. The last partial batch of an epoch is kept.
 * Final parameters are rounded to float precision, which makes the saved
 * model file reproduce the returned model exactly. Throws ArgumentError on an
 * empty training set and NumericalError if the loss becomes non-finite.
 */
TrainResult train(MlpModel model, const TrainingData& train_set, const TrainingData& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Mean loss and accuracy in Infer mode.
EvalStats evaluate(const MlpModel& model, const TrainingData& data);

/// argmax of the Infer-mode output per column.
std::vector<int> predict(const MlpModel& model, const Eigen::MatrixXd& x);

// ---------------------------------------------------------------------------
// Model file: "PF0M", u32 version, u32 layer count, u32 dims..., then per weight
// layer its row-major f32 weights followed by its f32 biases; then u8 feature
// layout and u8 normalization tags. All little-endian.

inline constexpr std::uint32_t kModelFileVersion = 1;

std::vector<std::uint8_t> serialize_model(const MlpModel& model);
MlpModel deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const MlpModel& model, const std::filesystem::path& path);
/// Throws FormatError (with byte offset) on a malformed, truncated or foreign file.
MlpModel load_model(const std::filesystem::path& path);

/// FNV-1a of the serialized model.
std::string model_hash(const MlpModel& model);

}  // namespace pf0
