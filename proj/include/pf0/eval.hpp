#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pf0/dataset.hpp"
#include "pf0/mlp.hpp"

namespace pf0 {

/// Fraction of positions where prediction == label. Throws ArgumentError on
/// empty input or a length mismatch.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

/// Rows are true classes, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int k) : k_(k), counts_(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 0) {}

  int classes() const { return k_; }
  std::uint64_t at(int truth, int predicted) const { return counts_[index(truth, predicted)]; }
  void add(int truth, int predicted) { ++counts_[index(truth, predicted)]; }

  std::uint64_t row_sum(int truth) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;

  /// Every row's diagonal entry exceeds the sum of that row's other entries.
  bool diagonally_dominant() const;

  /// "# title" line, header "true\\pred,0,1,..", then one row per class.
  void write_csv(std::ostream& out, std::string_view title) const;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(c);
  }

  int k_;
  std::vector<std::uint64_t> counts_;
};

/// Throws ArgumentError on a length mismatch or a label/prediction outside [0, k).
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, int k);

/// Stored labels; ArgumentError if any instance is unlabeled.
std::vector<int> labels_of(const LabeledDataset& data);

/// Scheduling the DFT receiver needs besides each instance's own slot and symbol.
struct DftContext {
  int m0 = 0;
  int hopping_id = 0;
  int group_u = 0;
  UciFormat format = UciFormat::Harq1PlusSr;
};

/// Class index chosen by the correlation receiver for every instance.
std::vector<int> decode_dataset_dft(const LabeledDataset& data, const DftContext& ctx);

/// Class index chosen by the network. ConfigError when the model was trained on
/// different feature tags or a different class count.
std::vector<int> decode_dataset_nn(const MlpModel& model, const LabeledDataset& data);

inline constexpr std::string_view kDecoderNn = "nn";
inline constexpr std::string_view kDecoderDft = "dft";

struct SweepRow {
  double snr_db = 0.0;  ///< +inf for a noiseless point
  std::string decoder;
  double accuracy = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string model_hash;
};

struct SweepPoint {
  double snr_db;
  ConfusionMatrix nn;
  ConfusionMatrix dft;
};

struct SweepResult {
  std::vector<SweepRow> rows;  ///< ordered by SNR, then nn before dft
  std::vector<SweepPoint> points;

  std::optional<double> accuracy_at(double snr_db, std::string_view decoder) const;

  /// Columns snr_db, decoder, accuracy, n, seed, model_hash.
  void write_csv(std::ostream& out) const;
  /// Whitespace table "snr_db nn dft" for gnuplot.
  void write_plot_data(std::ostream& out) const;
  /// Confusion blocks for every point, nn then dft.
  void write_confusion_csv(std::ostream& out) const;
};

std::string gnuplot_script(std::string_view data_file, std::string_view png_file);

struct SweepConfig {
  std::vector<double> snrs = {0, 5, 10, 15, 20};
  std::size_t count = 10000;  ///< test instances per SNR
  GenerationConfig base;      ///< recipe of the test sets; snr, seed and namespace are overridden
  std::uint64_t test_seed = 2;
  std::optional<std::uint64_t> train_seed;  ///< seed of the training data, for the leakage guard

  /// Seed of the test set at one SNR; depends on test_seed and the SNR only.
  std::uint64_t point_seed(double snr_db) const;
};

/**
 * Fresh test set per SNR (Test seed namespace), both decoders on the same
 * instances. Throws ConfigError when a test seed coincides with train_seed.
 */
SweepResult sweep(const MlpModel& model, const SweepConfig& cfg);

struct SizeSweepConfig {
  std::vector<std::vector<int>> hidden = {{128, 128}, {32, 32}};
  TrainConfig train;
  SweepConfig sweep;
};

struct SizeSweepEntry {
  std::vector<int> hidden;
  std::string model_hash;
  SweepResult result;
};

/// Trains one model per hidden-layer list on identical data and seeds, then sweeps each.
std::vector<SizeSweepEntry> size_sweep(const LabeledDataset& train_set, const LabeledDataset& val_set,
                                       const SizeSweepConfig& cfg);

/// Columns hidden, snr_db, decoder, accuracy, n, seed, model_hash; hidden as "32x32".
void write_size_sweep_csv(std::span<const SizeSweepEntry> entries, std::ostream& out);

std::string hidden_label(std::span<const int> hidden);

}  // namespace pf0
