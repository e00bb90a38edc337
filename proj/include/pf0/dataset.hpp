#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "pf0/channel.hpp"
#include "pf0/features.hpp"
#include "pf0/mlp.hpp"
#include "pf0/pucch0.hpp"

namespace pf0 {

/// Seed namespaces keep training data, test data and captures independent
/// even when the numeric seeds coincide.
enum class SeedNamespace : std::uint64_t { Train = 1, Test = 2, Capture = 3 };

struct Instance {
  std::array<float, kFeatureDim> features{};
  std::optional<std::uint8_t> label;  ///< class index; empty for unlabeled captures
  std::uint8_t slot = 0;
  std::uint8_t start_symbol = 0;      ///< symbol of the slot this instance was taken from
  float snr_db = 0.0f;                ///< +inf for noiseless, NaN when unknown
};

struct LabeledDataset {
  std::vector<Instance> instances;
  std::uint32_t class_count = 4;
  FeatureTags tags;

  std::size_t size() const { return instances.size(); }
  std::vector<std::size_t> class_histogram() const;
  bool fully_labeled() const;

  /// Features as double columns. Throws ArgumentError if any instance is unlabeled.
  TrainingData to_training_data() const;
  /// Features as double columns, labels ignored.
  Eigen::MatrixXd feature_matrix() const;
};

/// Recipe for synthetic Format 0 data. One instance per occupied symbol.
struct GenerationConfig {
  std::size_t count = 200000;  ///< number of instances
  SnrSpec snr = SnrSpec::db(10.0);
  ChannelConfig channel;
  std::vector<int> slots = {13, 14};
  int m0 = 0;
  // With hopping id 0, symbols 0 and 1 give slots 13 and 14 the same n_cs mod 12,
  // so the slot-blind network sees one set of four shifts rather than two
  // interleaved sets.
  int start_symbol = 0;
  int num_symbols = 1;
  int hopping_id = 0;
  int group_u = 0;
  UciFormat format = UciFormat::Harq1PlusSr;
  std::uint64_t seed = 1;
  SeedNamespace seed_namespace = SeedNamespace::Train;
  FeatureTags tags;

  void validate() const;
  Pucch0Config schedule(int slot) const;
};

/// One simulated transmission; exposed so label consistency can be checked.
struct Transmission {
  UciContent uci;
  int label = 0;
  int slot = 0;
  Format0Signal sent;
  Format0Signal received;
};

/// Transmission `index` of the recipe; depends only on (seed, namespace, index).
Transmission draw_transmission(const GenerationConfig& cfg, std::uint64_t index);

LabeledDataset generate_dataset(const GenerationConfig& cfg);

/**
 * Checks whether a slot-blind classifier can separate the classes: returns the
 * first pair of schedules (slot, symbol) for which one received cyclic shift
 * maps to two different labels, or nullopt when the labelling is consistent.
 */
struct ShiftAmbiguity {
  int slot_a, symbol_a, slot_b, symbol_b;
};
std::optional<ShiftAmbiguity> find_shift_ambiguity(const GenerationConfig& cfg);

/// Shuffled disjoint split; the first part gets floor(fraction * N) instances.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double train_fraction,
                                                std::uint64_t seed);

// Dataset file: "PF0D", u32 version, u64 count, u32 feature dim, u32 class count,
// u8 layout tag, u8 normalization tag, then per record 24 f32 features, u8 label
// (0xFF = unlabeled), u8 slot, u8 start symbol, f32 snr_db. Little-endian.
inline constexpr std::uint32_t kDatasetFileVersion = 1;

std::vector<std::uint8_t> serialize_dataset(const LabeledDataset& data);
LabeledDataset deserialize_dataset(std::span<const std::uint8_t> bytes);
/// Rejects an empty dataset.
void write_dataset(const LabeledDataset& data, const std::filesystem::path& path);
LabeledDataset read_dataset(const std::filesystem::path& path);

void write_dataset_csv(const LabeledDataset& data, std::ostream& out);

}  // namespace pf0
