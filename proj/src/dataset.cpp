#include "pf0/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <thread>

#include "pf0/binio.hpp"
#include "pf0/error.hpp"

namespace pf0 {

namespace {

constexpr std::uint8_t kUnlabeled = 0xFF;
constexpr std::uint64_t kSplitStream = 0x53504c54;  // "SPLT"
constexpr std::size_t kRecordBytes = kFeatureDim * 4 + 3 + 4;

Instance make_instance(const RbSamples& rx, const FeatureTags& tags, std::optional<int> label, int slot,
                       int symbol, float snr_db) {
  Instance inst;
  const FeatureVector f = featurize(rx, tags);
  for (int i = 0; i < kFeatureDim; ++i) inst.features[i] = static_cast<float>(f[i]);
  if (label) inst.label = static_cast<std::uint8_t>(*label);
  inst.slot = static_cast<std::uint8_t>(slot);
  inst.start_symbol = static_cast<std::uint8_t>(symbol);
  inst.snr_db = snr_db;
  return inst;
}

}  // namespace

std::vector<std::size_t> LabeledDataset::class_histogram() const {
  std::vector<std::size_t> h(class_count, 0);
  for (const auto& inst : instances) {
    if (inst.label && *inst.label < class_count) ++h[*inst.label];
  }
  return h;
}

bool LabeledDataset::fully_labeled() const {
  return std::all_of(instances.begin(), instances.end(), [](const Instance& i) { return i.label.has_value(); });
}

Eigen::MatrixXd LabeledDataset::feature_matrix() const {
  Eigen::MatrixXd x(kFeatureDim, static_cast<Eigen::Index>(instances.size()));
  for (std::size_t c = 0; c < instances.size(); ++c) {
    for (int r = 0; r < kFeatureDim; ++r) x(r, static_cast<Eigen::Index>(c)) = instances[c].features[r];
  }
  return x;
}

TrainingData LabeledDataset::to_training_data() const {
  TrainingData d;
  d.features = feature_matrix();
  d.labels.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!instances[i].label) throw ArgumentError("instance " + std::to_string(i) + " is unlabeled");
    d.labels.push_back(*instances[i].label);
  }
  return d;
}

// ---------------------------------------------------------------------------

void GenerationConfig::validate() const {
  if (count < 1) throw ArgumentError("count must be >= 1");
  if (slots.empty()) throw ArgumentError("slot set must not be empty");
  for (int s : slots) schedule(s).validate();
  channel.validate();
  (void)snr.noise_variance();
  if (candidate_shifts(format).empty()) throw ConfigError("format has no candidate shifts");
}

Pucch0Config GenerationConfig::schedule(int slot) const {
  Pucch0Config c;
  c.m0 = m0;
  c.slot = slot;
  c.start_symbol = start_symbol;
  c.num_symbols = num_symbols;
  c.hopping_id = hopping_id;
  c.group_u = group_u;
  return c;
}

Transmission draw_transmission(const GenerationConfig& cfg, std::uint64_t index) {
  Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(cfg.seed_namespace), index);
  const auto cands = candidate_shifts(cfg.format);
  const auto label = static_cast<int>(rng.below(cands.size()));
  const int slot = cfg.slots[rng.below(cfg.slots.size())];
  Transmission t{mcs_to_uci(cfg.format, cands[static_cast<std::size_t>(label)]), label, slot, {}, {}};
  t.sent = generate_format0(cfg.schedule(t.slot), t.uci);
  const RbSamples H = realize_channel(cfg.channel, rng);
  t.received = apply_channel(t.sent, H, cfg.snr, rng);
  return t;
}

LabeledDataset generate_dataset(const GenerationConfig& cfg) {
  cfg.validate();
  LabeledDataset ds;
  ds.class_count = static_cast<std::uint32_t>(candidate_shifts(cfg.format).size());
  ds.tags = cfg.tags;
  ds.instances.resize(cfg.count);

  const float snr_tag = cfg.snr.snr_db ? static_cast<float>(*cfg.snr.snr_db)
                                       : std::numeric_limits<float>::infinity();
  const auto per_tx = static_cast<std::size_t>(cfg.num_symbols);
  const std::size_t transmissions = (cfg.count + per_tx - 1) / per_tx;

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Transmission t = draw_transmission(cfg, i);
      for (std::size_t l = 0; l < per_tx; ++l) {
        const std::size_t slot_idx = i * per_tx + l;
        if (slot_idx >= cfg.count) break;
        ds.instances[slot_idx] = make_instance(t.received.symbols[l], cfg.tags, t.label, t.slot,
                                               cfg.start_symbol + static_cast<int>(l), snr_tag);
      }
    }
  };

  const std::size_t threads =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, transmissions / 4096));
  if (threads <= 1) {
    work(0, transmissions);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (transmissions + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(transmissions, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return ds;
}

std::optional<ShiftAmbiguity> find_shift_ambiguity(const GenerationConfig& cfg) {
  const auto cands = candidate_shifts(cfg.format);
  struct Owner {
    int label, slot, symbol;
  };
  std::map<int, Owner> owner;
  for (int slot : cfg.slots) {
    for (int l = 0; l < cfg.num_symbols; ++l) {
      const int symbol = cfg.start_symbol + l;
      const int ncs = compute_ncs(cfg.hopping_id, slot, symbol);
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const int a = alpha_index(cfg.m0, cands[c], ncs);
        const auto [it, inserted] = owner.try_emplace(a, Owner{static_cast<int>(c), slot, symbol});
        if (!inserted && it->second.label != static_cast<int>(c)) {
          return ShiftAmbiguity{it->second.slot, it->second.symbol, slot, symbol};
        }
      }
    }
  }
  return std::nullopt;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double train_fraction,
                                                std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train fraction must lie in (0, 1)");
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::stream(seed, kSplitStream, 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  LabeledDataset a, b;
  a.class_count = b.class_count = data.class_count;
  a.tags = b.tags = data.tags;
  a.instances.reserve(n_train);
  b.instances.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? a : b).instances.push_back(data.instances[order[i]]);
  }
  return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> serialize_dataset(const LabeledDataset& data) {
  if (data.instances.empty()) throw ArgumentError("refusing to write an empty dataset");
  binio::Writer w;
  w.bytes("PF0D");
  w.u32(kDatasetFileVersion);
  w.u64(data.instances.size());
  w.u32(kFeatureDim);
  w.u32(data.class_count);
  w.u8(static_cast<std::uint8_t>(data.tags.layout));
  w.u8(static_cast<std::uint8_t>(data.tags.normalization));
  for (const auto& inst : data.instances) {
    for (float f : inst.features) w.f32(f);
    w.u8(inst.label ? *inst.label : kUnlabeled);
    w.u8(inst.slot);
    w.u8(inst.start_symbol);
    w.f32(inst.snr_db);
  }
  return w.take();
}

LabeledDataset deserialize_dataset(std::span<const std::uint8_t> bytes) {
  binio::Reader r(bytes);
  r.expect_magic("PF0D", "dataset file");
  const auto version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kDatasetFileVersion) {
    throw FormatError("unsupported dataset file version " + std::to_string(version), version_at);
  }
  const auto count_at = r.offset();
  const std::uint64_t count = r.u64("instance count");
  const auto dim_at = r.offset();
  const std::uint32_t dim = r.u32("feature dim");
  if (dim != kFeatureDim) throw FormatError("feature dim " + std::to_string(dim) + " (expected 24)", dim_at);
  const auto classes_at = r.offset();
  const std::uint32_t classes = r.u32("class count");
  if (classes == 0 || classes > 12) throw FormatError("implausible class count " + std::to_string(classes), classes_at);
  const auto tags_at = r.offset();
  const std::uint8_t layout = r.u8("layout tag");
  const std::uint8_t norm = r.u8("normalization tag");
  if (layout > 1 || norm > 1) throw FormatError("unknown feature tags", tags_at);
  if (count == 0) throw FormatError("dataset declares zero instances", count_at);

  const std::uint64_t body = r.remaining();
  if (body / kRecordBytes < count) {
    throw FormatError("length field says " + std::to_string(count) + " records but record " +
                          std::to_string(body / kRecordBytes) + " is truncated",
                      r.offset() + (body / kRecordBytes) * kRecordBytes);
  }
  if (body != count * kRecordBytes) {
    throw FormatError("length field says " + std::to_string(count) + " records but data continues at record " +
                          std::to_string(count),
                      r.offset() + count * kRecordBytes);
  }

  LabeledDataset ds;
  ds.class_count = classes;
  ds.tags = {static_cast<FeatureLayout>(layout), static_cast<Normalization>(norm)};
  ds.instances.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Instance& inst = ds.instances[i];
    const auto rec_at = r.offset();
    for (auto& f : inst.features) f = r.f32("feature");
    const std::uint8_t label = r.u8("label");
    if (label != kUnlabeled) {
      if (label >= classes) {
        throw FormatError("record " + std::to_string(i) + " has label " + std::to_string(label) +
                              " >= class count",
                          rec_at);
      }
      inst.label = label;
    }
    inst.slot = r.u8("slot");
    inst.start_symbol = r.u8("start symbol");
    inst.snr_db = r.f32("snr");
    if (inst.start_symbol >= kSymbolsPerSlot) {
      throw FormatError("record " + std::to_string(i) + " has symbol index >= 14", rec_at);
    }
  }
  return ds;
}

void write_dataset(const LabeledDataset& data, const std::filesystem::path& path) {
  binio::write_file(path, serialize_dataset(data));
}

LabeledDataset read_dataset(const std::filesystem::path& path) {
  return deserialize_dataset(binio::read_file(path));
}

void write_dataset_csv(const LabeledDataset& data, std::ostream& out) {
  out << "label,slot,start_symbol,snr_db";
  for (int i = 0; i < kFeatureDim; ++i) out << ",f" << i;
  out << '\n';
  char buf[32];
  for (const auto& inst : data.instances) {
    if (inst.label) {
      out << static_cast<int>(*inst.label);
    }
    out << ',' << static_cast<int>(inst.slot) << ',' << static_cast<int>(inst.start_symbol) << ',';
    std::snprintf(buf, sizeof buf, "%g", static_cast<double>(inst.snr_db));
    out << buf;
    for (float f : inst.features) {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(f));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace pf0
