#include "pf0/eval.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "pf0/dft_decoder.hpp"
#include "pf0/error.hpp"

namespace pf0 {

namespace {

constexpr std::uint64_t kSweepStream = 0x53574550;  // "SWEP"

std::string format_snr(double snr) {
  if (std::isinf(snr)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", snr);
  return buf;
}

std::string format_acc(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", a);
  return buf;
}

}  // namespace

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ArgumentError("predictions and labels differ in length");
  if (labels.empty()) throw ArgumentError("accuracy of an empty set is undefined");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predictions[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

std::uint64_t ConfusionMatrix::row_sum(int truth) const {
  std::uint64_t s = 0;
  for (int c = 0; c < k_; ++c) s += at(truth, c);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto v : counts_) s += v;
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (int i = 0; i < k_; ++i) s += at(i, i);
  return s;
}

bool ConfusionMatrix::diagonally_dominant() const {
  for (int r = 0; r < k_; ++r) {
    if (at(r, r) <= row_sum(r) - at(r, r)) return false;
  }
  return true;
}

void ConfusionMatrix::write_csv(std::ostream& out, std::string_view title) const {
  out << "# " << title << '\n' << "true\\pred";
  for (int c = 0; c < k_; ++c) out << ',' << c;
  out << '\n';
  for (int r = 0; r < k_; ++r) {
    out << r;
    for (int c = 0; c < k_; ++c) out << ',' << at(r, c);
    out << '\n';
  }
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, int k) {
  if (k < 1) throw ArgumentError("class count must be positive");
  if (predictions.size() != labels.size()) throw ArgumentError("predictions and labels differ in length");
  ConfusionMatrix m(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k || predictions[i] < 0 || predictions[i] >= k) {
      throw ArgumentError("class index out of range at position " + std::to_string(i));
    }
    m.add(labels[i], predictions[i]);
  }
  return m;
}

std::vector<int> labels_of(const LabeledDataset& data) {
  std::vector<int> y;
  y.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.instances[i].label) throw ArgumentError("instance " + std::to_string(i) + " has no label");
    y.push_back(*data.instances[i].label);
  }
  return y;
}

std::vector<int> decode_dataset_dft(const LabeledDataset& data, const DftContext& ctx) {
  std::vector<int> out;
  out.reserve(data.size());
  std::array<double, kFeatureDim> f{};
  for (const auto& inst : data.instances) {
    std::copy(inst.features.begin(), inst.features.end(), f.begin());
    Format0Signal sig;
    sig.symbols.push_back(defeaturize(f, data.tags.layout));
    Pucch0Config cfg;
    cfg.m0 = ctx.m0;
    cfg.slot = inst.slot;
    cfg.start_symbol = inst.start_symbol;
    cfg.num_symbols = 1;
    cfg.hopping_id = ctx.hopping_id;
    cfg.group_u = ctx.group_u;
    const DftDecision d = decode_dft(sig, cfg, ctx.format);
    out.push_back(mcs_to_class(ctx.format, d.mcs));
  }
  return out;
}

std::vector<int> decode_dataset_nn(const MlpModel& model, const LabeledDataset& data) {
  if (!(model.tags == data.tags)) {
    throw ConfigError("model expects " + std::string(to_string(model.tags.layout)) + "/" +
                      std::string(to_string(model.tags.normalization)) + " features, dataset has " +
                      std::string(to_string(data.tags.layout)) + "/" +
                      std::string(to_string(data.tags.normalization)));
  }
  if (model.num_classes() != static_cast<int>(data.class_count)) {
    throw ConfigError("model has " + std::to_string(model.num_classes()) + " outputs, dataset has " +
                      std::to_string(data.class_count) + " classes");
  }
  return predict(model, data.feature_matrix());
}

// ---------------------------------------------------------------------------

std::optional<double> SweepResult::accuracy_at(double snr_db, std::string_view decoder) const {
  for (const auto& r : rows) {
    if (r.snr_db == snr_db && r.decoder == decoder) return r.accuracy;
  }
  return std::nullopt;
}

void SweepResult::write_csv(std::ostream& out) const {
  out << "snr_db,decoder,accuracy,n,seed,model_hash\n";
  for (const auto& r : rows) {
    out << format_snr(r.snr_db) << ',' << r.decoder << ',' << format_acc(r.accuracy) << ',' << r.n << ','
        << r.seed << ',' << r.model_hash << '\n';
  }
}

void SweepResult::write_plot_data(std::ostream& out) const {
  out << "# snr_db nn dft\n";
  for (const auto& p : points) {
    const auto nn = accuracy_at(p.snr_db, kDecoderNn);
    const auto dft = accuracy_at(p.snr_db, kDecoderDft);
    out << format_snr(p.snr_db) << ' ' << format_acc(nn.value_or(NAN)) << ' ' << format_acc(dft.value_or(NAN))
        << '\n';
  }
}

void SweepResult::write_confusion_csv(std::ostream& out) const {
  bool first = true;
  for (const auto& p : points) {
    if (!first) out << '\n';
    first = false;
    p.nn.write_csv(out, "nn snr_db=" + format_snr(p.snr_db));
    out << '\n';
    p.dft.write_csv(out, "dft snr_db=" + format_snr(p.snr_db));
  }
}

std::string gnuplot_script(std::string_view data_file, std::string_view png_file) {
  std::string s;
  s += "set terminal pngcairo size 800,600\n";
  s += "set output '" + std::string(png_file) + "'\n";
  s += "set xlabel 'SNR (dB)'\n";
  s += "set ylabel 'Accuracy'\n";
  s += "set grid\n";
  s += "set key bottom right\n";
  s += "plot '" + std::string(data_file) + "' using 1:2 with linespoints title 'NN', \\\n";
  s += "     '' using 1:3 with linespoints title 'DFT'\n";
  return s;
}

std::uint64_t SweepConfig::point_seed(double snr_db) const {
  return Rng::derive_seed(test_seed, kSweepStream, std::bit_cast<std::uint64_t>(snr_db));
}

SweepResult sweep(const MlpModel& model, const SweepConfig& cfg) {
  if (cfg.snrs.empty()) throw ArgumentError("sweep needs at least one SNR");
  if (cfg.count < 1) throw ArgumentError("sweep needs at least one test instance per SNR");
  if (cfg.train_seed) {
    if (*cfg.train_seed == cfg.test_seed) {
      throw ConfigError("test seed equals the training seed " + std::to_string(*cfg.train_seed));
    }
    for (double snr : cfg.snrs) {
      if (cfg.point_seed(snr) == *cfg.train_seed) {
        throw ConfigError("test set seed at " + format_snr(snr) + " dB collides with the training seed");
      }
    }
  }
  const std::string hash = model_hash(model);
  const DftContext ctx{cfg.base.m0, cfg.base.hopping_id, cfg.base.group_u, cfg.base.format};

  SweepResult res;
  for (double snr : cfg.snrs) {
    if (std::isnan(snr) || snr == -std::numeric_limits<double>::infinity()) throw ArgumentError("bad sweep SNR");
    GenerationConfig g = cfg.base;
    g.count = cfg.count;
    g.snr = std::isinf(snr) ? SnrSpec::noiseless() : SnrSpec::db(snr);
    g.seed = cfg.point_seed(snr);
    g.seed_namespace = SeedNamespace::Test;
    const LabeledDataset test = generate_dataset(g);
    const std::vector<int> y = labels_of(test);

    const std::vector<int> nn = decode_dataset_nn(model, test);
    const std::vector<int> dft = decode_dataset_dft(test, ctx);
    const int k = static_cast<int>(test.class_count);
    res.rows.push_back({snr, std::string(kDecoderNn), accuracy(nn, y), y.size(), g.seed, hash});
    res.rows.push_back({snr, std::string(kDecoderDft), accuracy(dft, y), y.size(), g.seed, hash});
    res.points.push_back({snr, confusion(nn, y, k), confusion(dft, y, k)});
  }
  return res;
}

std::string hidden_label(std::span<const int> hidden) {
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(hidden[i]);
  }
  return s.empty() ? "none" : s;
}

std::vector<SizeSweepEntry> size_sweep(const LabeledDataset& train_set, const LabeledDataset& val_set,
                                       const SizeSweepConfig& cfg) {
  if (cfg.hidden.empty()) throw ArgumentError("size sweep needs at least one configuration");
  const TrainingData tr = train_set.to_training_data();
  const TrainingData va = val_set.size() ? val_set.to_training_data() : TrainingData{};
  std::vector<SizeSweepEntry> out;
  for (const auto& hidden : cfg.hidden) {
    std::vector<int> dims{kFeatureDim};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(static_cast<int>(train_set.class_count));
    MlpModel m = init_model(dims, cfg.train.seed, cfg.train.dropout_p);
    m.tags = train_set.tags;
    TrainResult r = train(std::move(m), tr, va, cfg.train);
    SizeSweepEntry e{hidden, model_hash(r.model), sweep(r.model, cfg.sweep)};
    out.push_back(std::move(e));
  }
  return out;
}

void write_size_sweep_csv(std::span<const SizeSweepEntry> entries, std::ostream& out) {
  out << "hidden,snr_db,decoder,accuracy,n,seed,model_hash\n";
  for (const auto& e : entries) {
    for (const auto& r : e.result.rows) {
      out << hidden_label(e.hidden) << ',' << format_snr(r.snr_db) << ',' << r.decoder << ','
          << format_acc(r.accuracy) << ',' << r.n << ',' << r.seed << ',' << r.model_hash << '\n';
    }
  }
}

}  // namespace pf0
