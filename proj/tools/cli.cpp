#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include "pf0/dataset.hpp"
#include "pf0/dft_decoder.hpp"
#include "pf0/error.hpp"
#include "pf0/eval.hpp"
#include "pf0/mlp.hpp"
#include "pf0/ofdm.hpp"

namespace pf0::cli {

namespace {

/// Input data that parses but cannot be used (unlabeled training data and the like).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double parse_snr(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "noiseless") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(v)) throw ArgumentError("bad SNR '" + s + "'");
  return v;
}

SnrSpec snr_spec(double v) { return std::isinf(v) ? SnrSpec::noiseless() : SnrSpec::db(v); }

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot create " + path, 0);
  return f;
}

void write_manifest(const std::string& artifact, const CLI::App& cmd) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  auto f = open_out(artifact + ".manifest");
  f << "# pf0 " << cmd.get_name() << "\n";
  f << "# created " << stamp << "\n";
  f << cmd.config_to_str(true, false);
}

FeatureTags parse_tags(const std::string& layout, const std::string& normalize) {
  FeatureTags t;
  t.layout = layout == "interleaved" ? FeatureLayout::Interleaved : FeatureLayout::Concatenated;
  t.normalization = normalize == "off" ? Normalization::None : Normalization::UnitPower;
  return t;
}

// ---------------------------------------------------------------------------
// Flag groups shared between commands

struct TagFlags {
  std::string layout = "concat";
  std::string normalize = "on";

  void add(CLI::App* app) {
    app->add_option("--layout", layout, "Feature order")->check(CLI::IsMember({"concat", "interleaved"}))
        ->capture_default_str();
    app->add_option("--normalize", normalize, "Per-instance unit-power scaling")
        ->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  }
  FeatureTags tags() const { return parse_tags(layout, normalize); }
};

struct ScheduleFlags {
  int m0 = 0;
  int hopping_id = 0;
  int group = 0;
  std::string format = "harq1sr";

  void add(CLI::App* app) {
    app->add_option("--m0", m0, "Initial cyclic shift")->capture_default_str();
    app->add_option("--hopping-id", hopping_id, "Cyclic-shift hopping identity")->capture_default_str();
    app->add_option("--group", group, "Sequence group u")->capture_default_str();
    app->add_option("--format", format, "UCI content: harq1, harq2, sr, harq1sr, harq2sr")
        ->check(CLI::IsMember({"harq1", "harq2", "sr", "harq1sr", "harq2sr"}))->capture_default_str();
  }
  DftContext context() const { return {m0, hopping_id, group, parse_uci_format(format)}; }
};

struct GenFlags {
  ScheduleFlags sched;
  TagFlags tags;
  std::string channel = "tdlc";
  double delay_spread_ns = 300.0;
  double scs_khz = 30.0;
  std::vector<int> slots = {13, 14};
  int start_symbol = 0;
  int num_symbols = 1;

  void add(CLI::App* app) {
    sched.add(app);
    tags.add(app);
    app->add_option("--channel", channel, "awgn, flat or tdlc")->check(CLI::IsMember({"awgn", "flat", "tdlc"}))
        ->capture_default_str();
    app->add_option("--delay-spread-ns", delay_spread_ns, "TDL-C delay spread")->capture_default_str();
    app->add_option("--scs-khz", scs_khz, "Subcarrier spacing")->capture_default_str();
    app->add_option("--slots", slots, "Slot set, drawn uniformly")->delimiter(',')->capture_default_str();
    app->add_option("--start-symbol", start_symbol, "First symbol of the transmission")->capture_default_str();
    app->add_option("--symbols", num_symbols, "Symbols per transmission (1 or 2)")->capture_default_str();
  }

  GenerationConfig build() const {
    GenerationConfig g;
    g.channel.profile = parse_channel_profile(channel);
    g.channel.delay_spread_s = delay_spread_ns * 1e-9;
    g.channel.subcarrier_spacing_hz = scs_khz * 1e3;
    g.slots = slots;
    g.m0 = sched.m0;
    g.start_symbol = start_symbol;
    g.num_symbols = num_symbols;
    g.hopping_id = sched.hopping_id;
    g.group_u = sched.group;
    g.format = parse_uci_format(sched.format);
    g.tags = tags.tags();
    return g;
  }
};

struct TrainFlags {
  TrainConfig cfg;
  std::vector<int> hidden = {128, 128};
  double train_fraction = 0.75;
  std::uint64_t split_seed = 1;

  void add(CLI::App* app, bool with_hidden) {
    app->add_option("--epochs", cfg.epochs)->capture_default_str();
    app->add_option("--lr", cfg.learning_rate, "Learning rate")->capture_default_str();
    app->add_option("--momentum", cfg.momentum)->capture_default_str();
    app->add_option("--batch", cfg.batch_size, "Mini-batch size")->capture_default_str();
    app->add_option("--seed", cfg.seed, "Initialization, shuffling and dropout seed")->capture_default_str();
    app->add_option("--dropout", cfg.dropout_p, "Dropout probability")->capture_default_str();
    app->add_flag("--dropout-input", cfg.dropout_input, "Also drop input features");
    if (with_hidden) {
      app->add_option("--hidden", hidden, "Hidden layer widths")->delimiter(',')->capture_default_str();
    }
    app->add_option("--train-fraction", train_fraction, "Share of the data used for training")
        ->capture_default_str();
    app->add_option("--split-seed", split_seed, "Seed of the train/validation split")->capture_default_str();
  }
};

struct OfdmFlags {
  int fft_size = 256;
  std::vector<int> cp = {18};
  int k0 = 0;

  void add(CLI::App* app) {
    app->add_option("--fft-size", fft_size)->capture_default_str();
    app->add_option("--cp", cp, "CP lengths, applied cyclically per symbol")->delimiter(',')->capture_default_str();
    app->add_option("--k0", k0, "FFT bin of the first RB subcarrier")->capture_default_str();
  }
  OfdmParams params() const { return {fft_size, cp, k0}; }
};

LabeledDataset load_labeled(const std::string& path) {
  LabeledDataset d = read_dataset(path);
  if (!d.fully_labeled()) throw DataError(path + " contains unlabeled instances");
  return d;
}

void write_history(const std::string& path, const TrainHistory& h) {
  auto f = open_out(path);
  f << "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
  for (std::size_t i = 0; i < h.epochs.size(); ++i) {
    const auto& e = h.epochs[i];
    f << i + 1 << ',' << fmt(e.train_loss) << ',' << fmt(e.train_accuracy) << ',' << fmt(e.val_loss) << ','
      << fmt(e.val_accuracy) << '\n';
  }
}

void warn_ambiguity(const GenerationConfig& g, std::ostream& err) {
  if (const auto a = find_shift_ambiguity(g)) {
    err << "warning: slot " << a->slot_a << " symbol " << a->symbol_a << " and slot " << a->slot_b << " symbol "
        << a->symbol_b << " map different classes onto the same cyclic shift; a slot-blind network cannot "
        << "separate them\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PUCCH Format 0 link lab: dataset generation, training and decoder comparison", "pf0"};
  app.set_config("--config", "", "key=value file; [command] sections, command-line flags take precedence");
  app.require_subcommand(1);

  // gen ---------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate a labeled synthetic dataset");
  GenFlags gen_flags;
  std::size_t gen_count = 200000;
  std::string gen_snr = "10";
  std::uint64_t gen_seed = 1;
  std::string gen_out, gen_csv;
  gen_flags.add(gen);
  gen->add_option("--count", gen_count, "Number of instances")->capture_default_str();
  gen->add_option("--snr-db", gen_snr, "Per-RE SNR in dB, or inf")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "Dataset file")->required();
  gen->add_option("--csv", gen_csv, "Also export the instances as CSV");

  // train -------------------------------------------------------------------
  auto* trn = app.add_subcommand("train", "Train the classifier on a dataset file");
  TrainFlags train_flags;
  std::string train_data, train_out, train_history;
  int log_every = 10;
  train_flags.add(trn, true);
  trn->add_option("--data", train_data, "Labeled dataset file")->required();
  trn->add_option("--out", train_out, "Model file")->required();
  trn->add_option("--history", train_history, "Per-epoch CSV (default: <out>.history.csv)");
  trn->add_option("--log-every", log_every, "Print progress every N epochs (0 = quiet)")->capture_default_str();

  // eval --------------------------------------------------------------------
  auto* evl = app.add_subcommand("eval", "Accuracy and confusion matrices of both receivers on a dataset");
  ScheduleFlags eval_sched;
  std::string eval_model, eval_data, eval_confusion;
  eval_sched.add(evl);
  evl->add_option("--model", eval_model, "Model file (omit for DFT only)");
  evl->add_option("--data", eval_data, "Labeled dataset file")->required();
  evl->add_option("--confusion", eval_confusion, "Write confusion matrices here");

  // sweep -------------------------------------------------------------------
  auto* swp = app.add_subcommand("sweep", "Accuracy versus SNR for the network and the DFT receiver");
  GenFlags sweep_gen;
  std::vector<std::string> sweep_snrs = {"0", "5", "10", "15", "20"};
  std::size_t sweep_count = 10000;
  std::uint64_t sweep_test_seed = 2;
  std::optional<std::uint64_t> sweep_train_seed;
  std::string sweep_model, sweep_out, sweep_plot, sweep_gnuplot, sweep_confusion;
  sweep_gen.add(swp);
  swp->add_option("--model", sweep_model, "Model file")->required();
  swp->add_option("--snrs", sweep_snrs, "SNR points in dB")->delimiter(',')->capture_default_str();
  swp->add_option("--count", sweep_count, "Test instances per SNR")->capture_default_str();
  swp->add_option("--test-seed", sweep_test_seed)->capture_default_str();
  swp->add_option("--train-seed", sweep_train_seed, "Seed of the training data; refuses overlapping test seeds");
  swp->add_option("--out", sweep_out, "Results CSV")->required();
  swp->add_option("--plot-data", sweep_plot, "gnuplot data file");
  swp->add_option("--gnuplot", sweep_gnuplot, "gnuplot script");
  swp->add_option("--confusion", sweep_confusion, "Confusion matrices per SNR");

  // size-sweep --------------------------------------------------------------
  auto* ssw = app.add_subcommand("size-sweep", "Train several network sizes on the same data and sweep each");
  TrainFlags size_train;
  GenFlags size_gen;
  std::vector<std::string> size_hidden = {"128x128", "32x32"};
  std::vector<std::string> size_snrs = {"0", "5", "10", "15", "20"};
  std::size_t size_count = 10000;
  std::uint64_t size_test_seed = 2;
  std::string size_data, size_out;
  size_train.add(ssw, false);
  size_gen.add(ssw);
  ssw->add_option("--data", size_data, "Labeled training dataset")->required();
  ssw->add_option("--configs", size_hidden, "Hidden layer lists such as 128x128,32x32")->delimiter(',')
      ->capture_default_str();
  ssw->add_option("--snrs", size_snrs)->delimiter(',')->capture_default_str();
  ssw->add_option("--count", size_count, "Test instances per SNR")->capture_default_str();
  ssw->add_option("--test-seed", size_test_seed)->capture_default_str();
  ssw->add_option("--out", size_out, "Results CSV")->required();

  // decode ------------------------------------------------------------------
  auto* dec = app.add_subcommand("decode", "Decode every instance and print m_cs and the UCI it carries");
  ScheduleFlags dec_sched;
  std::string dec_rx = "dft", dec_model, dec_data;
  dec_sched.add(dec);
  dec->add_option("--rx", dec_rx, "Receiver")->check(CLI::IsMember({"dft", "nn"}))->capture_default_str();
  dec->add_option("--model", dec_model, "Model file (required with --rx nn)");
  dec->add_option("--data", dec_data, "Dataset file, labels optional")->required();

  // ingest ------------------------------------------------------------------
  auto* ing = app.add_subcommand("ingest", "Convert a PF0Q IQ capture into a dataset file");
  OfdmFlags ing_ofdm;
  TagFlags ing_tags;
  std::string ing_iq, ing_schedule, ing_out, ing_format = "harq1sr";
  int ing_slot = 13;
  std::vector<int> ing_symbols = {0};
  ing_ofdm.add(ing);
  ing_tags.add(ing);
  ing->add_option("--iq", ing_iq, "IQ capture")->required();
  ing->add_option("--schedule", ing_schedule, "CSV slot,symbol,label with one row per captured symbol");
  ing->add_option("--slot", ing_slot, "Slot of every symbol when no schedule is given")->capture_default_str();
  ing->add_option("--symbol-indices", ing_symbols, "Symbol indices, applied cyclically, when no schedule is given")
      ->delimiter(',')->capture_default_str();
  ing->add_option("--format", ing_format, "UCI content, sets the class count")
      ->check(CLI::IsMember({"harq1", "harq2", "sr", "harq1sr", "harq2sr"}))->capture_default_str();
  ing->add_option("--out", ing_out, "Dataset file")->required();

  // synth-iq ----------------------------------------------------------------
  auto* syn = app.add_subcommand("synth-iq", "Write a synthetic IQ capture with its schedule");
  GenFlags syn_gen;
  OfdmFlags syn_ofdm;
  std::size_t syn_tx = 100;
  std::string syn_snr = "inf", syn_out, syn_schedule;
  std::uint64_t syn_seed = 3;
  syn_gen.add(syn);
  syn_ofdm.add(syn);
  syn->add_option("--transmissions", syn_tx)->capture_default_str();
  syn->add_option("--snr-db", syn_snr)->capture_default_str();
  syn->add_option("--seed", syn_seed)->capture_default_str();
  syn->add_option("--out", syn_out, "IQ capture")->required();
  syn->add_option("--schedule-out", syn_schedule, "Schedule CSV")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) {
      GenerationConfig g = gen_flags.build();
      g.count = gen_count;
      g.snr = snr_spec(parse_snr(gen_snr));
      g.seed = gen_seed;
      g.validate();
      warn_ambiguity(g, err);
      const LabeledDataset d = generate_dataset(g);
      write_dataset(d, gen_out);
      if (!gen_csv.empty()) {
        auto f = open_out(gen_csv);
        write_dataset_csv(d, f);
      }
      write_manifest(gen_out, *gen);
      out << "wrote " << d.size() << " instances to " << gen_out << "\n";
      const auto h = d.class_histogram();
      out << "class histogram:";
      for (auto c : h) out << ' ' << c;
      out << "\n";
    } else if (trn->parsed()) {
      const LabeledDataset data = load_labeled(train_data);
      const auto [tr, va] = split(data, train_flags.train_fraction, train_flags.split_seed);
      std::vector<int> dims{kFeatureDim};
      dims.insert(dims.end(), train_flags.hidden.begin(), train_flags.hidden.end());
      dims.push_back(static_cast<int>(data.class_count));
      MlpModel m = init_model(dims, train_flags.cfg.seed, train_flags.cfg.dropout_p);
      m.tags = data.tags;
      const TrainResult r = train(std::move(m), tr.to_training_data(), va.to_training_data(), train_flags.cfg,
                                  [&](int epoch, const EpochStats& s) {
                                    if (log_every > 0 && (epoch % log_every == 0 || epoch == 1)) {
                                      out << "epoch " << epoch << " loss " << fmt(s.train_loss) << " acc "
                                          << fmt(s.train_accuracy) << " val_loss " << fmt(s.val_loss)
                                          << " val_acc " << fmt(s.val_accuracy) << "\n"
                                          << std::flush;
                                    }
                                  });
      save_model(r.model, train_out);
      write_history(train_history.empty() ? train_out + ".history.csv" : train_history, r.history);
      write_manifest(train_out, *trn);
      out << "model_hash " << model_hash(r.model) << "\n";
    } else if (evl->parsed()) {
      const LabeledDataset data = load_labeled(eval_data);
      const auto y = labels_of(data);
      const int k = static_cast<int>(data.class_count);
      std::ostringstream blocks;
      if (!eval_model.empty()) {
        const MlpModel m = load_model(eval_model);
        const auto p = decode_dataset_nn(m, data);
        out << "nn accuracy " << fmt(accuracy(p, y)) << " n " << y.size() << "\n";
        confusion(p, y, k).write_csv(blocks, "nn");
        blocks << "\n";
      }
      const auto p = decode_dataset_dft(data, eval_sched.context());
      out << "dft accuracy " << fmt(accuracy(p, y)) << " n " << y.size() << "\n";
      confusion(p, y, k).write_csv(blocks, "dft");
      if (!eval_confusion.empty()) open_out(eval_confusion) << blocks.str();
    } else if (swp->parsed()) {
      SweepConfig sc;
      sc.base = sweep_gen.build();
      sc.snrs.clear();
      for (const auto& s : sweep_snrs) sc.snrs.push_back(parse_snr(s));
      sc.count = sweep_count;
      sc.test_seed = sweep_test_seed;
      sc.train_seed = sweep_train_seed;
      const MlpModel m = load_model(sweep_model);
      const SweepResult res = sweep(m, sc);
      {
        auto f = open_out(sweep_out);
        res.write_csv(f);
      }
      if (!sweep_plot.empty()) {
        auto f = open_out(sweep_plot);
        res.write_plot_data(f);
      }
      if (!sweep_gnuplot.empty()) {
        open_out(sweep_gnuplot) << gnuplot_script(sweep_plot.empty() ? "sweep.dat" : sweep_plot,
                                                  "accuracy_vs_snr.png");
      }
      if (!sweep_confusion.empty()) {
        auto f = open_out(sweep_confusion);
        res.write_confusion_csv(f);
      }
      write_manifest(sweep_out, *swp);
      res.write_csv(out);
    } else if (ssw->parsed()) {
      const LabeledDataset data = load_labeled(size_data);
      const auto [tr, va] = split(data, size_train.train_fraction, size_train.split_seed);
      SizeSweepConfig cfg;
      cfg.train = size_train.cfg;
      cfg.hidden.clear();
      for (const auto& h : size_hidden) {
        std::vector<int> dims;
        std::stringstream ss(h);
        std::string part;
        while (std::getline(ss, part, 'x')) {
          try {
            dims.push_back(std::stoi(part));
          } catch (const std::logic_error&) {
            throw ArgumentError("bad layer list '" + h + "'");
          }
        }
        cfg.hidden.push_back(dims);
      }
      cfg.sweep.base = size_gen.build();
      cfg.sweep.snrs.clear();
      for (const auto& s : size_snrs) cfg.sweep.snrs.push_back(parse_snr(s));
      cfg.sweep.count = size_count;
      cfg.sweep.test_seed = size_test_seed;
      const auto entries = size_sweep(tr, va, cfg);
      {
        auto f = open_out(size_out);
        write_size_sweep_csv(entries, f);
      }
      write_manifest(size_out, *ssw);
      write_size_sweep_csv(entries, out);
    } else if (dec->parsed()) {
      const LabeledDataset data = read_dataset(dec_data);
      const UciFormat format = parse_uci_format(dec_sched.format);
      std::vector<int> pred;
      if (dec_rx == "nn") {
        if (dec_model.empty()) throw ArgumentError("--rx nn needs --model");
        pred = decode_dataset_nn(load_model(dec_model), data);
      } else {
        pred = decode_dataset_dft(data, dec_sched.context());
      }
      out << "index,class,m_cs,uci,label\n";
      std::size_t labeled = 0, hits = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) {
        const int mcs = class_to_mcs(format, pred[i]);
        out << i << ',' << pred[i] << ',' << mcs << ',' << mcs_to_uci(format, mcs).describe() << ',';
        if (const auto& l = data.instances[i].label) {
          out << static_cast<int>(*l);
          ++labeled;
          hits += *l == pred[i];
        }
        out << '\n';
      }
      if (labeled > 0) {
        err << "matches " << hits << "/" << labeled << " (" << fmt(static_cast<double>(hits) / labeled) << ")\n";
      }
    } else if (ing->parsed()) {
      IngestConfig ic;
      ic.ofdm = ing_ofdm.params();
      ic.tags = ing_tags.tags();
      ic.class_count = static_cast<std::uint32_t>(candidate_shifts(parse_uci_format(ing_format)).size());
      const auto iq = read_iq(ing_iq);
      std::vector<ScheduleEntry> schedule;
      if (!ing_schedule.empty()) {
        schedule = read_schedule_csv(ing_schedule);
      } else {
        if (ing_symbols.empty()) throw ArgumentError("--symbol-indices must not be empty");
        const std::size_t n = symbols_in_capture(iq.size(), ic.ofdm);
        for (std::size_t i = 0; i < n; ++i) schedule.push_back({ing_slot, ing_symbols[i % ing_symbols.size()], {}});
      }
      const LabeledDataset d = ingest_iq(iq, schedule, ic);
      write_dataset(d, ing_out);
      write_manifest(ing_out, *ing);
      out << "ingested " << d.size() << " symbols into " << ing_out << "\n";
    } else if (syn->parsed()) {
      GenerationConfig g = syn_gen.build();
      g.snr = snr_spec(parse_snr(syn_snr));
      g.seed = syn_seed;
      const SyntheticCapture cap = synthesize_capture(g, syn_tx, syn_ofdm.params());
      write_iq(syn_out, cap.iq);
      write_schedule_csv(syn_schedule, cap.schedule);
      write_manifest(syn_out, *syn);
      out << "wrote " << cap.schedule.size() << " symbols (" << cap.iq.size() << " samples) to " << syn_out << "\n";
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    // FormatError, DecodeError, DataError, I/O failures
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}

}  // namespace pf0::cli
