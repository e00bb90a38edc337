#include "pf0/ofdm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>

#include "pf0/binio.hpp"
#include "pf0/error.hpp"

namespace pf0 {

namespace {

// FFTW's planner is not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Fft {
 public:
  Fft(int n, int sign) : n_(n) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n)));
    if (buf_ == nullptr) throw std::bad_alloc();
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(n, buf_, buf_, sign, FFTW_ESTIMATE);
  }
  ~Fft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(buf_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  cf64* data() { return reinterpret_cast<cf64*>(buf_); }
  void run() { fftw_execute(plan_); }
  int size() const { return n_; }

 private:
  int n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

void OfdmParams::validate() const {
  if (k0 < 0) throw ArgumentError("k0 must be >= 0");
  if (fft_size < kSubcarriersPerRb + k0) {
    throw ArgumentError("fft size " + std::to_string(fft_size) + " cannot hold an RB at k0 = " + std::to_string(k0));
  }
  if (cp_lengths.empty()) throw ArgumentError("at least one CP length is required");
  for (int cp : cp_lengths) {
    if (cp < 0 || cp >= fft_size) throw ArgumentError("CP length " + std::to_string(cp) + " out of range");
  }
}

std::size_t OfdmParams::samples_for(std::size_t n) const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) total += static_cast<std::size_t>(fft_size + cp_for(i));
  return total;
}

std::vector<cf64> ofdm_modulate(const Format0Signal& signal, const OfdmParams& params) {
  params.validate();
  const int n = params.fft_size;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Fft ifft(n, FFTW_BACKWARD);
  std::vector<cf64> out;
  out.reserve(params.samples_for(signal.symbols.size()));
  for (std::size_t s = 0; s < signal.symbols.size(); ++s) {
    cf64* buf = ifft.data();
    std::fill(buf, buf + n, cf64{});
    for (int k = 0; k < kSubcarriersPerRb; ++k) buf[params.k0 + k] = signal.symbols[s][k];
    ifft.run();
    for (int t = 0; t < n; ++t) buf[t] *= scale;
    const int cp = params.cp_for(s);
    out.insert(out.end(), buf + (n - cp), buf + n);
    out.insert(out.end(), buf, buf + n);
  }
  return out;
}

Format0Signal ofdm_demodulate(std::span<const cf64> iq, std::size_t num_symbols, const OfdmParams& params) {
  params.validate();
  const std::size_t need = params.samples_for(num_symbols);
  if (iq.size() < need) {
    throw ArgumentError("capture has " + std::to_string(iq.size()) + " samples, " + std::to_string(num_symbols) +
                        " symbols need " + std::to_string(need));
  }
  const int n = params.fft_size;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Fft fft(n, FFTW_FORWARD);
  Format0Signal sig;
  sig.symbols.resize(num_symbols);
  std::size_t pos = 0;
  for (std::size_t s = 0; s < num_symbols; ++s) {
    pos += static_cast<std::size_t>(params.cp_for(s));
    std::copy(iq.begin() + static_cast<std::ptrdiff_t>(pos), iq.begin() + static_cast<std::ptrdiff_t>(pos + n),
              fft.data());
    fft.run();
    for (int k = 0; k < kSubcarriersPerRb; ++k) sig.symbols[s][k] = fft.data()[params.k0 + k] * scale;
    pos += static_cast<std::size_t>(n);
  }
  return sig;
}

std::size_t symbols_in_capture(std::size_t sample_count, const OfdmParams& params) {
  params.validate();
  std::size_t used = 0, n = 0;
  while (used < sample_count) {
    used += static_cast<std::size_t>(params.fft_size + params.cp_for(n));
    ++n;
  }
  if (used != sample_count) {
    throw FormatError("capture of " + std::to_string(sample_count) + " samples ends inside symbol " +
                          std::to_string(n - 1),
                      0);
  }
  return n;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> serialize_iq(std::span<const cf64> iq) {
  binio::Writer w;
  w.bytes("PF0Q");
  w.u32(kIqFileVersion);
  w.u64(2 * iq.size());
  for (const auto& s : iq) {
    w.f32(static_cast<float>(s.real()));
    w.f32(static_cast<float>(s.imag()));
  }
  return w.take();
}

std::vector<cf64> deserialize_iq(std::span<const std::uint8_t> bytes) {
  binio::Reader r(bytes);
  r.expect_magic("PF0Q", "IQ capture");
  const auto version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kIqFileVersion) throw FormatError("unsupported IQ file version " + std::to_string(version), version_at);
  const auto count_at = r.offset();
  const std::uint64_t values = r.u64("sample count");
  if (values % 2 != 0) throw FormatError("odd number of I/Q values (" + std::to_string(values) + ")", count_at);
  if (r.remaining() != values * 4) {
    throw FormatError("header declares " + std::to_string(values) + " values but payload holds " +
                          std::to_string(r.remaining() / 4),
                      count_at);
  }
  std::vector<cf64> iq(values / 2);
  for (auto& s : iq) {
    const float i = r.f32("I");
    const float q = r.f32("Q");
    s = {i, q};
  }
  return iq;
}

void write_iq(const std::filesystem::path& path, std::span<const cf64> iq) {
  binio::write_file(path, serialize_iq(iq));
}

std::vector<cf64> read_iq(const std::filesystem::path& path) { return deserialize_iq(binio::read_file(path)); }

// ---------------------------------------------------------------------------

std::vector<ScheduleEntry> read_schedule_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open schedule " + path.string(), 0);
  std::string line;
  std::getline(in, line);
  if (line.rfind("slot,symbol", 0) != 0) throw FormatError("schedule header must start with slot,symbol", 0);
  std::vector<ScheduleEntry> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string slot, symbol, label;
    std::getline(ss, slot, ',');
    std::getline(ss, symbol, ',');
    std::getline(ss, label, ',');
    try {
      ScheduleEntry e;
      std::size_t used = 0;
      e.slot = std::stoi(slot, &used);
      if (used != slot.size()) throw std::invalid_argument(slot);
      e.symbol = std::stoi(symbol, &used);
      if (used != symbol.size()) throw std::invalid_argument(symbol);
      if (!label.empty()) {
        e.label = std::stoi(label, &used);
        if (used != label.size()) throw std::invalid_argument(label);
      }
      out.push_back(e);
    } catch (const std::logic_error&) {
      throw FormatError("bad schedule row " + std::to_string(lineno) + ": '" + line + "'", 0);
    }
  }
  return out;
}

void write_schedule_csv(const std::filesystem::path& path, std::span<const ScheduleEntry> schedule) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot create " + path.string(), 0);
  out << "slot,symbol,label\n";
  for (const auto& e : schedule) {
    out << e.slot << ',' << e.symbol << ',';
    if (e.label) out << *e.label;
    out << '\n';
  }
}

LabeledDataset ingest_iq(std::span<const cf64> iq, std::span<const ScheduleEntry> schedule,
                         const IngestConfig& cfg) {
  const std::size_t n = symbols_in_capture(iq.size(), cfg.ofdm);
  if (n == 0) throw FormatError("capture holds no samples", 0);
  if (n != schedule.size()) {
    throw FormatError("capture holds " + std::to_string(n) + " symbols but the schedule lists " +
                          std::to_string(schedule.size()),
                      0);
  }
  const Format0Signal sig = ofdm_demodulate(iq, n, cfg.ofdm);
  LabeledDataset ds;
  ds.class_count = cfg.class_count;
  ds.tags = cfg.tags;
  ds.instances.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ScheduleEntry& e = schedule[i];
    if (e.slot < 0 || e.slot > kMaxSlotIndex || e.symbol < 0 || e.symbol >= kSymbolsPerSlot) {
      throw ArgumentError("schedule entry " + std::to_string(i) + " has an invalid slot/symbol");
    }
    if (e.label && (*e.label < 0 || *e.label >= static_cast<int>(cfg.class_count))) {
      throw ArgumentError("schedule entry " + std::to_string(i) + " has label out of range");
    }
    Instance& inst = ds.instances[i];
    const FeatureVector f = featurize(sig.symbols[i], cfg.tags);
    for (int k = 0; k < kFeatureDim; ++k) inst.features[k] = static_cast<float>(f[k]);
    if (e.label) inst.label = static_cast<std::uint8_t>(*e.label);
    inst.slot = static_cast<std::uint8_t>(e.slot);
    inst.start_symbol = static_cast<std::uint8_t>(e.symbol);
    inst.snr_db = std::nanf("");
  }
  return ds;
}

LabeledDataset ingest_iq(const std::filesystem::path& path, std::span<const ScheduleEntry> schedule,
                         const IngestConfig& cfg) {
  const auto iq = read_iq(path);
  return ingest_iq(iq, schedule, cfg);
}

SyntheticCapture synthesize_capture(const GenerationConfig& gen, std::size_t transmissions,
                                    const OfdmParams& params) {
  gen.validate();
  params.validate();
  SyntheticCapture cap;
  GenerationConfig g = gen;
  g.seed_namespace = SeedNamespace::Capture;
  Format0Signal all;
  for (std::size_t i = 0; i < transmissions; ++i) {
    const Transmission t = draw_transmission(g, i);
    for (std::size_t l = 0; l < t.received.symbols.size(); ++l) {
      all.symbols.push_back(t.received.symbols[l]);
      cap.schedule.push_back({t.slot, gen.start_symbol + static_cast<int>(l), t.label});
    }
  }
  cap.iq = ofdm_modulate(all, params);
  return cap;
}

}  // namespace pf0
