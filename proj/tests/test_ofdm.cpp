#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pf0/binio.hpp"
#include "pf0/error.hpp"
#include "pf0/eval.hpp"
#include "pf0/ofdm.hpp"
#include "pf0/rng.hpp"

using namespace pf0;

namespace {

Format0Signal random_symbols(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Format0Signal s;
  s.symbols.resize(n);
  for (auto& sym : s.symbols) {
    for (auto& v : sym) v = {rng.gaussian(), rng.gaussian()};
  }
  return s;
}

double max_err(const Format0Signal& a, const Format0Signal& b) {
  double e = 0.0;
  for (std::size_t s = 0; s < a.symbols.size(); ++s) {
    for (int k = 0; k < kSubcarriersPerRb; ++k) e = std::max(e, std::abs(a.symbols[s][k] - b.symbols[s][k]));
  }
  return e;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pf0_ofdm_" + name);
}

GenerationConfig capture_recipe() {
  GenerationConfig g;
  g.snr = SnrSpec::noiseless();
  g.channel.profile = ChannelProfile::AwgnOnly;
  return g;
}

}  // namespace

TEST(Ofdm, LoopbackRecoversSubcarriers) {
  for (int k0 : {0, 7, 100, 244}) {
    OfdmParams p;
    p.k0 = k0;
    const auto sig = random_symbols(5, 11 + static_cast<std::uint64_t>(k0));
    const auto iq = ofdm_modulate(sig, p);
    ASSERT_EQ(iq.size(), 5u * (256 + 18));
    EXPECT_LT(max_err(ofdm_demodulate(iq, 5, p), sig), 1e-12) << k0;
  }
}

TEST(Ofdm, UnitaryScalingPreservesEnergy) {
  OfdmParams p;
  p.cp_lengths = {0};
  const auto sig = random_symbols(1, 3);
  const auto iq = ofdm_modulate(sig, p);
  double t = 0, f = 0;
  for (auto v : iq) t += std::norm(v);
  for (auto v : sig.symbols[0]) f += std::norm(v);
  EXPECT_NEAR(t, f, 1e-12 * f);
}

TEST(Ofdm, CyclicPrefixCopiesSymbolTail) {
  OfdmParams p;
  p.cp_lengths = {20, 18};
  const auto iq = ofdm_modulate(random_symbols(3, 5), p);
  ASSERT_EQ(iq.size(), p.samples_for(3));
  EXPECT_EQ(p.samples_for(3), 3u * 256 + 20 + 18 + 20);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(iq[i], iq[256 + i]);
  const std::size_t s1 = 276;
  for (int i = 0; i < 18; ++i) EXPECT_EQ(iq[s1 + i], iq[s1 + 256 + i]);
}

TEST(Ofdm, ShiftedGridBreaksDetection) {
  GenerationConfig g = capture_recipe();
  OfdmParams tx;
  tx.k0 = 40;
  const auto cap = synthesize_capture(g, 200, tx);
  IngestConfig right;
  right.ofdm = tx;
  IngestConfig wrong = right;
  wrong.ofdm.k0 = 41;
  std::vector<int> y;
  for (const auto& e : cap.schedule) y.push_back(*e.label);
  const auto good = ingest_iq(cap.iq, cap.schedule, right);
  const auto bad = ingest_iq(cap.iq, cap.schedule, wrong);
  EXPECT_EQ(accuracy(decode_dataset_dft(good, {}), y), 1.0);
  EXPECT_LT(accuracy(decode_dataset_dft(bad, {}), y), 0.9);
}

TEST(Ofdm, DemodulateRejectsShortCapture) {
  OfdmParams p;
  const auto iq = ofdm_modulate(random_symbols(2, 1), p);
  EXPECT_THROW(ofdm_demodulate(iq, 3, p), ArgumentError);
  EXPECT_NO_THROW(ofdm_demodulate(iq, 2, p));
}

TEST(Ofdm, ParamValidation) {
  OfdmParams p;
  p.fft_size = 11;
  EXPECT_THROW(p.validate(), ArgumentError);
  p = {};
  p.k0 = 245;
  EXPECT_THROW(p.validate(), ArgumentError);
  p = {};
  p.cp_lengths = {};
  EXPECT_THROW(p.validate(), ArgumentError);
  p = {};
  p.cp_lengths = {256};
  EXPECT_THROW(p.validate(), ArgumentError);
}

TEST(Ofdm, SymbolCountOfCapture) {
  OfdmParams p;
  EXPECT_EQ(symbols_in_capture(0, p), 0u);
  EXPECT_EQ(symbols_in_capture(274 * 4, p), 4u);
  EXPECT_THROW(symbols_in_capture(274 * 4 + 1, p), FormatError);
}

TEST(IqFile, RoundTrip) {
  const auto iq = ofdm_modulate(random_symbols(3, 2), OfdmParams{});
  const auto path = temp_file("rt.iq");
  write_iq(path, iq);
  const auto back = read_iq(path);
  ASSERT_EQ(back.size(), iq.size());
  for (std::size_t i = 0; i < iq.size(); ++i) {
    EXPECT_EQ(back[i].real(), static_cast<double>(static_cast<float>(iq[i].real())));
    EXPECT_EQ(back[i].imag(), static_cast<double>(static_cast<float>(iq[i].imag())));
  }
  EXPECT_EQ(serialize_iq(back), binio::read_file(path));
  std::filesystem::remove(path);
}

TEST(IqFile, MalformedInputs) {
  const std::vector<cf64> iq(4, cf64{1.0, -1.0});
  const auto good = serialize_iq(iq);
  ASSERT_EQ(good.size(), 16u + 32u);
  auto odd = good;
  odd[8] = 7;
  odd.resize(16 + 28);
  EXPECT_THROW(deserialize_iq(odd), FormatError);
  auto mismatch = good;
  mismatch[8] = 6;
  EXPECT_THROW(deserialize_iq(mismatch), FormatError);
  auto truncated = good;
  truncated.pop_back();
  EXPECT_THROW(deserialize_iq(truncated), FormatError);
  auto magic = good;
  magic[0] = 'X';
  EXPECT_THROW(deserialize_iq(magic), FormatError);
}

TEST(Schedule, CsvRoundTrip) {
  const std::vector<ScheduleEntry> s = {{13, 12, 2}, {14, 12, std::nullopt}, {0, 0, 0}};
  const auto path = temp_file("sched.csv");
  write_schedule_csv(path, s);
  EXPECT_EQ(read_schedule_csv(path), s);
  {
    std::ofstream out(path);
    out << "slot,symbol,label\n13,x,1\n";
  }
  EXPECT_THROW(read_schedule_csv(path), FormatError);
  {
    std::ofstream out(path);
    out << "a,b\n";
  }
  EXPECT_THROW(read_schedule_csv(path), FormatError);
  std::filesystem::remove(path);
}

TEST(Ingest, SyntheticCaptureRecoversEveryLabel) {
  const GenerationConfig g = capture_recipe();
  OfdmParams p;
  p.k0 = 12;
  p.cp_lengths = {20, 18, 18};
  const auto cap = synthesize_capture(g, 300, p);
  ASSERT_EQ(cap.schedule.size(), 300u);
  const auto path = temp_file("cap.iq");
  write_iq(path, cap.iq);
  IngestConfig cfg;
  cfg.ofdm = p;
  const auto ds = ingest_iq(path, cap.schedule, cfg);
  ASSERT_EQ(ds.size(), 300u);
  EXPECT_TRUE(std::isnan(ds.instances[0].snr_db));
  EXPECT_EQ(accuracy(decode_dataset_dft(ds, {}), labels_of(ds)), 1.0);
  std::filesystem::remove(path);

  // Flat fading and two-symbol transmissions survive the same round trip.
  GenerationConfig f = g;
  f.channel.profile = ChannelProfile::FlatRayleigh;
  f.num_symbols = 2;
  const auto cap2 = synthesize_capture(f, 100, p);
  ASSERT_EQ(cap2.schedule.size(), 200u);
  EXPECT_EQ(cap2.schedule[1].symbol, 1);
  const auto ds2 = ingest_iq(cap2.iq, cap2.schedule, cfg);
  EXPECT_EQ(accuracy(decode_dataset_dft(ds2, {}), labels_of(ds2)), 1.0);
}

TEST(Ingest, GainDoesNotChangeNormalizedFeatures) {
  const auto cap = synthesize_capture(capture_recipe(), 20, OfdmParams{});
  auto scaled = cap.iq;
  for (auto& v : scaled) v *= 0.01;
  IngestConfig cfg;
  const auto a = ingest_iq(cap.iq, cap.schedule, cfg);
  const auto b = ingest_iq(scaled, cap.schedule, cfg);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < kFeatureDim; ++k) EXPECT_NEAR(a.instances[i].features[k], b.instances[i].features[k], 1e-5);
  }
}

TEST(Ingest, ScheduleMismatchAndBadEntries) {
  const auto cap = synthesize_capture(capture_recipe(), 5, OfdmParams{});
  IngestConfig cfg;
  auto shorter = cap.schedule;
  shorter.pop_back();
  EXPECT_THROW(ingest_iq(cap.iq, shorter, cfg), FormatError);
  EXPECT_THROW(ingest_iq(std::span<const cf64>{}, std::vector<ScheduleEntry>{}, cfg), FormatError);
  auto bad = cap.schedule;
  bad[2].symbol = 14;
  EXPECT_THROW(ingest_iq(cap.iq, bad, cfg), ArgumentError);
  bad = cap.schedule;
  bad[2].label = 4;
  EXPECT_THROW(ingest_iq(cap.iq, bad, cfg), ArgumentError);
  auto partial = cap.iq;
  partial.pop_back();
  EXPECT_THROW(ingest_iq(partial, cap.schedule, cfg), FormatError);
}

TEST(Ingest, CaptureUsesItsOwnSeedNamespace) {
  GenerationConfig g = capture_recipe();
  g.count = 5;
  const auto cap = synthesize_capture(g, 5, OfdmParams{});
  const auto ds = generate_dataset(g);
  int same = 0;
  for (int i = 0; i < 5; ++i) same += cap.schedule[i].label == ds.instances[i].label && cap.schedule[i].slot == ds.instances[i].slot;
  EXPECT_LT(same, 5);
}
