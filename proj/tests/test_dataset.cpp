#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <map>
#include <set>

#include "eegclean/dataset/augment.hpp"
#include "eegclean/dataset/store.hpp"
#include "eegclean/dataset/synth.hpp"
#include "test_util.hpp"

using namespace eegclean;
using namespace eegclean::dataset;

namespace {

// Fraction of periodogram energy above `hz`, by direct DFT.
double energy_fraction_above(const Segment& s, double hz) {
  const std::size_t n = s.size();
  double total = 0.0, above = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      acc += s.samples[t] * std::polar(1.0, -2.0 * testutil::kPi * static_cast<double>(k * t) / static_cast<double>(n));
    const double w = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
    const double p = w * std::norm(acc);
    total += p;
    if (static_cast<double>(k) * s.sample_rate / static_cast<double>(n) > hz) above += p;
  }
  return above / total;
}

bool same_samples(const std::vector<Segment>& a, const std::vector<Segment>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].samples != b[i].samples) return false;
  return true;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("eegclean_test_" + name);
}

}  // namespace

TEST(SynthEeg, DeterministicAndUnitRms) {
  auto a = synth_eeg(20, 512, 256.0, 7);
  auto b = synth_eeg(20, 512, 256.0, 7, 4);
  EXPECT_TRUE(same_samples(a, b));
  EXPECT_FALSE(same_samples(a, synth_eeg(20, 512, 256.0, 8)));
  for (const auto& s : a) {
    EXPECT_NEAR(rms(s), 1.0, 1e-9);
    EXPECT_EQ(s.kind, SegmentKind::CleanEEG);
    EXPECT_EQ(s.size(), 512u);
  }
}

TEST(SynthEeg, LittleEnergyAbove80Hz) {
  for (const auto& s : synth_eeg(10, 512, 256.0, 3)) EXPECT_LT(energy_fraction_above(s, 80.0), 0.01);
}

TEST(SynthEeg, AlphaPeakPresent) {
  // Averaged over segments, the 8-12 Hz band carries far more power per Hz
  // than neighbouring bands.
  double alpha = 0.0, beta = 0.0;
  for (const auto& s : synth_eeg(10, 512, 256.0, 4)) {
    alpha += energy_fraction_above(s, 7.5) - energy_fraction_above(s, 12.5);
    beta += energy_fraction_above(s, 20.0) - energy_fraction_above(s, 25.0);
  }
  EXPECT_GT(alpha, 3.0 * beta);
}

TEST(SynthEog, DeterministicBandLimitedAndPeaky) {
  auto a = synth_eog(20, 512, 256.0, 11);
  EXPECT_TRUE(same_samples(a, synth_eog(20, 512, 256.0, 11, 3)));
  for (const auto& s : a) {
    EXPECT_NEAR(rms(s), 1.0, 1e-9);
    EXPECT_EQ(s.kind, SegmentKind::EOG);
    EXPECT_LT(energy_fraction_above(s, 10.0), 0.02);
    std::vector<double> mag;
    for (double v : s.samples) mag.push_back(std::abs(v));
    std::nth_element(mag.begin(), mag.begin() + 256, mag.end());
    const double median = mag[256];
    const double peak = *std::max_element(mag.begin(), mag.end());
    EXPECT_GT(peak, 3.0 * median);
  }
}

TEST(Synth, ArgumentValidation) {
  EXPECT_THROW(synth_eeg(0, 512, 256.0, 1), ConfigError);
  EXPECT_THROW(synth_eog(3, 0, 256.0, 1), ConfigError);
  EXPECT_THROW(synth_eeg(3, 512, 0.0, 1), ConfigError);
}

TEST(Store, RoundTripByteIdentical) {
  SegmentStore st;
  st.seed = 5;
  st.params = {{"eeg", 3}, {"eog", 2}};
  st.add(SegmentKind::CleanEEG, synth_eeg(3, 512, 256.0, 1));
  st.add(SegmentKind::EOG, synth_eog(2, 512, 256.0, 2));
  auto bytes = encode_store(st);
  auto back = decode_store(bytes);
  EXPECT_EQ(encode_store(back), bytes);
  EXPECT_EQ(back.count(SegmentKind::CleanEEG), 3u);
  EXPECT_EQ(back.count(SegmentKind::EOG), 2u);
  EXPECT_EQ(back.seed, 5u);
  EXPECT_EQ(back.params["eeg"], 3);
  EXPECT_NEAR(back.of(SegmentKind::CleanEEG)[1].samples[7], st.of(SegmentKind::CleanEEG)[1].samples[7], 1e-6);

  const auto path = temp_path("store.sgst").string();
  write_store(path, back);
  EXPECT_EQ(io::read_file(path), bytes);
  EXPECT_TRUE(same_samples(import_segments(path, SegmentKind::EOG), back.of(SegmentKind::EOG)));
  std::filesystem::remove(path);
}

TEST(Store, LayoutAndSortedManifest) {
  SegmentStore st;
  st.length = 2;
  st.add(SegmentKind::EOG, {testutil::make_segment({1.5, -2.0})});
  auto bytes = encode_store(st);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 6), "SGST01");
  io::ByteReader rd(std::span<const std::uint8_t>(bytes).subspan(6));
  const auto len = rd.u32("len");
  const std::string manifest = rd.text(len, "m");
  EXPECT_LT(manifest.find("\"counts\""), manifest.find("\"length\""));
  EXPECT_NE(manifest.find("\"EOG\":1"), std::string::npos);
  EXPECT_EQ(rd.f32("a"), 1.5f);
  EXPECT_EQ(rd.f32("b"), -2.0f);
  EXPECT_EQ(rd.remaining(), 0u);
}

TEST(Store, FullScaleCountsSurfaceInManifest) {
  SegmentStore st;
  st.length = 4;
  st.add(SegmentKind::CleanEEG, std::vector<Segment>(6164, testutil::make_segment({0.1, 0.2, 0.3, 0.4})));
  st.add(SegmentKind::EOG, std::vector<Segment>(5000, testutil::make_segment({1.0, 0.0, 0.0, 0.0})));
  auto m = store_manifest(decode_store(encode_store(st)));
  EXPECT_EQ(m["counts"]["CleanEEG"], 6164);
  EXPECT_EQ(m["counts"]["EOG"], 5000);
  EXPECT_EQ(m["counts"]["Contaminated"], 0);
}

TEST(Store, CorruptionErrors) {
  SegmentStore st;
  st.add(SegmentKind::CleanEEG, synth_eeg(2, 512, 256.0, 1));
  st.add(SegmentKind::Contaminated, synth_eeg(2, 512, 256.0, 2));
  auto bytes = encode_store(st);

  auto bad_magic = bytes;
  bad_magic[1] = 'X';
  EXPECT_THROW(decode_store(bad_magic), FormatError);

  auto truncated = bytes;
  truncated.resize(bytes.size() - 100);
  try {
    decode_store(truncated);
    FAIL() << "expected ManifestError";
  } catch (const ManifestError& e) {
    EXPECT_NE(std::string(e.what()).find("Contaminated"), std::string::npos) << e.what();
  }

  auto extra = bytes;
  extra.insert(extra.end(), 4, 0);
  EXPECT_THROW(decode_store(extra), ManifestError);

  auto bad_json = bytes;
  bad_json[10] = '#';
  EXPECT_THROW(decode_store(bad_json), FormatError);

  auto bumped = st;
  auto text = store_manifest(st).dump();
  auto pos = text.find("\"version\":1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 11, "\"version\":7");
  io::ByteWriter w;
  w.text("SGST01");
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.text(text);
  auto b2 = w.take();
  b2.insert(b2.end(), bytes.begin() + 10 + static_cast<std::ptrdiff_t>(store_manifest(st).dump().size()), bytes.end());
  EXPECT_THROW(decode_store(b2), FormatError);

  EXPECT_THROW(read_store(temp_path("missing.sgst").string()), IoError);
}

TEST(Store, RejectsMismatchedSegments) {
  SegmentStore st;
  EXPECT_THROW(st.add(SegmentKind::EOG, {testutil::make_segment({1.0, 2.0})}), ShapeError);
}

TEST(Csv, ImportsRowsWithRateHeader) {
  auto segs = parse_csv_segments("rate,128\n1,2,3\n4,5,6\n", SegmentKind::EOG);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[1].samples, (std::vector<double>{4, 5, 6}));
  EXPECT_EQ(segs[0].sample_rate, 128.0);
  EXPECT_EQ(segs[0].kind, SegmentKind::EOG);
  EXPECT_THROW(parse_csv_segments("1,2,3\n", SegmentKind::EOG), FormatError);
  EXPECT_THROW(parse_csv_segments("rate,128\n1,2,3\n4,5\n", SegmentKind::EOG), ManifestError);
  EXPECT_THROW(parse_csv_segments("rate,128\n1,x,3\n", SegmentKind::EOG), FormatError);

  const auto path = temp_path("segs.csv").string();
  io::write_text_file(path, "rate,256\r\n0.5,0.25\r\n");
  auto fromfile = import_segments(path, SegmentKind::CleanEEG);
  ASSERT_EQ(fromfile.size(), 1u);
  EXPECT_EQ(fromfile[0].samples, (std::vector<double>{0.5, 0.25}));
  std::filesystem::remove(path);
}

TEST(Augment, SweepCoverageAndExactMixing) {
  auto eeg = synth_eeg(12, 512, 256.0, 1);
  auto eog = synth_eog(7, 512, 256.0, 2);
  auto pairs = augment_sweep(eeg, eog, 4, 9);
  ASSERT_EQ(pairs.size(), 60u);
  std::map<double, int> per_level;
  for (const auto& p : pairs) {
    per_level[p.mix.snr.value] += 1;
    const auto& src_eog = eog[p.mix.eog_id];
    EXPECT_EQ(p.clean.samples, eeg[p.mix.eeg_id].samples);
    for (std::size_t i = 0; i < 512; ++i) EXPECT_EQ(p.noisy.samples[i], p.clean.samples[i] + p.mix.lambda * src_eog.samples[i]);
    EXPECT_NEAR(measure_snr(p.clean, scaled(src_eog, p.mix.lambda)).value, p.mix.snr.value, 1e-9);
    EXPECT_EQ(p.noisy.kind, SegmentKind::Contaminated);
  }
  ASSERT_EQ(per_level.size(), 15u);
  for (const auto& [level, n] : per_level) EXPECT_EQ(n, 4) << level;
  EXPECT_EQ(per_level.begin()->first, -10.0);
  EXPECT_EQ(per_level.rbegin()->first, 4.0);
}

TEST(Augment, EogWithoutReplacementThenReshuffled) {
  auto eeg = synth_eeg(3, 64, 256.0, 1);
  auto eog = synth_eog(5, 64, 256.0, 2);
  auto pairs = augment_sweep(eeg, eog, 1, 3);
  ASSERT_EQ(pairs.size(), 15u);
  for (std::size_t round = 0; round < 3; ++round) {
    std::set<std::uint32_t> ids;
    for (std::size_t k = 0; k < 5; ++k) ids.insert(pairs[round * 5 + k].mix.eog_id);
    EXPECT_EQ(ids.size(), 5u);
  }
}

TEST(Augment, SinglePairLambdaClosedForm) {
  auto eeg = synth_eeg(1, 512, 256.0, 3);
  auto eog = synth_eog(1, 512, 256.0, 4);
  std::vector<SnrDb> level{{-3.0}};
  auto pairs = augment_sweep(eeg, eog, level, 1, 5);
  ASSERT_EQ(pairs.size(), 1u);
  double se = 0.0, so = 0.0;
  for (std::size_t i = 0; i < 512; ++i) {
    se += eeg[0].samples[i] * eeg[0].samples[i];
    so += eog[0].samples[i] * eog[0].samples[i];
  }
  const double expected = std::sqrt(se / 512.0) / (std::sqrt(so / 512.0) * std::pow(10.0, -3.0 / 10.0));
  EXPECT_NEAR(pairs[0].mix.lambda, expected, 1e-12 * expected);
}

TEST(Augment, Validation) {
  auto eeg = synth_eeg(2, 64, 256.0, 1);
  std::vector<Segment> none;
  std::vector<SnrDb> no_levels;
  EXPECT_THROW(augment_sweep(eeg, none, 1, 1), ConfigError);
  EXPECT_THROW(augment_sweep(none, eeg, 1, 1), ConfigError);
  EXPECT_THROW(augment_sweep(eeg, eeg, no_levels, 1, 1), ConfigError);
}

TEST(Augment, ParallelMatchesSerial) {
  auto eeg = synth_eeg(6, 128, 256.0, 1);
  auto eog = synth_eog(6, 128, 256.0, 2);
  auto a = augment_sweep(eeg, eog, 3, 4, 1);
  auto b = augment_sweep(eeg, eog, 3, 4, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].noisy.samples, b[i].noisy.samples);
    EXPECT_EQ(a[i].mix.eeg_id, b[i].mix.eeg_id);
  }
}

TEST(Split, FullScaleCounts) {
  auto c = split_counts(150000, SplitSpec{});
  EXPECT_EQ(c[0], 120000u);
  EXPECT_EQ(c[1], 15000u);
  EXPECT_EQ(c[2], 15000u);
  auto d = split_counts(11, SplitSpec{});
  EXPECT_EQ(d[0] + d[1] + d[2], 11u);
  EXPECT_EQ(d[0], 9u);
  EXPECT_THROW(split_counts(10, SplitSpec{0.5, 0.5, 0.5, 0}), ConfigError);
}

TEST(Split, PartitionStratifiedAndSeeded) {
  std::vector<double> levels;
  for (int l = -10; l <= 4; ++l)
    for (int j = 0; j < 10; ++j) levels.push_back(l);
  SplitSpec spec;
  spec.seed = 3;
  auto s = split_indices(levels, spec);
  EXPECT_EQ(s.train.size(), 120u);
  EXPECT_EQ(s.val.size(), 15u);
  EXPECT_EQ(s.test.size(), 15u);

  std::vector<std::size_t> all;
  for (auto* v : {&s.train, &s.val, &s.test}) all.insert(all.end(), v->begin(), v->end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);

  for (auto* v : {&s.train, &s.val, &s.test}) {
    std::map<double, int> per;
    for (auto i : *v) per[levels[i]] += 1;
    for (const auto& [level, n] : per)
      EXPECT_LE(std::abs(static_cast<double>(n) / v->size() - 1.0 / 15.0), 0.02) << level;
    EXPECT_EQ(per.size(), 15u);
  }

  auto again = split_indices(levels, spec);
  EXPECT_EQ(again.train, s.train);
  EXPECT_EQ(again.test, s.test);
  spec.seed = 4;
  EXPECT_NE(split_indices(levels, spec).train, s.train);
}

TEST(Split, UnevenStrataStayWithinTwoPoints) {
  std::vector<double> levels;
  for (int l = 0; l < 7; ++l)
    for (int j = 0; j < 50 + 13 * l; ++j) levels.push_back(l);
  auto s = split_indices(levels, SplitSpec{});
  std::map<double, double> global;
  for (double l : levels) global[l] += 1.0 / static_cast<double>(levels.size());
  for (auto* v : {&s.train, &s.val, &s.test}) {
    std::map<double, double> per;
    for (auto i : *v) per[levels[i]] += 1.0 / static_cast<double>(v->size());
    for (const auto& [level, frac] : global) EXPECT_LE(std::abs(per[level] - frac), 0.02);
  }
}

TEST(Split, TooSmallRejected) {
  std::vector<double> levels(9, 0.0);
  EXPECT_THROW(split_indices(levels, SplitSpec{}), ConfigError);
}

TEST(Split, PairsAndStoreTags) {
  auto eeg = synth_eeg(10, 128, 256.0, 1);
  auto eog = synth_eog(10, 128, 256.0, 2);
  auto pairs = augment_sweep(eeg, eog, 10, 3);
  SplitSpec spec;
  spec.seed = 8;
  auto parts = split(pairs, spec);
  EXPECT_EQ(parts.train.size(), 120u);
  EXPECT_EQ(parts.test.size(), 15u);

  auto st = augmented_store(pairs, eog, spec, "aug", 3);
  auto back = decode_store(encode_store(st));
  EXPECT_EQ(encode_store(back), encode_store(st));
  auto test = pairs_from_store(back, SplitTag::Test);
  ASSERT_EQ(test.size(), 15u);
  std::set<double> lv;
  for (const auto& p : test) lv.insert(p.mix.snr.value);
  EXPECT_EQ(lv.size(), 15u);
  EXPECT_EQ(pairs_from_store(back, SplitTag::Train).size(), 120u);
  EXPECT_EQ(pairs_from_store(back, std::nullopt).size(), 150u);
  EXPECT_EQ(back.mixes[5].eog_id, pairs[5].mix.eog_id);
  EXPECT_EQ(back.mixes[5].lambda, pairs[5].mix.lambda);
}
