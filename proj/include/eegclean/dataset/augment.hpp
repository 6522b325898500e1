#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "eegclean/dataset/store.hpp"
#include "eegclean/errors.hpp"
#include "eegclean/parallel.hpp"
#include "eegclean/signal.hpp"

namespace eegclean::dataset {

struct AugmentedPair {
  Segment noisy;
  Segment clean;
  MixRecord mix;
};

inline std::vector<SnrDb> default_snr_levels() {
  std::vector<SnrDb> levels;
  for (int db = -10; db <= 4; ++db) levels.push_back({static_cast<double>(db)});
  return levels;
}

// EOG sources are consumed in a seeded random order without replacement and
// reshuffled once exhausted. EEG sources are drawn independently per pair, so
// an EEG segment may appear at several levels.
inline std::vector<AugmentedPair> augment_sweep(std::span<const Segment> eeg, std::span<const Segment> eog,
                                                std::span<const SnrDb> levels, std::size_t pairs_per_level,
                                                std::uint64_t seed, std::size_t threads = 1) {
  if (eeg.empty() || eog.empty()) throw ConfigError("augment_sweep: empty EEG or EOG source list");
  if (levels.empty()) throw ConfigError("augment_sweep: no SNR levels");
  if (pairs_per_level == 0) throw ConfigError("augment_sweep: pairs_per_level must be positive");
  const std::size_t total = levels.size() * pairs_per_level;

  std::vector<std::uint32_t> eog_ids;
  eog_ids.reserve(total);
  for (std::uint64_t round = 0; eog_ids.size() < total; ++round) {
    std::vector<std::uint32_t> perm(eog.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::mt19937_64 rng(mix_seed(seed, 0xe06, round));
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
    for (auto id : perm) {
      if (eog_ids.size() == total) break;
      eog_ids.push_back(id);
    }
  }

  std::vector<AugmentedPair> out(total);
  parallel_for(total, threads, [&](std::size_t k) {
    const auto eeg_id = static_cast<std::uint32_t>(mix_seed(seed, 0xee9, k) % eeg.size());
    const SnrDb level = levels[k / pairs_per_level];
    auto c = contaminate(eeg[eeg_id], eog[eog_ids[k]], level, eeg_id, eog_ids[k]);
    out[k] = {std::move(c.noisy), eeg[eeg_id], c.mix};
    out[k].clean.kind = SegmentKind::CleanEEG;
  });
  return out;
}

inline std::vector<AugmentedPair> augment_sweep(std::span<const Segment> eeg, std::span<const Segment> eog,
                                                std::size_t pairs_per_level, std::uint64_t seed,
                                                std::size_t threads = 1) {
  const auto levels = default_snr_levels();
  return augment_sweep(eeg, eog, levels, pairs_per_level, seed, threads);
}

struct SplitSpec {
  double train_frac = 0.80;
  double val_frac = 0.10;
  double test_frac = 0.10;
  std::uint64_t seed = 0;
};

// Largest-remainder apportionment of n items; ties go to the earlier subset.
inline std::array<std::size_t, 3> split_counts(std::size_t n, const SplitSpec& spec) {
  const std::array<double, 3> fr{spec.train_frac, spec.val_frac, spec.test_frac};
  for (double f : fr)
    if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("split fractions must be positive");
  if (std::abs(fr[0] + fr[1] + fr[2] - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rem{};
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = fr[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[i] = exact - static_cast<double>(counts[i]);
    used += counts[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; used < n; ++k, ++used) counts[order[k % 3]] += 1;
  return counts;
}

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

// Stratified split over items labelled by level. Each level is shuffled and
// its members get evenly spaced keys (j + 0.5) / n_level; all items are then
// ordered by key, so every prefix has close to the global level mix.
inline SplitIndices split_indices(std::span<const double> levels, const SplitSpec& spec) {
  const std::size_t n = levels.size();
  if (n < 10) throw ConfigError("split: at least 10 items are required, got " + std::to_string(n));
  const auto counts = split_counts(n, spec);
  for (auto c : counts)
    if (c == 0) throw ConfigError("split: a subset would be empty");

  std::map<double, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < n; ++i) strata[levels[i]].push_back(i);

  std::vector<std::size_t> tiebreak(n);
  std::iota(tiebreak.begin(), tiebreak.end(), std::size_t{0});
  {
    std::mt19937_64 rng(mix_seed(spec.seed, 0x7e));
    for (std::size_t i = n; i > 1; --i) std::swap(tiebreak[i - 1], tiebreak[rng() % i]);
  }
  std::vector<double> key(n);
  std::uint64_t stratum = 0;
  for (auto& [level, members] : strata) {
    std::mt19937_64 rng(mix_seed(spec.seed, 0x57, stratum++));
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng() % i]);
    for (std::size_t j = 0; j < members.size(); ++j)
      key[members[j]] = (static_cast<double>(j) + 0.5) / static_cast<double>(members.size());
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return tiebreak[a] < tiebreak[b];
  });

  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(counts[0]));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(counts[0]),
                 order.begin() + static_cast<std::ptrdiff_t>(counts[0] + counts[1]));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(counts[0] + counts[1]), order.end());
  return out;
}

struct SplitResult {
  std::vector<AugmentedPair> train, val, test;
};

inline SplitResult split(std::span<const AugmentedPair> pairs, const SplitSpec& spec) {
  std::vector<double> levels(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) levels[i] = pairs[i].mix.snr.value;
  const auto idx = split_indices(levels, spec);
  SplitResult r;
  for (auto i : idx.train) r.train.push_back(pairs[i]);
  for (auto i : idx.val) r.val.push_back(pairs[i]);
  for (auto i : idx.test) r.test.push_back(pairs[i]);
  return r;
}

// Store layout for an augmented set: pair i is CleanEEG[i], EOG[i] (unscaled
// source), Contaminated[i], mixes[i] and splits[i].
inline SegmentStore augmented_store(std::span<const AugmentedPair> pairs, std::span<const Segment> eog_sources,
                                    const SplitSpec& spec, std::string name, std::uint64_t seed) {
  if (pairs.empty()) throw ConfigError("augmented_store: no pairs");
  SegmentStore st;
  st.name = std::move(name);
  st.length = pairs.front().clean.size();
  st.rate = pairs.front().clean.sample_rate;
  st.seed = seed;
  std::vector<double> levels;
  for (const auto& p : pairs) {
    st.add(SegmentKind::CleanEEG, {p.clean});
    st.add(SegmentKind::EOG, {eog_sources[p.mix.eog_id]});
    st.add(SegmentKind::Contaminated, {p.noisy});
    st.mixes.push_back(p.mix);
    levels.push_back(p.mix.snr.value);
  }
  const auto idx = split_indices(levels, spec);
  st.splits.assign(pairs.size(), SplitTag::Train);
  for (auto i : idx.val) st.splits[i] = SplitTag::Val;
  for (auto i : idx.test) st.splits[i] = SplitTag::Test;
  return st;
}

// Pairs of one split from an augmented store (noisy and clean as stored).
inline std::vector<AugmentedPair> pairs_from_store(const SegmentStore& st, std::optional<SplitTag> which) {
  const auto& noisy = st.of(SegmentKind::Contaminated);
  const auto& clean = st.of(SegmentKind::CleanEEG);
  if (st.mixes.size() != noisy.size() || clean.size() != noisy.size())
    throw ManifestError("store is not an augmented set (needs paired CleanEEG, Contaminated and mix records)");
  if (which && st.splits.size() != noisy.size()) throw ManifestError("store has no split tags");
  std::vector<AugmentedPair> out;
  for (std::size_t i = 0; i < noisy.size(); ++i)
    if (!which || st.splits[i] == *which) out.push_back({noisy[i], clean[i], st.mixes[i]});
  return out;
}

}  // namespace eegclean::dataset
