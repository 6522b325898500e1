#pragma once

// SegmentStore file:
//   "SGST01", u32 manifest byte length, manifest (UTF-8 JSON, sorted keys),
//   then for each kind in the order CleanEEG, EOG, Contaminated, Denoised:
//   count x length little-endian f32, row-major.
//
// Augmented stores also carry one MixRecord and one split tag per
// contaminated segment in the manifest.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegclean/binary_io.hpp"
#include "eegclean/errors.hpp"
#include "eegclean/signal.hpp"

namespace eegclean::dataset {

inline constexpr std::string_view kStoreMagic = "SGST01";
inline constexpr int kStoreVersion = 1;
inline constexpr std::array<SegmentKind, 4> kStoreKinds{SegmentKind::CleanEEG, SegmentKind::EOG,
                                                        SegmentKind::Contaminated, SegmentKind::Denoised};

enum class SplitTag : std::uint8_t { Train, Val, Test };

inline std::string_view to_string(SplitTag t) {
  switch (t) {
    case SplitTag::Train: return "train";
    case SplitTag::Val: return "val";
    case SplitTag::Test: return "test";
  }
  return "?";
}

inline SplitTag parse_split_tag(std::string_view s) {
  if (s == "train") return SplitTag::Train;
  if (s == "val") return SplitTag::Val;
  if (s == "test") return SplitTag::Test;
  throw ManifestError("unknown split tag '" + std::string(s) + "'");
}

struct SegmentStore {
  std::string name = "eegclean";
  std::size_t length = kDefaultSegmentLength;
  double rate = kDefaultSampleRate;
  std::uint64_t seed = 0;
  std::array<std::vector<Segment>, 4> segments;  // indexed by SegmentKind
  std::vector<MixRecord> mixes;                   // empty or one per Contaminated segment
  std::vector<SplitTag> splits;                   // empty or one per Contaminated segment
  nlohmann::json params = nlohmann::json::object();  // free-form provenance

  std::vector<Segment>& of(SegmentKind k) { return segments[static_cast<std::size_t>(k)]; }
  const std::vector<Segment>& of(SegmentKind k) const { return segments[static_cast<std::size_t>(k)]; }
  std::size_t count(SegmentKind k) const { return of(k).size(); }

  void add(SegmentKind k, std::vector<Segment> segs) {
    for (auto& s : segs) {
      validate(s);
      if (s.size() != length || s.sample_rate != rate)
        throw ShapeError("SegmentStore: segment shape differs from store length/rate");
      s.kind = k;
      of(k).push_back(std::move(s));
    }
  }

  void check() const {
    for (SegmentKind k : kStoreKinds)
      for (const auto& s : of(k))
        if (s.size() != length || s.sample_rate != rate)
          throw ManifestError("SegmentStore: " + std::string(eegclean::to_string(k)) +
                              " segment shape differs from store length/rate");
    const auto n = count(SegmentKind::Contaminated);
    if (!mixes.empty() && mixes.size() != n)
      throw ManifestError("SegmentStore: " + std::to_string(mixes.size()) + " mix records for " + std::to_string(n) +
                          " contaminated segments");
    if (!splits.empty() && splits.size() != n)
      throw ManifestError("SegmentStore: " + std::to_string(splits.size()) + " split tags for " + std::to_string(n) +
                          " contaminated segments");
  }
};

inline nlohmann::json store_manifest(const SegmentStore& st) {
  nlohmann::json m;
  m["version"] = kStoreVersion;
  m["name"] = st.name;
  m["length"] = st.length;
  m["rate"] = st.rate;
  m["seed"] = st.seed;
  nlohmann::json counts = nlohmann::json::object();
  for (SegmentKind k : kStoreKinds) counts[std::string(eegclean::to_string(k))] = st.count(k);
  m["counts"] = counts;
  if (!st.mixes.empty()) {
    nlohmann::json mixes = nlohmann::json::array();
    for (const auto& r : st.mixes)
      mixes.push_back({{"lambda", r.lambda}, {"snr_db", r.snr.value}, {"eeg_id", r.eeg_id}, {"eog_id", r.eog_id}});
    m["mixes"] = std::move(mixes);
  }
  if (!st.splits.empty()) {
    nlohmann::json tags = nlohmann::json::array();
    for (SplitTag t : st.splits) tags.push_back(std::string(to_string(t)));
    m["splits"] = std::move(tags);
  }
  m["params"] = st.params;
  return m;
}

inline std::vector<std::uint8_t> encode_store(const SegmentStore& st) {
  st.check();
  io::ByteWriter w;
  w.text(kStoreMagic);
  const std::string manifest = store_manifest(st).dump();
  w.u32(static_cast<std::uint32_t>(manifest.size()));
  w.text(manifest);
  for (SegmentKind k : kStoreKinds)
    for (const auto& s : st.of(k))
      for (double v : s.samples) w.f32(static_cast<float>(v));
  return w.take();
}

namespace detail {

template <class T>
T manifest_field(const nlohmann::json& m, const char* key) {
  if (!m.contains(key)) throw ManifestError(std::string("manifest is missing '") + key + "'");
  try {
    return m.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ManifestError(std::string("manifest field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

inline SegmentStore decode_store(std::span<const std::uint8_t> bytes) {
  io::ByteReader rd(bytes);
  if (rd.remaining() < kStoreMagic.size() || rd.text(kStoreMagic.size(), "magic") != kStoreMagic)
    throw FormatError("not a segment store (bad magic)");
  const auto mlen = rd.u32("manifest length");
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(rd.text(mlen, "manifest"));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("segment store manifest is not valid JSON: ") + e.what());
  }
  if (!m.is_object()) throw FormatError("segment store manifest is not a JSON object");
  const int version = detail::manifest_field<int>(m, "version");
  if (version != kStoreVersion) throw FormatError("unsupported segment store version " + std::to_string(version));

  SegmentStore st;
  st.name = detail::manifest_field<std::string>(m, "name");
  st.length = detail::manifest_field<std::size_t>(m, "length");
  st.rate = detail::manifest_field<double>(m, "rate");
  st.seed = detail::manifest_field<std::uint64_t>(m, "seed");
  if (st.length == 0 || !(st.rate > 0.0)) throw ManifestError("manifest length and rate must be positive");
  const auto counts = detail::manifest_field<nlohmann::json>(m, "counts");
  if (m.contains("params")) st.params = m.at("params");

  for (SegmentKind k : kStoreKinds) {
    const std::string key(eegclean::to_string(k));
    const std::size_t n = counts.contains(key) ? detail::manifest_field<std::size_t>(counts, key.c_str()) : 0;
    const std::size_t floats = n * st.length;
    if (rd.remaining() / 4 < floats)
      throw ManifestError("payload array '" + key + "' is short: manifest declares " + std::to_string(n) +
                          " segments (" + std::to_string(floats) + " floats), only " +
                          std::to_string(rd.remaining() / 4) + " available");
    auto& out = st.of(k);
    out.resize(n);
    for (auto& s : out) {
      s.kind = k;
      s.sample_rate = st.rate;
      s.samples.resize(st.length);
      for (double& v : s.samples) v = rd.f32("payload");
    }
  }
  if (rd.remaining() != 0)
    throw ManifestError("payload has " + std::to_string(rd.remaining()) + " bytes beyond the declared counts");

  if (m.contains("mixes")) {
    for (const auto& r : m.at("mixes")) {
      MixRecord rec;
      rec.lambda = detail::manifest_field<double>(r, "lambda");
      rec.snr.value = detail::manifest_field<double>(r, "snr_db");
      rec.eeg_id = detail::manifest_field<std::uint32_t>(r, "eeg_id");
      rec.eog_id = detail::manifest_field<std::uint32_t>(r, "eog_id");
      st.mixes.push_back(rec);
    }
  }
  if (m.contains("splits"))
    for (const auto& t : m.at("splits")) st.splits.push_back(parse_split_tag(t.get<std::string>()));
  st.check();
  return st;
}

inline void write_store(const std::string& path, const SegmentStore& st) { io::write_file(path, encode_store(st)); }

inline SegmentStore read_store(const std::string& path) { return decode_store(io::read_file(path)); }

// CSV: first line "rate,<hz>", then one comma-separated segment per line.
inline std::vector<Segment> parse_csv_segments(std::string_view text, SegmentKind kind) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw FormatError("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("rate,", 0) != 0) throw FormatError("CSV header must be 'rate,<hz>'");
  double rate = 0.0;
  try {
    rate = std::stod(line.substr(5));
  } catch (const std::exception&) {
    throw FormatError("CSV header has an unreadable rate");
  }
  if (!(rate > 0.0)) throw FormatError("CSV rate must be positive");
  std::vector<Segment> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Segment s{{}, rate, kind};
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        s.samples.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw FormatError("CSV row " + std::to_string(row) + " has a non-numeric value");
      }
    }
    if (!out.empty() && s.size() != out.front().size())
      throw ManifestError("CSV row " + std::to_string(row) + " has " + std::to_string(s.size()) + " samples, expected " +
                          std::to_string(out.front().size()));
    validate(s);
    out.push_back(std::move(s));
  }
  return out;
}

// Reads segments of one kind from a store file, or from a CSV when the path
// ends in ".csv".
inline std::vector<Segment> import_segments(const std::string& path, SegmentKind kind) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    const auto bytes = io::read_file(path);
    return parse_csv_segments(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), kind);
  }
  return read_store(path).of(kind);
}

}  // namespace eegclean::dataset
