#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegclean/checkpoint.hpp"
#include "eegclean/dataset/augment.hpp"
#include "eegclean/errors.hpp"
#include "eegclean/parallel.hpp"
#include "eegclean/pipeline.hpp"
#include "eegclean/signal.hpp"

namespace eegclean::eval {

inline double mse(std::span<const double> clean, std::span<const double> denoised) {
  if (clean.size() != denoised.size()) throw ShapeError("mse: length mismatch");
  if (clean.empty()) throw ShapeError("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = clean[i] - denoised[i];
    s += d * d;
  }
  return s / static_cast<double>(clean.size());
}

inline double mse(const Segment& clean, const Segment& denoised) { return mse(clean.samples, denoised.samples); }
inline double rmse(const Segment& clean, const Segment& denoised) { return std::sqrt(mse(clean, denoised)); }

// The reporting metric: both signals are z-scored first.
inline double mse_z(const Segment& clean, const Segment& denoised) {
  return mse(zscore(clean).first, zscore(denoised).first);
}

// Reports carry 9 significant digits, the precision they are serialized with.
inline double report_precision(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

inline std::string format9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct SweepRow {
  double snr_db = 0.0;
  std::size_t n = 0;
  double model_mse = 0.0;
  double model_rmse = 0.0;  // mean of per-segment RMSE
  double baseline_mse = 0.0;
};

struct Reference {
  std::string name;
  double avg_mse;
};

// Published full-corpus averages; informational only.
inline const std::vector<Reference>& reference_avg_mse() {
  static const std::vector<Reference> refs{
      {"none", 1.0244}, {"raw", 0.5575}, {"stft", 0.4510}, {"cwt", 0.4243}, {"wsst", 0.3066}};
  return refs;
}

struct SweepReport {
  std::vector<SweepRow> rows;  // ascending SNR
  std::size_t n_total = 0;
  double model_mse = 0.0;
  double model_rmse = 0.0;       // mean of per-segment RMSE
  double model_rmse_of_mean = 0.0;  // sqrt(model_mse)
  double baseline_mse = 0.0;
  std::string frontend;
  std::string packing;
  std::string checkpoint_hash;  // 16 hex digits
  std::uint64_t seed = 0;
};

struct SegmentScore {
  double snr_db;
  double model_mse;
  double baseline_mse;
};

inline SweepReport aggregate(std::span<const SegmentScore> scores) {
  if (scores.empty()) throw ConfigError("sweep: empty test set");
  struct Acc {
    std::size_t n = 0;
    double mse = 0.0, rmse = 0.0, base = 0.0;
  };
  std::map<double, Acc> levels;
  Acc all;
  for (const auto& s : scores) {
    for (Acc* a : {&levels[s.snr_db], &all}) {
      a->n += 1;
      a->mse += s.model_mse;
      a->rmse += std::sqrt(s.model_mse);
      a->base += s.baseline_mse;
    }
  }
  SweepReport r;
  for (const auto& [snr, a] : levels) {
    const auto n = static_cast<double>(a.n);
    r.rows.push_back({snr, a.n, report_precision(a.mse / n), report_precision(a.rmse / n), report_precision(a.base / n)});
  }
  const auto n = static_cast<double>(all.n);
  r.n_total = all.n;
  r.model_mse = report_precision(all.mse / n);
  r.model_rmse = report_precision(all.rmse / n);
  r.model_rmse_of_mean = report_precision(std::sqrt(all.mse / n));
  r.baseline_mse = report_precision(all.base / n);
  return r;
}

// No-denoising reference: z-scored noisy against z-scored clean.
inline SweepReport baseline_mse(std::span<const dataset::AugmentedPair> pairs) {
  std::vector<SegmentScore> scores;
  for (const auto& p : pairs) {
    const double b = mse_z(p.clean, p.noisy);
    scores.push_back({p.mix.snr.value, b, b});
  }
  auto r = aggregate(scores);
  r.frontend = "none";
  return r;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline SweepReport run_sweep(const DenoiserModel& model, std::span<const dataset::AugmentedPair> test_pairs,
                             Frontend frontend, std::size_t threads = 1) {
  if (frontend != model.frontend)
    throw ConfigError("sweep: checkpoint frontend '" + std::string(to_string(model.frontend)) +
                      "' does not match requested '" + std::string(to_string(frontend)) + "'");
  std::vector<SegmentScore> scores(test_pairs.size());
  parallel_for(test_pairs.size(), threads, [&](std::size_t i) {
    const auto& p = test_pairs[i];
    scores[i] = {p.mix.snr.value, mse_z(p.clean, denoise(model, p.noisy)), mse_z(p.clean, p.noisy)};
  });
  auto r = aggregate(scores);
  r.frontend = std::string(to_string(model.frontend));
  r.packing = std::string(packing_name(model.packing));
  return r;
}

inline SweepReport run_sweep(const Checkpoint& ck, std::span<const dataset::AugmentedPair> test_pairs,
                             Frontend frontend, std::size_t threads = 1) {
  auto r = run_sweep(ck.model, test_pairs, frontend, threads);
  r.checkpoint_hash = hash_hex(checkpoint_hash(ck));
  r.seed = ck.train_config.rng_seed;
  return r;
}

enum class ReportFormat { CSV, JSON };

inline std::string report_csv(const SweepReport& r) {
  std::string out = "snr_db,n,model_mse,model_rmse,baseline_mse\n";
  for (const auto& row : r.rows)
    out += format9(row.snr_db) + "," + std::to_string(row.n) + "," + format9(row.model_mse) + "," +
           format9(row.model_rmse) + "," + format9(row.baseline_mse) + "\n";
  return out;
}

inline nlohmann::json report_to_json(const SweepReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"snr_db", row.snr_db},
                    {"n", row.n},
                    {"model_mse", row.model_mse},
                    {"model_rmse", row.model_rmse},
                    {"baseline_mse", row.baseline_mse}});
  nlohmann::json refs = nlohmann::json::object();
  for (const auto& ref : reference_avg_mse()) refs[ref.name] = ref.avg_mse;
  return {{"rows", rows},
          {"overall",
           {{"n", r.n_total},
            {"model_mse", r.model_mse},
            {"model_rmse", r.model_rmse},
            {"model_rmse_of_mean_mse", r.model_rmse_of_mean},
            {"baseline_mse", r.baseline_mse}}},
          {"metadata",
           {{"frontend", r.frontend},
            {"packing", r.packing},
            {"checkpoint_hash", r.checkpoint_hash},
            {"seed", r.seed},
            {"metric", "mse on z-scored signals"},
            {"rmse_aggregation", "model_rmse = mean of per-segment rmse; model_rmse_of_mean_mse = sqrt(model_mse)"}}},
          {"reference_avg_mse", {{"non_binding", true}, {"values", refs}}}};
}

inline SweepReport report_from_json(const nlohmann::json& j) {
  try {
    SweepReport r;
    for (const auto& row : j.at("rows"))
      r.rows.push_back({row.at("snr_db").get<double>(), row.at("n").get<std::size_t>(),
                        row.at("model_mse").get<double>(), row.at("model_rmse").get<double>(),
                        row.at("baseline_mse").get<double>()});
    const auto& o = j.at("overall");
    r.n_total = o.at("n").get<std::size_t>();
    r.model_mse = o.at("model_mse").get<double>();
    r.model_rmse = o.at("model_rmse").get<double>();
    r.model_rmse_of_mean = o.at("model_rmse_of_mean_mse").get<double>();
    r.baseline_mse = o.at("baseline_mse").get<double>();
    const auto& m = j.at("metadata");
    r.frontend = m.at("frontend").get<std::string>();
    r.packing = m.at("packing").get<std::string>();
    r.checkpoint_hash = m.at("checkpoint_hash").get<std::string>();
    r.seed = m.at("seed").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("sweep report JSON: ") + e.what());
  }
}

inline std::string report_json(const SweepReport& r) { return report_to_json(r).dump(2) + "\n"; }

inline std::string render_report(const SweepReport& r, ReportFormat f) {
  return f == ReportFormat::CSV ? report_csv(r) : report_json(r);
}

inline void emit_report(const SweepReport& r, ReportFormat f, const std::string& path) {
  io::write_text_file(path, render_report(r, f));
}

// One line per published reference, next to the measured value.
inline std::string reference_comparison(const SweepReport& r) {
  std::string out = "reference avg MSE (non-binding, full-corpus values):\n";
  for (const auto& ref : reference_avg_mse()) {
    out += "  " + ref.name + " " + format9(ref.avg_mse);
    if (ref.name == r.frontend) out += "  measured " + format9(r.model_mse);
    if (ref.name == "none") out += "  measured " + format9(r.baseline_mse);
    out += "\n";
  }
  return out;
}

}  // namespace eegclean::eval
