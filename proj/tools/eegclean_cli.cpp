// eegclean: data generation, augmentation, training, denoising and sweeps.
//
// Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eegclean/checkpoint.hpp"
#include "eegclean/dataset/augment.hpp"
#include "eegclean/dataset/store.hpp"
#include "eegclean/dataset/synth.hpp"
#include "eegclean/eval.hpp"
#include "eegclean/pipeline.hpp"

namespace {

using namespace eegclean;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Settings = std::map<std::string, std::string>;

struct Key {
  std::string name;
  std::string fallback;
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<Key> keys;
  Settings desk;
  std::function<void(const Settings&, std::size_t threads)> run;
};

// ---- typed access ---------------------------------------------------------

const std::string& raw(const Settings& s, const std::string& key) { return s.at(key); }

std::string required(const Settings& s, const std::string& key) {
  const auto& v = raw(s, key);
  if (v.empty()) throw UsageError("--" + key + " is required");
  return v;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw UsageError("--" + key + ": '" + text + "' is not a valid number");
  return value;
}

double get_double(const Settings& s, const std::string& key) {
  const auto& text = raw(s, key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UsageError("--" + key + ": '" + text + "' is not a valid number");
  }
}

double get_positive(const Settings& s, const std::string& key) {
  const double v = get_double(s, key);
  if (!(v > 0.0)) throw UsageError("--" + key + " must be positive");
  return v;
}

std::uint64_t get_u64(const Settings& s, const std::string& key) {
  return parse_number<std::uint64_t>(key, raw(s, key));
}

std::size_t get_count(const Settings& s, const std::string& key) {
  const auto v = parse_number<std::size_t>(key, raw(s, key));
  if (v == 0) throw UsageError("--" + key + " must be positive");
  return v;
}

Frontend get_frontend(const Settings& s, const std::string& key) {
  try {
    return parse_frontend(required(s, key));
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

tfa::Packing get_packing(const Settings& s, Frontend f) {
  const auto& text = raw(s, "packing");
  if (text.empty() || text == "default") return default_packing(f);
  try {
    const auto p = parse_packing(text);
    check_compatible(f, p);
    return p;
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

// "-10..4" or "-10,-5,0".
std::vector<SnrDb> parse_levels(const std::string& text) {
  std::vector<SnrDb> levels;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = parse_number<int>("levels", text.substr(0, dots));
    const int hi = parse_number<int>("levels", text.substr(dots + 2));
    if (lo > hi) throw UsageError("--levels: empty range '" + text + "'");
    for (int v = lo; v <= hi; ++v) levels.push_back({static_cast<double>(v)});
    return levels;
  }
  std::stringstream in(text);
  std::string item;
  Settings tmp;
  while (std::getline(in, item, ',')) {
    tmp["levels"] = item;
    levels.push_back({get_double(tmp, "levels")});
  }
  if (levels.empty()) throw UsageError("--levels: no SNR levels given");
  return levels;
}

nn::TrainConfig train_config(const Settings& s, std::size_t threads) {
  nn::TrainConfig c;
  c.learning_rate = get_positive(s, "lr");
  c.epochs = get_count(s, "epochs");
  c.batch_size = get_count(s, "batch");
  c.adam_beta1 = get_double(s, "beta1");
  c.adam_beta2 = get_double(s, "beta2");
  c.adam_eps = get_positive(s, "eps");
  c.clip_norm = get_double(s, "clip");
  c.rng_seed = get_u64(s, "seed");
  c.threads = threads;
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return c;
}

// ---- config files -----------------------------------------------------------

Settings read_config_file(const std::string& path, const Command& cmd) {
  const auto bytes = io::read_file(path);
  std::stringstream in(std::string(bytes.begin(), bytes.end()));
  Settings out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string t) {
    const auto b = t.find_first_not_of(" \t\r");
    const auto e = t.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const bool known = std::any_of(cmd.keys.begin(), cmd.keys.end(), [&](const Key& k) { return k.name == key; });
    if (!known) throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "' for " + cmd.name);
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

void write_run_config(const std::string& output, const std::string& command, const Settings& s) {
  std::string text = "# effective configuration of `eegclean " + command + "`\n";
  for (const auto& [k, v] : s) text += k + " = " + v + "\n";
  io::write_text_file(output + ".run.ini", text);
}

// ---- subcommands ------------------------------------------------------------

// Settings echoed into a store manifest. File paths are left out so the
// content does not depend on where files live; an input store is identified
// by the hash of its bytes instead.
nlohmann::json content_params(const Settings& s) {
  auto j = nlohmann::json(s);
  j.erase("out");
  if (j.contains("store")) j["store"] = eval::hash_hex(io::fnv1a(io::read_file(s.at("store"))));
  return j;
}

void cmd_gen_data(const Settings& s, std::size_t threads) {
  const auto eeg_n = get_count(s, "eeg");
  const auto eog_n = get_count(s, "eog");
  const auto length = get_count(s, "length");
  const double rate = get_positive(s, "rate");
  const auto seed = get_u64(s, "seed");
  const auto out = required(s, "out");

  dataset::SegmentStore st;
  st.name = "synthetic";
  st.length = length;
  st.rate = rate;
  st.seed = seed;
  st.params = content_params(s);
  st.add(SegmentKind::CleanEEG, dataset::synth_eeg(eeg_n, length, rate, seed, threads));
  st.add(SegmentKind::EOG, dataset::synth_eog(eog_n, length, rate, seed, threads));
  dataset::write_store(out, st);
  write_run_config(out, "gen-data", s);
  std::cout << "wrote " << out << ": " << eeg_n << " EEG, " << eog_n << " EOG segments\n";
}

void cmd_augment(const Settings& s, std::size_t threads) {
  const auto store_path = required(s, "store");
  const auto levels = parse_levels(raw(s, "levels"));
  const auto per_level = get_count(s, "pairs-per-level");
  const auto seed = get_u64(s, "seed");
  const auto out = required(s, "out");
  dataset::SplitSpec spec{get_positive(s, "train-frac"), get_positive(s, "val-frac"), get_positive(s, "test-frac"),
                          seed};

  const auto src = dataset::read_store(store_path);
  const auto& eeg = src.of(SegmentKind::CleanEEG);
  const auto& eog = src.of(SegmentKind::EOG);
  auto pairs = dataset::augment_sweep(eeg, eog, levels, per_level, seed, threads);
  auto st = dataset::augmented_store(pairs, eog, spec, "augmented", seed);
  st.params = content_params(s);
  dataset::write_store(out, st);
  write_run_config(out, "augment", s);
  std::cout << "wrote " << out << ": " << pairs.size() << " pairs over " << levels.size() << " SNR levels\n";
}

void write_history(const std::string& path, const nn::TrainHistory& h) {
  std::string text = "epoch,train_loss,val_rmse,steps\n";
  for (const auto& e : h.epochs)
    text += std::to_string(e.epoch) + "," + eval::format9(e.train_loss) + "," + eval::format9(e.val_rmse) + "," +
            std::to_string(e.steps) + "\n";
  io::write_text_file(path, text);
}

void cmd_train(const Settings& s, std::size_t threads) {
  const auto data_path = required(s, "data");
  const Frontend frontend = get_frontend(s, "frontend");
  const auto packing = get_packing(s, frontend);
  const auto hidden = get_count(s, "hidden");
  const double shift = get_double(s, "target-shift");
  const auto out = required(s, "out");
  const auto resume = raw(s, "resume");
  const auto cfg = train_config(s, threads);

  const auto st = dataset::read_store(data_path);
  auto train = dataset::pairs_from_store(st, dataset::SplitTag::Train);
  auto val = dataset::pairs_from_store(st, dataset::SplitTag::Val);
  std::vector<Segment> tn, tc, vn, vc;
  for (const auto& p : train) {
    tn.push_back(p.noisy);
    tc.push_back(p.clean);
  }
  for (const auto& p : val) {
    vn.push_back(p.noisy);
    vc.push_back(p.clean);
  }
  TrainingData data{tn, tc, vn, vc};
  auto progress = [](const nn::EpochStats& e) {
    std::printf("epoch %zu  train_loss %.6g  val_rmse %.6g\n", e.epoch, e.train_loss, e.val_rmse);
    std::fflush(stdout);
  };

  FitResult fit;
  if (!resume.empty()) {
    auto previous = read_checkpoint(resume);
    fit = resume_model(std::move(previous.model), data, frontend, cfg, progress);
  } else {
    fit = fit_model(data, frontend, packing, hidden, cfg, shift, progress);
  }
  Checkpoint ck;
  ck.model = std::move(fit.model);
  ck.norm = pooled_stats(tn);
  ck.train_config = cfg;
  write_checkpoint(out, ck);
  write_history(out + ".history.csv", fit.history);
  write_run_config(out, "train", s);
  std::cout << "wrote " << out << " (" << to_string(frontend) << ", hidden " << ck.hidden_dim() << ", "
            << ck.model.feature_dim << " features)\n";
}

void cmd_denoise(const Settings& s, std::size_t threads) {
  const auto ck = read_checkpoint(required(s, "ckpt"));
  const auto in = required(s, "in");
  const auto out = required(s, "out");
  const auto norm_mode = raw(s, "norm");
  if (norm_mode != "input" && norm_mode != "checkpoint") throw UsageError("--norm must be 'input' or 'checkpoint'");
  const auto& kind_text = raw(s, "kind");
  SegmentKind kind;
  if (kind_text == "contaminated") kind = SegmentKind::Contaminated;
  else if (kind_text == "eeg") kind = SegmentKind::CleanEEG;
  else if (kind_text == "eog") kind = SegmentKind::EOG;
  else throw UsageError("--kind must be contaminated, eeg or eog");

  dataset::SegmentStore st;
  if (in.size() >= 4 && in.compare(in.size() - 4, 4, ".csv") == 0) {
    auto segs = dataset::import_segments(in, kind);
    if (segs.empty()) throw ConfigError("no segments in '" + in + "'");
    st.name = "imported";
    st.length = segs.front().size();
    st.rate = segs.front().sample_rate;
    st.add(kind, std::move(segs));
  } else {
    st = dataset::read_store(in);
  }
  const auto& src = st.of(kind);
  if (src.empty()) throw ConfigError("'" + in + "' has no " + std::string(to_string(kind)) + " segments");
  std::vector<Segment> out_segs(src.size());
  const std::optional<NormStats> norm = norm_mode == "checkpoint" ? std::optional(ck.norm) : std::nullopt;
  parallel_for(src.size(), threads, [&](std::size_t i) { out_segs[i] = denoise(ck.model, src[i], norm); });
  st.of(SegmentKind::Denoised).clear();
  st.add(SegmentKind::Denoised, std::move(out_segs));
  dataset::write_store(out, st);
  write_run_config(out, "denoise", s);
  std::cout << "wrote " << out << ": " << src.size() << " denoised segments\n";
}

void cmd_sweep(const Settings& s, std::size_t threads) {
  const auto ck = read_checkpoint(required(s, "ckpt"));
  const auto test_path = required(s, "test");
  const auto out = required(s, "out");
  const auto& fmt = raw(s, "format");
  eval::ReportFormat format;
  if (fmt == "csv") format = eval::ReportFormat::CSV;
  else if (fmt == "json") format = eval::ReportFormat::JSON;
  else throw UsageError("--format must be csv or json");
  const Frontend frontend = raw(s, "frontend").empty() ? ck.model.frontend : get_frontend(s, "frontend");
  const auto& split_text = raw(s, "split");
  std::optional<dataset::SplitTag> which;
  if (split_text != "all") {
    try {
      which = dataset::parse_split_tag(split_text);
    } catch (const ManifestError&) {
      throw UsageError("--split must be train, val, test or all");
    }
  }

  const auto st = dataset::read_store(test_path);
  const auto pairs = dataset::pairs_from_store(st, which);
  const auto report = eval::run_sweep(ck, pairs, frontend, threads);
  eval::emit_report(report, format, out);
  write_run_config(out, "sweep", s);
  std::cout << "wrote " << out << ": " << report.rows.size() << " SNR levels, " << report.n_total
            << " segments\noverall model_mse " << eval::format9(report.model_mse) << "  baseline_mse "
            << eval::format9(report.baseline_mse) << "\n"
            << eval::reference_comparison(report);
}

void cmd_stub_ckpt(const Settings& s, std::size_t) {
  const Frontend frontend = get_frontend(s, "frontend");
  const auto packing = get_packing(s, frontend);
  const auto out = required(s, "out");
  Checkpoint ck;
  ck.model = DenoiserModel::stub(frontend, packing);
  write_checkpoint(out, ck);
  write_run_config(out, "stub-ckpt", s);
  std::cout << "wrote pass-through checkpoint " << out << " (" << to_string(frontend) << ")\n";
}

std::vector<Command> commands() {
  const std::vector<Key> train_keys{
      {"data", "", "augmented store with split tags"},
      {"frontend", "", "raw, stft, cwt or wsst"},
      {"packing", "default", "default, stacked or real"},
      {"seed", "0", "RNG seed for initialization, dropout and shuffling"},
      {"out", "", "checkpoint path"},
      {"lr", "0.001", "Adam learning rate"},
      {"epochs", "10", "training epochs"},
      {"batch", "150", "mini-batch size"},
      {"hidden", "150", "LSTM hidden units"},
      {"beta1", "0.9", "Adam beta1"},
      {"beta2", "0.999", "Adam beta2"},
      {"eps", "1e-8", "Adam epsilon"},
      {"clip", "1.0", "global gradient-norm clip (0 disables)"},
      {"target-shift", "3", "offset added to scaled targets"},
      {"resume", "", "continue training from this checkpoint"},
  };
  return {
      {"gen-data",
       "generate synthetic clean EEG and EOG segments",
       {{"eeg", "6164", "number of EEG segments"},
        {"eog", "5000", "number of EOG segments"},
        {"length", "512", "samples per segment"},
        {"rate", "256", "sample rate in Hz"},
        {"seed", "0", "RNG seed"},
        {"out", "", "output store"}},
       {{"eeg", "200"}, {"eog", "200"}},
       cmd_gen_data},
      {"augment",
       "contaminate EEG with EOG over a sweep of SNR levels and tag an 80/10/10 split",
       {{"store", "", "store with CleanEEG and EOG segments"},
        {"levels", "-10..4", "SNR levels in dB: lo..hi or a comma list"},
        {"pairs-per-level", "5000", "pairs generated per level"},
        {"seed", "0", "RNG seed"},
        {"train-frac", "0.8", "training fraction"},
        {"val-frac", "0.1", "validation fraction"},
        {"test-frac", "0.1", "test fraction"},
        {"out", "", "output store"}},
       {{"pairs-per-level", "10"}},
       cmd_augment},
      {"train",
       "train a BiLSTM denoiser on the train/val subsets",
       train_keys,
       {{"epochs", "2"}, {"hidden", "32"}, {"lr", "0.01"}, {"batch", "4"}},
       cmd_train},
      {"denoise",
       "denoise the segments of a store or CSV file",
       {{"ckpt", "", "checkpoint"},
        {"in", "", "input store or .csv"},
        {"out", "", "output store (input plus Denoised payload)"},
        {"kind", "contaminated", "segments to denoise: contaminated, eeg or eog"},
        {"norm", "input", "denormalize with each input's stats (input) or the checkpoint's (checkpoint)"}},
       {},
       cmd_denoise},
      {"sweep",
       "per-SNR evaluation of a checkpoint against the no-denoising baseline",
       {{"ckpt", "", "checkpoint"},
        {"test", "", "augmented store"},
        {"split", "test", "subset to evaluate: train, val, test or all"},
        {"frontend", "", "expected frontend (defaults to the checkpoint's)"},
        {"format", "csv", "csv or json"},
        {"out", "", "report path"}},
       {},
       cmd_sweep},
      {"stub-ckpt",
       "write a pass-through checkpoint for pipeline checks",
       {{"frontend", "", "raw, stft, cwt or wsst"}, {"packing", "default", "default, stacked or real"},
        {"out", "", "checkpoint path"}},
       {},
       cmd_stub_ckpt},
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG ocular-artifact removal with BiLSTM networks over time-frequency features"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  std::string preset;
  std::string config_path;
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--preset", preset, "parameter preset")->check(CLI::IsMember({"desk"}));
  app.add_option("--config", config_path, "key = value file for the subcommand");

  const auto cmds = commands();
  std::map<std::string, std::map<std::string, std::string>> flag_values;
  std::map<std::string, std::map<std::string, CLI::Option*>> flag_opts;
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    subs[c.name] = sub;
    for (const auto& k : c.keys) {
      std::string help = k.help + (k.fallback.empty() ? "" : " [" + k.fallback + "]");
      flag_opts[c.name][k.name] = sub->add_option("--" + k.name, flag_values[c.name][k.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (const auto& c : cmds) {
    if (!subs[c.name]->parsed()) continue;
    try {
      Settings s;
      for (const auto& k : c.keys) s[k.name] = k.fallback;
      if (preset == "desk")
        for (const auto& [k, v] : c.desk) s[k] = v;
      if (!config_path.empty())
        for (const auto& [k, v] : read_config_file(config_path, c)) s[k] = v;
      for (const auto& [k, opt] : flag_opts[c.name])
        if (opt->count() > 0) s[k] = flag_values[c.name][k];
      c.run(s, threads);
      return 0;
    } catch (const UsageError& e) {
      std::cerr << "eegclean " << c.name << ": " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "eegclean " << c.name << ": " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
