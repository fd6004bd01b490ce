#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pipeline.hpp"
#include "run_config.hpp"
#include "wsail/data.hpp"
#include "wsail/enhance.hpp"
#include "wsail/eval.hpp"
#include "wsail/model.hpp"
#include "wsail/nmf.hpp"
#include "wsail/proposals.hpp"
#include "wsail/rng.hpp"
#include "wsail/signal.hpp"

namespace fs = std::filesystem;
using namespace wsail;
using cli::RunConfig;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile:
    case ErrorCode::CorruptHeader:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::TruncatedFile:
    case ErrorCode::DuplicateId:
    case ErrorCode::UnknownLabel:
    case ErrorCode::IoError:
    case ErrorCode::MissingCheckpoint:
    case ErrorCode::DimMismatch:
    case ErrorCode::EmptyDataset:
    case ErrorCode::EmptyTrainingSet:
    case ErrorCode::EmptyNoiseCorpus:
    case ErrorCode::EmptyInput:
    case ErrorCode::WrongSampleRate:
    case ErrorCode::EmptyBatch:
      return kExitData;
    default:
      return kExitNumeric;
  }
}

void write_snapshot_for_dir(const fs::path& dir, const RunConfig& cfg) {
  cli::save_run_config((dir / "config.resolved.ini").string(), cfg);
}

void write_snapshot_for_file(const fs::path& file, const RunConfig& cfg) {
  cli::save_run_config(file.string() + ".config.ini", cfg);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

model::Checkpoint load_ckpt(const std::string& path) {
  if (!fs::exists(path)) {
    fail(ErrorCode::MissingCheckpoint, "checkpoint not found: " + path);
  }
  return model::load_checkpoint(path);
}

void apply_proposal_flag(RunConfig& cfg, const std::string& flag) {
  if (flag.empty()) return;
  if (flag == "tsp") {
    cfg.tsp = true;
    cfg.ncp = false;
  } else if (flag == "ncp") {
    cfg.tsp = false;
    cfg.ncp = true;
  } else if (flag == "both") {
    cfg.tsp = true;
    cfg.ncp = true;
  } else {
    throw CLI::ValidationError("--proposals", "must be tsp, ncp or both");
  }
}

void check_classes(const model::Params& params, const data::Manifest& m) {
  if (params.classes != static_cast<int>(m.vocabulary.size())) {
    fail(ErrorCode::DimMismatch,
         "checkpoint has " + std::to_string(params.classes) +
             " classes but manifest has " +
             std::to_string(m.vocabulary.size()));
  }
}

std::vector<Waveform> load_noise_corpus(const std::string& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) {
    fail(ErrorCode::MissingFile, "noise directory not found: " + dir);
  }
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    fail(ErrorCode::EmptyNoiseCorpus, "no .wav files in " + dir);
  }
  std::vector<Waveform> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(data::read_wav(f.string()));
  return out;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const RunConfig& cfg, const std::string& out_dir) {
  data::SynthConfig sc;
  sc.classes = cfg.synth_classes;
  sc.clip_seconds = cfg.synth_clip_seconds;
  sc.train_count = cfg.synth_train;
  sc.test_count = cfg.synth_test;
  sc.noise_scenes = cfg.synth_scenes;
  sc.seed = cfg.synth_seed;
  sc.visual_features = cfg.synth_visual;
  sc.visual_dim = cfg.synth_visual_dim;
  const data::Manifest m = data::synth_dataset(sc, out_dir);
  write_snapshot_for_dir(out_dir, cfg);
  std::cout << "wrote " << m.entries.size() << " clips, "
            << m.vocabulary.size() << " classes to " << out_dir << "\n"
            << "manifest: " << (fs::path(out_dir) / "manifest.tsv").string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

int cmd_train(const RunConfig& cfg, const std::string& manifest_path,
              const std::string& out_dir) {
  const data::Manifest m = data::load_manifest(manifest_path);
  const int visual_dim = cfg.use_visual ? cfg.synth_visual_dim : 0;
  if (cli::log_enabled()) cli::log_line("building training examples");
  const auto examples = cli::build_examples(m, "train", cfg, visual_dim);

  model::ModelConfig mc;
  mc.classes = static_cast<int>(m.vocabulary.size());
  mc.visual_dim = visual_dim;
  mc.learning_rate = cfg.learning_rate;
  mc.epochs = cfg.epochs;
  mc.seed = cfg.model_seed;
  mc.checkpoint_dir = out_dir;
  fs::create_directories(out_dir);
  if (cli::log_enabled()) cli::log_line("training");
  const model::TrainResult result = model::train(examples, mc);

  auto log = open_output(fs::path(out_dir) / "loss_log.txt");
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    log << "epoch " << (e + 1) << " loss " << result.epoch_losses[e] << "\n";
  }
  write_snapshot_for_dir(out_dir, cfg);
  std::cout << "trained " << cfg.epochs << " epochs on " << examples.size()
            << " examples; final loss " << std::setprecision(17)
            << result.epoch_losses.back() << "\n"
            << "checkpoint: "
            << (fs::path(out_dir) / "checkpoint.ckpt").string() << "\n";
  return 0;
}

// ------------------------------------------------------------- classify

int cmd_classify(const RunConfig& cfg, const std::string& manifest_path,
                 const std::string& ckpt_path, const std::string& out_path,
                 const std::string& split) {
  const data::Manifest m = data::load_manifest(manifest_path);
  const model::Checkpoint ckpt = load_ckpt(ckpt_path);
  check_classes(ckpt.params, m);
  const auto entries = m.split(split);
  if (entries.empty()) fail(ErrorCode::EmptyDataset, "empty split: " + split);
  const auto examples = cli::build_examples(m, split, cfg, ckpt.params.visual_dim);

  auto out = open_output(out_path);
  out << "# id\ttruth\tprediction\tscores\n";
  int correct = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const model::ForwardCache cache =
        model::forward_video(examples[i], ckpt.params);
    const int pred = model::predict(cache.score.phi);
    const int truth = cli::truth_index(entries[i], m);
    if (pred == truth) ++correct;
    out << entries[i].id << "\t" << m.vocabulary[static_cast<std::size_t>(truth)]
        << "\t" << m.vocabulary[static_cast<std::size_t>(pred)] << "\t";
    for (Eigen::Index c = 0; c < cache.score.phi.size(); ++c) {
      if (c) out << ",";
      out << cache.score.phi[c];
    }
    out << "\n";
  }
  write_snapshot_for_file(out_path, cfg);
  std::cout << "classified " << entries.size() << " clips, accuracy "
            << static_cast<double>(correct) / static_cast<double>(entries.size())
            << "\n";
  return 0;
}

// -------------------------------------------------------------- eval-cls

int cmd_eval_cls(const RunConfig& cfg, const std::string& manifest_path,
                 const std::string& ckpt_path, const std::string& out_path,
                 const std::string& split) {
  const data::Manifest m = data::load_manifest(manifest_path);
  const model::Checkpoint ckpt = load_ckpt(ckpt_path);
  check_classes(ckpt.params, m);
  const auto entries = m.split(split);
  const auto examples = cli::build_examples(m, split, cfg, ckpt.params.visual_dim);

  std::vector<int> predictions, truths;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    predictions.push_back(model::predict(examples[i], ckpt.params));
    truths.push_back(cli::truth_index(entries[i], m));
  }
  const eval::EvalReport report =
      eval::make_report(predictions, truths, ckpt.params.classes);

  auto out = open_output(out_path);
  out << "accuracy\t" << report.accuracy << "\n";
  for (Eigen::Index c = 0; c < report.per_class_accuracy.size(); ++c) {
    out << "class\t" << m.vocabulary[static_cast<std::size_t>(c)] << "\t"
        << report.per_class_accuracy[c] << "\n";
  }
  out << "confusion (rows = truth)\n";
  out << report.confusion << "\n";
  write_snapshot_for_file(out_path, cfg);
  std::cout << "accuracy " << report.accuracy << " over " << entries.size()
            << " clips\n";
  return 0;
}

// ------------------------------------------------------------ eval-noisy

int cmd_eval_noisy(const RunConfig& cfg, const std::string& manifest_path,
                   const std::string& ckpt_path, const std::string& noise_dir,
                   const std::string& out_path) {
  const data::Manifest m = data::load_manifest(manifest_path);
  const model::Checkpoint ckpt = load_ckpt(ckpt_path);
  check_classes(ckpt.params, m);
  const auto entries = m.split("test");
  if (entries.empty()) fail(ErrorCode::EmptyDataset, "empty test split");

  std::vector<Waveform> audio;
  std::vector<int> truths;
  for (const auto& e : entries) {
    audio.push_back(data::read_wav(e.audio_path));
    truths.push_back(cli::truth_index(e, m));
  }
  const std::vector<Waveform> noise = load_noise_corpus(noise_dir);

  const Vector dummy = Vector::Constant(ckpt.params.classes, -1.0);
  auto classify = [&](const Waveform& w) {
    const model::Example ex = cli::example_from_waveform(w, "eval", dummy, cfg);
    return model::predict(ex, ckpt.params);
  };
  std::vector<double> levels = cfg.snr_levels;
  levels.insert(levels.begin(), std::numeric_limits<double>::infinity());
  const eval::NoisyEvalResult result =
      eval::evaluate_noisy(audio, truths, noise, levels, cfg.eval_seed, classify);

  auto out = open_output(out_path);
  out << "# snr_db\taccuracy\n";
  for (std::size_t i = 0; i < result.snr_levels.size(); ++i) {
    if (std::isinf(result.snr_levels[i])) out << "clean";
    else out << result.snr_levels[i];
    out << "\t" << result.accuracies[i] << "\n";
  }
  write_snapshot_for_file(out_path, cfg);
  std::cout << "evaluated " << entries.size() << " clips at "
            << result.snr_levels.size() << " noise levels\n";
  return 0;
}

// -------------------------------------------------------------- eval-sdr

struct SdrCell {
  std::vector<double> values;
};

// The synthesis grid covers slightly fewer samples than the input, so
// compare estimate and reference over their common prefix.
double sdr_trimmed(const Waveform& estimate, const Waveform& reference) {
  const std::size_t n = std::min(estimate.size(), reference.size());
  Waveform e, r;
  e.samples.assign(estimate.samples.begin(),
                   estimate.samples.begin() + static_cast<long>(n));
  r.samples.assign(reference.samples.begin(),
                   reference.samples.begin() + static_cast<long>(n));
  return eval::sdr(e, r);
}

int cmd_eval_sdr(const RunConfig& cfg, const std::string& manifest_path,
                 const std::string& ckpt_path, const std::string& noise_dir,
                 const std::string& out_path, double snr_db, int limit) {
  const data::Manifest m = data::load_manifest(manifest_path);
  const model::Checkpoint ckpt = load_ckpt(ckpt_path);
  check_classes(ckpt.params, m);
  const std::vector<Waveform> noise = load_noise_corpus(noise_dir);

  std::vector<data::ManifestEntry> entries;
  for (const auto& e : m.split("test")) {
    if (!e.clean_audio_path.empty()) entries.push_back(e);
  }
  if (entries.empty()) {
    fail(ErrorCode::EmptyDataset, "no test entries with clean references");
  }
  if (limit > 0 && static_cast<int>(entries.size()) > limit) {
    entries.resize(static_cast<std::size_t>(limit));
  }

  const std::vector<std::optional<double>> taus = {std::nullopt, 0.1, 0.2};
  const std::vector<std::string> tau_names = {"soft", "tau=0.1", "tau=0.2"};
  // cell index: tau * 2 + (0 = label-known, 1 = label-unknown)
  std::vector<SdrCell> cells(taus.size() * 2);
  std::vector<double> mixture_sdr;

  RunConfig bag_cfg = cfg;  // enhancement scores NCP rows; keep TSPs out
  bag_cfg.tsp = false;
  bag_cfg.ncp = true;

  for (const auto& entry : entries) {
    const Waveform clean = data::read_wav(entry.clean_audio_path);
    Rng pick(cli::file_seed(cfg.eval_seed, entry.id));
    const Waveform& scene = noise[pick.below(noise.size())];
    const Waveform mixture = signal::mix_at_snr(clean, scene, snr_db);
    mixture_sdr.push_back(eval::sdr(mixture, clean));

    const ComplexSpectrogram spec = signal::stft(mixture);
    nmf::NmfConfig ncfg;
    ncfg.components = cfg.nmf_k;
    ncfg.iterations = cfg.nmf_iterations;
    ncfg.seed = cli::file_seed(cfg.nmf_seed, entry.id);
    const nmf::NmfModel nm = nmf::nmf_decompose(signal::magnitude(spec), ncfg);

    model::Example ex = cli::example_from_waveform(mixture, entry.id,
                                                   Vector::Constant(ckpt.params.classes, -1.0),
                                                   bag_cfg);
    const model::ForwardCache cache = model::forward_video(ex, ckpt.params);
    const int truth = cli::truth_index(entry, m);
    const int predicted = model::predict(cache.score.phi);

    for (int mode = 0; mode < 2; ++mode) {
      const int target = (mode == 0) ? truth : predicted;
      const enhance::ComponentScores scores =
          enhance::aggregate_scores(cache.audio.E, target, ex.audio_origins);
      for (std::size_t t = 0; t < taus.size(); ++t) {
        const enhance::EnhancementResult r =
            enhance::reconstruct(nm, spec, scores, taus[t]);
        cells[t * 2 + static_cast<std::size_t>(mode)].values.push_back(
            sdr_trimmed(r.source, clean));
      }
    }
    if (cli::log_enabled()) cli::log_line("enhanced " + entry.id);
  }

  auto out = open_output(out_path);
  out << "# mixtures: " << entries.size() << ", input snr " << snr_db
      << " dB\n";
  out << "mixture\tmedian " << eval::median(mixture_sdr) << "\tmean "
      << std::accumulate(mixture_sdr.begin(), mixture_sdr.end(), 0.0) /
             static_cast<double>(mixture_sdr.size())
      << "\n";
  out << "# mask\tlabel-known median\tlabel-known mean\t"
         "label-unknown median\tlabel-unknown mean\n";
  for (std::size_t t = 0; t < taus.size(); ++t) {
    out << tau_names[t];
    for (int mode = 0; mode < 2; ++mode) {
      const auto& v = cells[t * 2 + static_cast<std::size_t>(mode)].values;
      out << "\t" << eval::median(v) << "\t"
          << std::accumulate(v.begin(), v.end(), 0.0) /
                 static_cast<double>(v.size());
    }
    out << "\n";
  }
  write_snapshot_for_file(out_path, cfg);
  std::cout << "separation report over " << entries.size()
            << " mixtures written to " << out_path << "\n";
  return 0;
}

// --------------------------------------------------------------- enhance

int cmd_enhance(const RunConfig& cfg, const std::string& input,
                const std::string& ckpt_path, const std::string& out_dir) {
  const model::Checkpoint ckpt = load_ckpt(ckpt_path);
  const Waveform w = data::read_wav(input);

  enhance::PipelineConfig pc;
  pc.nmf.components = cfg.nmf_k;
  pc.nmf.iterations = cfg.nmf_iterations;
  pc.nmf.seed = cli::file_seed(cfg.nmf_seed, input);
  pc.tau = cfg.tau;
  pc.include_tsp = cfg.tsp;
  if (cfg.enhance_mode == "label-known") {
    if (cfg.enhance_class < 0 || cfg.enhance_class >= ckpt.params.classes) {
      fail(ErrorCode::UnknownLabel,
           "label-known mode needs --class in [0, " +
               std::to_string(ckpt.params.classes) + ")");
    }
    pc.mode = enhance::LabelMode::Known;
    pc.known_class = cfg.enhance_class;
  } else {
    pc.mode = enhance::LabelMode::Unknown;
  }

  const enhance::EnhancementResult r =
      enhance::enhance_pipeline(w, ckpt.params, pc);
  fs::create_directories(out_dir);
  data::write_wav((fs::path(out_dir) / "source.wav").string(), r.source);
  data::write_wav((fs::path(out_dir) / "noise.wav").string(), r.noise);

  auto report = open_output(fs::path(out_dir) / "report.txt");
  report << "selected_class\t" << r.selected_class << "\n";
  report << "tau\t";
  if (r.tau.has_value()) report << *r.tau;
  else report << "none";
  report << "\n# component\talpha\talpha_prime\n";
  for (Eigen::Index k = 0; k < r.scores.alpha.size(); ++k) {
    report << k << "\t" << r.scores.alpha[k] << "\t" << r.scores.alpha_prime[k]
           << "\n";
  }
  write_snapshot_for_dir(out_dir, cfg);
  std::cout << "enhanced " << input << " -> " << out_dir
            << " (selected class " << r.selected_class << ")\n";
  return 0;
}

// ----------------------------------------------------------- nmf-inspect

int cmd_nmf_inspect(const RunConfig& cfg, const std::string& input,
                    const std::string& out_path) {
  const Waveform w = data::read_wav(input);
  const ComplexSpectrogram spec = signal::stft(w);
  const MagnitudeSpectrogram mag = signal::magnitude(spec);
  nmf::NmfConfig ncfg;
  ncfg.components = cfg.nmf_k;
  ncfg.iterations = cfg.nmf_iterations;
  ncfg.seed = cfg.nmf_seed;
  std::vector<double> trace;
  const nmf::NmfModel m = nmf::nmf_decompose(mag, ncfg, &trace);

  const Matrix wh = m.W * m.H;
  const double total = wh.sum();
  auto out = open_output(out_path);
  out << "kl_initial\t" << trace.front() << "\n";
  out << "kl_final\t" << trace.back() << "\n";
  out << "# component\tenergy\tenergy_share\tpeak_activation\n";
  for (Eigen::Index k = 0; k < m.components(); ++k) {
    const double energy = (m.W.col(k) * m.H.row(k)).sum();
    out << k << "\t" << energy << "\t" << energy / total << "\t"
        << m.H.row(k).maxCoeff() << "\n";
  }
  write_snapshot_for_file(out_path, cfg);
  std::cout << "kl " << trace.front() << " -> " << trace.back() << " over "
            << cfg.nmf_iterations << " iterations\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakly-supervised audio event classification and enhancement"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "INI run configuration")
      ->check(CLI::ExistingFile);

  // Shared overrides; registered per subcommand below.
  RunConfig cfg;
  bool cfg_loaded = false;

  struct Args {
    std::string out, manifest, checkpoint, noise_dir, input;
    std::string split = "test";
    std::string proposals;
    std::string mode;
    double snr = 0.0;
    int limit = 0;
    std::optional<double> tau;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs, epochs, klass;
    std::optional<double> lr;
    std::optional<bool> visual;
  } a;

  auto add_common = [&](CLI::App* sub, bool with_proposals) {
    sub->add_option("--jobs", a.jobs, "worker threads");
    sub->add_option("--seed", a.seed, "seed override");
    if (with_proposals) {
      sub->add_option("--proposals", a.proposals, "tsp, ncp or both");
    }
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", a.out, "output directory")->required();
  synth->add_option("--classes", cfg.synth_classes, "number of classes");
  synth->add_option("--train", cfg.synth_train, "training clips per class");
  synth->add_option("--test", cfg.synth_test, "test clips per class");
  synth->add_option("--scenes", cfg.synth_scenes, "noise scenes");
  synth->add_option("--clip-seconds", cfg.synth_clip_seconds, "clip length");
  synth->add_option("--visual-dim", cfg.synth_visual_dim, "feature width");
  synth->add_flag("--visual,!--no-visual", cfg.synth_visual,
                  "emit visual features");
  add_common(synth, false);

  auto* train = app.add_subcommand("train", "train a scoring model");
  train->add_option("--manifest", a.manifest, "corpus manifest")->required();
  train->add_option("--out", a.out, "checkpoint directory")->required();
  train->add_option("--epochs", a.epochs, "training epochs");
  train->add_option("--lr", a.lr, "learning rate");
  train->add_flag("--visual,!--no-visual", a.visual, "use the visual branch");
  add_common(train, true);

  auto* classify = app.add_subcommand("classify", "score and label clips");
  classify->add_option("--manifest", a.manifest)->required();
  classify->add_option("--checkpoint", a.checkpoint)->required();
  classify->add_option("--out", a.out, "predictions file")->required();
  classify->add_option("--split", a.split, "manifest split");
  add_common(classify, true);

  auto* eval_cls = app.add_subcommand("eval-cls", "classification report");
  eval_cls->add_option("--manifest", a.manifest)->required();
  eval_cls->add_option("--checkpoint", a.checkpoint)->required();
  eval_cls->add_option("--out", a.out, "report file")->required();
  eval_cls->add_option("--split", a.split, "manifest split");
  add_common(eval_cls, true);

  auto* eval_noisy = app.add_subcommand("eval-noisy", "accuracy under noise");
  eval_noisy->add_option("--manifest", a.manifest)->required();
  eval_noisy->add_option("--checkpoint", a.checkpoint)->required();
  eval_noisy->add_option("--noise-dir", a.noise_dir)->required();
  eval_noisy->add_option("--out", a.out, "report file")->required();
  add_common(eval_noisy, true);

  auto* eval_sdr = app.add_subcommand("eval-sdr", "separation quality report");
  eval_sdr->add_option("--manifest", a.manifest)->required();
  eval_sdr->add_option("--checkpoint", a.checkpoint)->required();
  eval_sdr->add_option("--noise-dir", a.noise_dir)->required();
  eval_sdr->add_option("--out", a.out, "report file")->required();
  eval_sdr->add_option("--snr", a.snr, "mixing SNR in dB");
  eval_sdr->add_option("--limit", a.limit, "cap on evaluated mixtures");
  add_common(eval_sdr, false);

  auto* enhance_cmd = app.add_subcommand("enhance", "separate one recording");
  enhance_cmd->add_option("--input", a.input, "input wav")->required();
  enhance_cmd->add_option("--checkpoint", a.checkpoint)->required();
  enhance_cmd->add_option("--out", a.out, "output directory")->required();
  enhance_cmd->add_option("--tau", a.tau, "indicator threshold in [0,1]");
  enhance_cmd->add_option("--mode", a.mode, "label-known or label-unknown");
  enhance_cmd->add_option("--class", a.klass, "target class (label-known)");
  add_common(enhance_cmd, true);

  auto* inspect = app.add_subcommand("nmf-inspect", "decomposition stats");
  inspect->add_option("--input", a.input, "input wav")->required();
  inspect->add_option("--out", a.out, "report file")->required();
  add_common(inspect, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!config_path.empty()) {
      const RunConfig loaded = cli::load_run_config(config_path);
      // Synth fields given on the command line win over the file.
      RunConfig merged = loaded;
      if (synth->parsed()) {
        if (synth->count("--classes")) merged.synth_classes = cfg.synth_classes;
        if (synth->count("--train")) merged.synth_train = cfg.synth_train;
        if (synth->count("--test")) merged.synth_test = cfg.synth_test;
        if (synth->count("--scenes")) merged.synth_scenes = cfg.synth_scenes;
        if (synth->count("--clip-seconds"))
          merged.synth_clip_seconds = cfg.synth_clip_seconds;
        if (synth->count("--visual-dim"))
          merged.synth_visual_dim = cfg.synth_visual_dim;
        if (synth->count("--visual") || synth->count("--no-visual"))
          merged.synth_visual = cfg.synth_visual;
      }
      cfg = merged;
      cfg_loaded = true;
    }
    (void)cfg_loaded;
    if (a.jobs) cfg.jobs = *a.jobs;
    if (a.seed) {
      cfg.synth_seed = *a.seed;
      cfg.nmf_seed = *a.seed;
      cfg.model_seed = *a.seed;
      cfg.eval_seed = *a.seed;
    }
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.lr) cfg.learning_rate = *a.lr;
    if (a.visual) cfg.use_visual = *a.visual;
    if (a.tau) cfg.tau = *a.tau;
    if (a.klass) cfg.enhance_class = *a.klass;
    if (!a.mode.empty()) {
      if (a.mode != "label-known" && a.mode != "label-unknown") {
        std::cerr << "error: --mode must be label-known or label-unknown\n";
        return kExitUsage;
      }
      cfg.enhance_mode = a.mode;
    }
    apply_proposal_flag(cfg, a.proposals);

    if (synth->parsed()) return cmd_synth(cfg, a.out);
    if (train->parsed()) return cmd_train(cfg, a.manifest, a.out);
    if (classify->parsed())
      return cmd_classify(cfg, a.manifest, a.checkpoint, a.out, a.split);
    if (eval_cls->parsed())
      return cmd_eval_cls(cfg, a.manifest, a.checkpoint, a.out, a.split);
    if (eval_noisy->parsed())
      return cmd_eval_noisy(cfg, a.manifest, a.checkpoint, a.noise_dir, a.out);
    if (eval_sdr->parsed())
      return cmd_eval_sdr(cfg, a.manifest, a.checkpoint, a.noise_dir, a.out,
                          a.snr, a.limit);
    if (enhance_cmd->parsed())
      return cmd_enhance(cfg, a.input, a.checkpoint, a.out);
    if (inspect->parsed()) return cmd_nmf_inspect(cfg, a.input, a.out);
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
