#include "pipeline.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include "wsail/enhance.hpp"
#include "wsail/nmf.hpp"
#include "wsail/proposals.hpp"
#include "wsail/signal.hpp"

namespace wsail::cli {

std::uint64_t file_seed(std::uint64_t base, const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return base ^ h;
}

Vector label_vector(const data::ManifestEntry& entry, const data::Manifest& m) {
  Vector y = Vector::Constant(static_cast<Eigen::Index>(m.vocabulary.size()), -1.0);
  for (const auto& name : entry.labels) y[m.label_index(name)] = 1.0;
  return y;
}

int truth_index(const data::ManifestEntry& entry, const data::Manifest& m) {
  if (entry.labels.empty()) {
    fail(ErrorCode::UnknownLabel, "entry has no labels: " + entry.id);
  }
  return m.label_index(entry.labels.front());
}

namespace {

void append_bag(model::Example& ex, const proposals::ProposalBag& bag) {
  const Eigen::Index start = ex.audio_patches.rows();
  const Eigen::Index p = static_cast<Eigen::Index>(bag.size());
  ex.audio_patches.conservativeResize(start + p, model::kPatchInputDim);
  for (Eigen::Index i = 0; i < p; ++i) {
    ex.audio_patches.row(start + i) =
        model::flatten_patch(bag.patches[static_cast<std::size_t>(i)].values)
            .transpose();
    ex.audio_origins.push_back(bag.patches[static_cast<std::size_t>(i)].origin);
  }
}

}  // namespace

model::Example example_from_waveform(const Waveform& w, const std::string& id,
                                     const Vector& label,
                                     const RunConfig& cfg) {
  model::Example ex;
  ex.id = id;
  ex.label = label;
  ex.audio_patches.resize(0, model::kPatchInputDim);

  const ComplexSpectrogram spec = signal::stft(w);
  if (cfg.tsp) {
    append_bag(ex, proposals::make_tsp(signal::log_mel(signal::magnitude(spec))));
  }
  if (cfg.ncp) {
    nmf::NmfConfig ncfg;
    ncfg.components = cfg.nmf_k;
    ncfg.iterations = cfg.nmf_iterations;
    ncfg.seed = file_seed(cfg.nmf_seed, id);
    const nmf::NmfModel m = nmf::nmf_decompose(signal::magnitude(spec), ncfg);
    append_bag(ex, proposals::make_ncp(nmf::component_tracks(m, spec)));
  }
  if (!cfg.tsp && !cfg.ncp) {
    fail(ErrorCode::EmptyBag, "at least one proposal type must be enabled");
  }
  return ex;
}

model::Example build_example(const data::ManifestEntry& entry,
                             const data::Manifest& m, const RunConfig& cfg,
                             int visual_dim) {
  model::Example ex = example_from_waveform(data::read_wav(entry.audio_path),
                                            entry.id, label_vector(entry, m),
                                            cfg);
  if (visual_dim > 0) {
    if (entry.visual_features_path.empty()) {
      fail(ErrorCode::MissingFile,
           "visual branch enabled but entry has no features: " + entry.id);
    }
    ex.visual_features = data::load_visual_features(entry.visual_features_path).rows;
    if (ex.visual_features.cols() != visual_dim) {
      fail(ErrorCode::DimMismatch,
           "visual feature width mismatch for entry " + entry.id);
    }
  }
  return ex;
}

std::vector<model::Example> build_examples(const data::Manifest& m,
                                           const std::string& split,
                                           const RunConfig& cfg,
                                           int visual_dim) {
  const std::vector<data::ManifestEntry> entries = m.split(split);
  std::vector<model::Example> out(entries.size());
  const int jobs = std::max(1, cfg.jobs);
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= entries.size()) return;
      try {
        out[i] = build_example(entries[i], m, cfg, visual_dim);
        if (log_enabled()) {
          log_line("built example " + entries[i].id + " (" +
                   std::to_string(out[i].audio_patches.rows()) + " proposals)");
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

bool log_enabled() {
  const char* v = std::getenv("WSAIL_LOG");
  return v != nullptr && v[0] != '\0' && std::string(v) != "0";
}

void log_line(const std::string& msg) {
  static std::mutex log_mutex;
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "[wsail] " << msg << "\n";
}

}  // namespace wsail::cli
