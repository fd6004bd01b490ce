#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsail/types.hpp"

namespace wsail::data {

/// PCM 16-bit mono 16 kHz only; anything else is UnsupportedFormat.
Waveform read_wav(const std::string& path);

/// Writes PCM16 mono. Peak-normalizes to 0.99 when any |sample| > 1.
void write_wav(const std::string& path, const Waveform& w);

struct ManifestEntry {
  std::string id;
  std::string audio_path;
  std::vector<std::string> labels;
  std::string split;  // "train" or "test"
  std::string visual_features_path;  // empty when absent
  std::string clean_audio_path;      // empty when absent; SDR reference
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> vocabulary;  // sorted class names

  int label_index(const std::string& name) const;
  std::vector<ManifestEntry> split(const std::string& which) const;
};

/// Line-delimited text: a `classes` header line, then one tab-separated
/// record per entry. Relative paths resolve against the manifest's
/// directory; every audio path is checked to exist.
Manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const Manifest& m);

struct VisualFeatureFile {
  Matrix rows;  // M x d_v
};

VisualFeatureFile load_visual_features(const std::string& path);
void save_visual_features(const std::string& path, const Matrix& rows);

struct ClassTemplate {
  std::string name;
  double fundamental_hz = 0.0;
  double partial_decay = 0.5;
};

struct SynthConfig {
  int classes = 5;
  double clip_seconds = 10.0;
  int train_count = 100;
  int test_count = 50;
  int noise_scenes = 8;
  std::uint64_t seed = 0;
  bool visual_features = true;
  int visual_dim = 64;
  int visual_regions = 5;
  /// Auto-derived from `classes` when left empty.
  std::vector<ClassTemplate> templates;
};

/// Weakly-labeled synthetic corpus: per clip a class-specific harmonic
/// note sequence mixed with a filtered-noise scene at a random SNR in
/// [5, 20] dB. Clean copies and the noise scenes are saved alongside for
/// separation evaluation. Byte-identical for identical seeds.
Manifest synth_dataset(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace wsail::data
