#include "wsail/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "wsail/rng.hpp"
#include "wsail/signal.hpp"

static_assert(std::endian::native == std::endian::little,
              "WAV and feature formats are little-endian");

namespace fs = std::filesystem;

namespace wsail::data {
namespace {

template <typename T>
T read_le(std::ifstream& f, const std::string& path) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) fail(ErrorCode::TruncatedFile, "truncated file: " + path);
  return v;
}

template <typename T>
void write_le(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::MissingFile, "cannot open: " + path);
  char riff[4], wave[4];
  f.read(riff, 4);
  if (!f || std::memcmp(riff, "RIFF", 4) != 0) {
    fail(ErrorCode::CorruptHeader, "not a RIFF file: " + path);
  }
  read_le<std::uint32_t>(f, path);  // riff size
  f.read(wave, 4);
  if (!f || std::memcmp(wave, "WAVE", 4) != 0) {
    fail(ErrorCode::CorruptHeader, "not a WAVE file: " + path);
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (f) {
    char tag[4];
    f.read(tag, 4);
    if (!f) break;
    const auto chunk_size = read_le<std::uint32_t>(f, path);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (chunk_size < 16) fail(ErrorCode::CorruptHeader, "short fmt chunk: " + path);
      format = read_le<std::uint16_t>(f, path);
      channels = read_le<std::uint16_t>(f, path);
      rate = read_le<std::uint32_t>(f, path);
      read_le<std::uint32_t>(f, path);  // byte rate
      read_le<std::uint16_t>(f, path);  // block align
      bits = read_le<std::uint16_t>(f, path);
      f.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) fail(ErrorCode::CorruptHeader, "data before fmt: " + path);
      if (format != 1 || bits != 16) {
        fail(ErrorCode::UnsupportedFormat, "need PCM16: " + path);
      }
      if (channels != 1) {
        fail(ErrorCode::UnsupportedFormat, "need mono audio: " + path);
      }
      if (rate != static_cast<std::uint32_t>(kSampleRate)) {
        fail(ErrorCode::UnsupportedFormat,
             "need 16 kHz audio, got " + std::to_string(rate) + ": " + path);
      }
      if (chunk_size == 0) fail(ErrorCode::EmptyInput, "empty data chunk: " + path);
      const std::size_t n = chunk_size / 2;
      std::vector<std::int16_t> raw(n);
      f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 2));
      if (!f) fail(ErrorCode::TruncatedFile, "truncated data chunk: " + path);
      Waveform w;
      w.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) w.samples[i] = raw[i] / 32768.0;
      return w;
    } else {
      f.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  fail(ErrorCode::CorruptHeader, "no data chunk: " + path);
}

void write_wav(const std::string& path, const Waveform& w) {
  if (w.samples.empty()) fail(ErrorCode::EmptyInput, "write_wav: empty waveform");
  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::abs(s));
  const double scale = peak > 1.0 ? 0.99 / peak : 1.0;

  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open for writing: " + path);
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(w.samples.size() * 2);
  f.write("RIFF", 4);
  write_le<std::uint32_t>(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  write_le<std::uint32_t>(f, 16);
  write_le<std::uint16_t>(f, 1);  // PCM
  write_le<std::uint16_t>(f, 1);  // mono
  write_le<std::uint32_t>(f, kSampleRate);
  write_le<std::uint32_t>(f, kSampleRate * 2);
  write_le<std::uint16_t>(f, 2);
  write_le<std::uint16_t>(f, 16);
  f.write("data", 4);
  write_le<std::uint32_t>(f, data_bytes);
  for (double s : w.samples) {
    const double v = std::clamp(s * scale, -1.0, 1.0);
    // Same 1/32768 step as the reader, so a round trip stays within
    // half a quantization step.
    const auto q = static_cast<std::int16_t>(
        std::clamp<long>(std::lround(v * 32768.0), -32768, 32767));
    write_le<std::int16_t>(f, q);
  }
  if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

int Manifest::label_index(const std::string& name) const {
  const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), name);
  if (it == vocabulary.end() || *it != name) {
    fail(ErrorCode::UnknownLabel, "unknown label: " + name);
  }
  return static_cast<int>(it - vocabulary.begin());
}

std::vector<ManifestEntry> Manifest::split(const std::string& which) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == which) out.push_back(e);
  }
  return out;
}

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty() || p == "-") return {};
  fs::path path(p);
  return (path.is_absolute() ? path : base / path).string();
}

std::string relativize(const fs::path& base, const std::string& p) {
  if (p.empty()) return "-";
  return fs::relative(p, base).string();
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::MissingFile, "cannot open manifest: " + path);
  const fs::path base = fs::path(path).parent_path();
  Manifest m;
  std::string line;
  std::set<std::string> seen_ids;
  bool have_header = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_on(line, '\t');
    if (!have_header) {
      if (fields.size() != 2 || fields[0] != "classes") {
        fail(ErrorCode::CorruptHeader,
             "manifest must start with a classes line: " + path);
      }
      m.vocabulary = split_on(fields[1], ',');
      std::sort(m.vocabulary.begin(), m.vocabulary.end());
      have_header = true;
      continue;
    }
    if (fields.size() < 4) {
      fail(ErrorCode::CorruptHeader, "short manifest record: " + line);
    }
    ManifestEntry e;
    e.id = fields[0];
    e.split = fields[1];
    e.audio_path = resolve(base, fields[2]);
    e.labels = split_on(fields[3], ',');
    if (fields.size() > 4) e.visual_features_path = resolve(base, fields[4]);
    if (fields.size() > 5) e.clean_audio_path = resolve(base, fields[5]);

    if (!seen_ids.insert(e.id).second) {
      fail(ErrorCode::DuplicateId, "duplicate manifest id: " + e.id);
    }
    if (e.labels.empty()) {
      fail(ErrorCode::CorruptHeader, "entry without labels: " + e.id);
    }
    for (const auto& l : e.labels) m.label_index(l);  // UnknownLabel check
    if (!fs::exists(e.audio_path)) {
      fail(ErrorCode::MissingFile, "audio file missing: " + e.audio_path);
    }
    m.entries.push_back(std::move(e));
  }
  if (!have_header) fail(ErrorCode::CorruptHeader, "empty manifest: " + path);
  return m;
}

void save_manifest(const std::string& path, const Manifest& m) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::IoError, "cannot open for writing: " + path);
  const fs::path base = fs::path(path).parent_path();
  f << "classes\t";
  for (std::size_t i = 0; i < m.vocabulary.size(); ++i) {
    f << (i ? "," : "") << m.vocabulary[i];
  }
  f << "\n";
  for (const auto& e : m.entries) {
    f << e.id << '\t' << e.split << '\t' << relativize(base, e.audio_path)
      << '\t';
    for (std::size_t i = 0; i < e.labels.size(); ++i) {
      f << (i ? "," : "") << e.labels[i];
    }
    f << '\t' << relativize(base, e.visual_features_path) << '\t'
      << relativize(base, e.clean_audio_path) << "\n";
  }
  if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

VisualFeatureFile load_visual_features(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::MissingFile, "cannot open: " + path);
  char magic[11];
  f.read(magic, 11);
  if (!f || std::string(magic, 11) != std::string("WSAIL-FEAT\0", 11)) {
    fail(ErrorCode::CorruptHeader, "bad feature magic: " + path);
  }
  const auto version = read_le<std::uint32_t>(f, path);
  if (version != 1) fail(ErrorCode::CorruptHeader, "bad feature version: " + path);
  const auto rows = read_le<std::uint32_t>(f, path);
  const auto dim = read_le<std::uint32_t>(f, path);
  if (rows == 0 || dim == 0) {
    fail(ErrorCode::DimMismatch, "feature file with zero dims: " + path);
  }
  VisualFeatureFile out;
  out.rows.resize(rows, dim);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c) {
      out.rows(r, c) = read_le<double>(f, path);
    }
  }
  return out;
}

void save_visual_features(const std::string& path, const Matrix& rows) {
  if (rows.rows() == 0 || rows.cols() == 0) {
    fail(ErrorCode::DimMismatch, "save_visual_features: empty matrix");
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open for writing: " + path);
  f.write("WSAIL-FEAT\0", 11);
  write_le<std::uint32_t>(f, 1);
  write_le<std::uint32_t>(f, static_cast<std::uint32_t>(rows.rows()));
  write_le<std::uint32_t>(f, static_cast<std::uint32_t>(rows.cols()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      write_le<double>(f, rows(r, c));
    }
  }
  if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

namespace {

std::vector<ClassTemplate> default_templates(int classes) {
  std::vector<ClassTemplate> t(classes);
  for (int c = 0; c < classes; ++c) {
    char name[16];
    std::snprintf(name, sizeof(name), "inst%02d", c);
    t[c].name = name;
    // Fundamentals spaced ~5 semitones apart; distinct partial decays
    // give each class its own spectral envelope.
    t[c].fundamental_hz = 220.0 * std::pow(2.0, 0.4 * c);
    t[c].partial_decay = 0.35 + 0.1 * c;
  }
  return t;
}

// Harmonic note sequence: random onsets, +-2% fundamental jitter, fixed
// per-class partial decay, 20 ms raised-cosine edges.
std::vector<double> render_tone(const ClassTemplate& tpl, std::size_t len,
                                Rng& rng) {
  std::vector<double> out(len, 0.0);
  constexpr int kPartials = 6;
  constexpr double kEdge = 0.020;
  std::size_t cursor = static_cast<std::size_t>(
      rng.uniform(0.0, 0.15) * kSampleRate);
  while (cursor + kSampleRate / 5 < len) {
    const double dur = rng.uniform(0.35, 1.0);
    const double f0 = tpl.fundamental_hz * (1.0 + rng.uniform(-0.02, 0.02));
    const double amp = rng.uniform(0.25, 0.5);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const std::size_t note_len =
        std::min(len - cursor, static_cast<std::size_t>(dur * kSampleRate));
    for (std::size_t i = 0; i < note_len; ++i) {
      const double t = static_cast<double>(i) / kSampleRate;
      double env = 1.0;
      const double t_end = static_cast<double>(note_len) / kSampleRate - t;
      if (t < kEdge) env = 0.5 - 0.5 * std::cos(std::numbers::pi * t / kEdge);
      if (t_end < kEdge) {
        env *= 0.5 - 0.5 * std::cos(std::numbers::pi * t_end / kEdge);
      }
      double s = 0.0;
      double partial_amp = 1.0;
      for (int p = 1; p <= kPartials; ++p) {
        const double f = f0 * p;
        if (f < 7800.0) {
          s += partial_amp * std::sin(2.0 * std::numbers::pi * f * t + phase * p);
        }
        partial_amp *= tpl.partial_decay;
      }
      out[cursor + i] += amp * env * s;
    }
    cursor += note_len +
              static_cast<std::size_t>(rng.uniform(0.05, 0.3) * kSampleRate);
  }
  // Normalize to a fixed RMS so mixing SNRs are comparable across clips.
  double power = 0.0;
  for (double s : out) power += s * s;
  const double rms = std::sqrt(power / len);
  if (rms > 0.0) {
    for (double& s : out) s *= 0.1 / rms;
  }
  return out;
}

// Colored noise scene: one-pole lowpass over white noise with a slow
// amplitude modulation, RMS 0.1.
std::vector<double> render_scene(std::size_t len, Rng& rng) {
  std::vector<double> out(len);
  const double pole = rng.uniform(0.6, 0.97);
  const double mod_hz = rng.uniform(0.1, 0.6);
  const double mod_depth = rng.uniform(0.1, 0.5);
  double state = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    state = pole * state + (1.0 - pole) * rng.normal();
    const double t = static_cast<double>(i) / kSampleRate;
    const double mod =
        1.0 + mod_depth * std::sin(2.0 * std::numbers::pi * mod_hz * t);
    out[i] = state * mod;
  }
  double power = 0.0;
  for (double s : out) power += s * s;
  const double rms = std::sqrt(power / len);
  for (double& s : out) s *= 0.1 / rms;
  return out;
}

}  // namespace

Manifest synth_dataset(const SynthConfig& cfg, const std::string& out_dir) {
  if (cfg.clip_seconds <= 1.0) {
    fail(ErrorCode::DomainError, "synth_dataset: clips must exceed 1 s");
  }
  std::error_code ec;
  for (const char* sub : {"", "/audio", "/clean", "/noise", "/features"}) {
    fs::create_directories(out_dir + sub, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + out_dir + sub);
  }
  const auto templates =
      cfg.templates.empty() ? default_templates(cfg.classes) : cfg.templates;
  if (static_cast<int>(templates.size()) != cfg.classes) {
    fail(ErrorCode::DomainError, "synth_dataset: template/class mismatch");
  }

  Rng rng(cfg.seed);
  const auto clip_len =
      static_cast<std::size_t>(cfg.clip_seconds * kSampleRate);

  // Noise scenes.
  std::vector<Waveform> scenes(cfg.noise_scenes);
  for (int i = 0; i < cfg.noise_scenes; ++i) {
    scenes[i].samples = render_scene(clip_len + kSampleRate, rng);
    char leaf[32];
    std::snprintf(leaf, sizeof(leaf), "scene_%02d.wav", i);
    write_wav(out_dir + "/noise/" + leaf, scenes[i]);
  }

  // Class-indicative visual centroids.
  std::vector<Vector> centroids(cfg.classes);
  if (cfg.visual_features) {
    for (int c = 0; c < cfg.classes; ++c) {
      centroids[c].resize(cfg.visual_dim);
      for (int d = 0; d < cfg.visual_dim; ++d) centroids[c][d] = rng.normal();
    }
  }

  Manifest manifest;
  for (int c = 0; c < cfg.classes; ++c) {
    manifest.vocabulary.push_back(templates[c].name);
  }
  std::sort(manifest.vocabulary.begin(), manifest.vocabulary.end());

  const auto make_clip = [&](const std::string& split, int index) {
    const int cls = index % cfg.classes;
    char id[32];
    std::snprintf(id, sizeof(id), "%s_%04d", split.c_str(), index);

    Waveform clean;
    clean.samples = render_tone(templates[cls], clip_len, rng);
    Waveform scene;
    const auto& src = scenes[rng.below(scenes.size())].samples;
    const std::size_t offset = rng.below(src.size());
    scene.samples.resize(clip_len);
    for (std::size_t i = 0; i < clip_len; ++i) {
      scene.samples[i] = src[(offset + i) % src.size()];
    }
    const double snr_db = rng.uniform(0.0, 20.0);
    const Waveform mixed = signal::mix_at_snr(clean, scene, snr_db);

    ManifestEntry e;
    e.id = id;
    e.split = split;
    e.labels = {templates[cls].name};
    e.audio_path = out_dir + "/audio/" + id + ".wav";
    e.clean_audio_path = out_dir + "/clean/" + id + ".wav";
    write_wav(e.audio_path, mixed);
    write_wav(e.clean_audio_path, clean);

    if (cfg.visual_features) {
      Matrix feats(cfg.visual_regions, cfg.visual_dim);
      for (int r = 0; r < cfg.visual_regions; ++r) {
        for (int d = 0; d < cfg.visual_dim; ++d) {
          feats(r, d) = centroids[cls][d] + 0.3 * rng.normal();
        }
      }
      e.visual_features_path = out_dir + "/features/" + id + ".feat";
      save_visual_features(e.visual_features_path, feats);
    }
    manifest.entries.push_back(std::move(e));
  };

  for (int i = 0; i < cfg.train_count; ++i) make_clip("train", i);
  for (int i = 0; i < cfg.test_count; ++i) make_clip("test", i);

  save_manifest(out_dir + "/manifest.tsv", manifest);
  return manifest;
}

}  // namespace wsail::data
