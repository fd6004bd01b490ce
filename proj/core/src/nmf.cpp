#include "wsail/nmf.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "wsail/rng.hpp"
#include "wsail/signal.hpp"

static_assert(std::endian::native == std::endian::little,
              "dictionary file format is little-endian");

namespace wsail::nmf {
namespace {

void fill_uniform(Matrix& m, Rng& rng, double floor) {
  // Column-major traversal, matching Eigen storage.
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, c) = std::max(rng.uniform_open_closed(), floor);
    }
  }
}

// One multiplicative KL step on H with W fixed.
void update_h(const Matrix& q, const Matrix& w, Matrix& h, double floor) {
  const Matrix v = (w * h).cwiseMax(floor);
  const Matrix ratio = q.cwiseQuotient(v);
  const Vector w_colsum = w.colwise().sum();
  h = (h.array() * (w.transpose() * ratio).array()).matrix();
  h.array().colwise() /= w_colsum.array();
  h = h.cwiseMax(floor);
}

// One multiplicative KL step on W with H fixed. `frozen` leading columns
// are left untouched (supervised dictionary part).
void update_w(const Matrix& q, Matrix& w, const Matrix& h, double floor,
              Eigen::Index frozen = 0) {
  const Matrix v = (w * h).cwiseMax(floor);
  const Matrix ratio = q.cwiseQuotient(v);
  const Vector h_rowsum = h.rowwise().sum();
  Matrix next = (w.array() * (ratio * h.transpose()).array()).matrix();
  next.array().rowwise() /= h_rowsum.transpose().array();
  next = next.cwiseMax(floor);
  if (frozen > 0) next.leftCols(frozen) = w.leftCols(frozen);
  w = next;
}

}  // namespace

double kl_divergence(const Matrix& q, const Matrix& approx) {
  if (q.rows() != approx.rows() || q.cols() != approx.cols()) {
    fail(ErrorCode::ShapeMismatch, "kl_divergence: shape mismatch");
  }
  double total = 0.0;
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      const double qi = q(r, c);
      const double vi = approx(r, c);
      if (qi > 0.0) {
        if (vi <= 0.0) {
          fail(ErrorCode::DomainError,
               "kl_divergence: approx is zero where q > 0");
        }
        total += qi * std::log(qi / vi) - qi + vi;
      } else {
        total += vi;
      }
    }
  }
  return total;
}

NmfModel nmf_decompose(const MagnitudeSpectrogram& q, const NmfConfig& cfg,
                       std::vector<double>* objective_trace);

NmfModel nmf_decompose(const MagnitudeSpectrogram& q, const NmfConfig& cfg) {
  return nmf_decompose(q, cfg, nullptr);
}

NmfModel nmf_decompose(const MagnitudeSpectrogram& q, const NmfConfig& cfg,
                       std::vector<double>* objective_trace) {
  if (q.values.size() == 0 || q.values.maxCoeff() <= 0.0) {
    fail(ErrorCode::AllZeroInput, "nmf_decompose: input has no energy");
  }
  Rng rng(cfg.seed);
  NmfModel m;
  m.W.resize(q.bins(), cfg.components);
  m.H.resize(cfg.components, q.frames());
  fill_uniform(m.W, rng, cfg.eps_floor);
  fill_uniform(m.H, rng, cfg.eps_floor);

  if (objective_trace) {
    objective_trace->clear();
    objective_trace->push_back(kl_divergence(q.values, m.W * m.H));
  }
  for (int it = 0; it < cfg.iterations; ++it) {
    update_h(q.values, m.W, m.H, cfg.eps_floor);
    update_w(q.values, m.W, m.H, cfg.eps_floor);
    if (objective_trace) {
      objective_trace->push_back(kl_divergence(q.values, m.W * m.H));
    }
  }
  return m;
}

std::vector<ComplexSpectrogram> component_tracks(const NmfModel& m,
                                                 const ComplexSpectrogram& x) {
  if (m.W.rows() != x.bins() || m.H.cols() != x.frames() ||
      m.W.cols() != m.H.rows()) {
    fail(ErrorCode::ShapeMismatch, "component_tracks: model/mixture mismatch");
  }
  const Matrix denom = (m.W * m.H).cwiseMax(kEpsFloor);
  std::vector<ComplexSpectrogram> tracks;
  tracks.reserve(m.components());
  for (Eigen::Index k = 0; k < m.components(); ++k) {
    const Matrix mask =
        (m.W.col(k) * m.H.row(k)).cwiseQuotient(denom);
    ComplexSpectrogram t;
    t.geometry = x.geometry;
    t.values = mask.cast<std::complex<double>>().cwiseProduct(x.values);
    tracks.push_back(std::move(t));
  }
  return tracks;
}

Matrix train_class_dictionary(const std::vector<MagnitudeSpectrogram>& files,
                              int dict_size, const NmfConfig& cfg) {
  if (files.empty()) {
    fail(ErrorCode::EmptyTrainingSet, "train_class_dictionary: no files");
  }
  Rng rng(cfg.seed);
  Matrix w(files.front().bins(), dict_size);
  fill_uniform(w, rng, cfg.eps_floor);
  std::vector<Matrix> h(files.size());
  for (std::size_t f = 0; f < files.size(); ++f) {
    if (files[f].bins() != w.rows()) {
      fail(ErrorCode::ShapeMismatch, "train_class_dictionary: bin mismatch");
    }
    h[f].resize(dict_size, files[f].frames());
    fill_uniform(h[f], rng, cfg.eps_floor);
  }
  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t f = 0; f < files.size(); ++f) {
      update_h(files[f].values, w, h[f], cfg.eps_floor);
      update_w(files[f].values, w, h[f], cfg.eps_floor);
    }
  }
  return w;
}

SeparationResult supervised_nmf_separate(const ComplexSpectrogram& x,
                                         const Matrix& dict, int noise_k,
                                         const NmfConfig& cfg) {
  if (dict.rows() != x.bins()) {
    fail(ErrorCode::ShapeMismatch, "supervised_nmf_separate: bin mismatch");
  }
  const MagnitudeSpectrogram q = signal::magnitude(x);
  const Eigen::Index d = dict.cols();
  Rng rng(cfg.seed);
  Matrix w(x.bins(), d + noise_k);
  w.leftCols(d) = dict;
  if (noise_k > 0) {
    Matrix wn(x.bins(), noise_k);
    fill_uniform(wn, rng, cfg.eps_floor);
    w.rightCols(noise_k) = wn;
  }
  Matrix h(d + noise_k, x.frames());
  fill_uniform(h, rng, cfg.eps_floor);

  for (int it = 0; it < cfg.iterations; ++it) {
    update_h(q.values, w, h, cfg.eps_floor);
    if (noise_k > 0) update_w(q.values, w, h, cfg.eps_floor, d);
  }

  const Matrix v_source = w.leftCols(d) * h.topRows(d);
  Matrix v_total = v_source;
  if (noise_k > 0) v_total += w.rightCols(noise_k) * h.bottomRows(noise_k);
  const Matrix mask = v_source.cwiseQuotient(v_total.cwiseMax(cfg.eps_floor));

  ComplexSpectrogram s, n;
  s.geometry = n.geometry = x.geometry;
  s.values = mask.cast<std::complex<double>>().cwiseProduct(x.values);
  n.values = x.values - s.values;
  return {signal::istft(s), signal::istft(n)};
}

void save_dictionary(const std::string& path, const Matrix& dict) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open for writing: " + path);
  f.write("WSAIL-DICT\0", 11);
  const std::uint32_t rows = static_cast<std::uint32_t>(dict.rows());
  const std::uint32_t cols = static_cast<std::uint32_t>(dict.cols());
  f.write(reinterpret_cast<const char*>(&rows), 4);
  f.write(reinterpret_cast<const char*>(&cols), 4);
  for (Eigen::Index r = 0; r < dict.rows(); ++r) {
    for (Eigen::Index c = 0; c < dict.cols(); ++c) {
      const double v = dict(r, c);
      f.write(reinterpret_cast<const char*>(&v), 8);
    }
  }
  if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

Matrix load_dictionary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::MissingFile, "cannot open: " + path);
  char magic[11];
  f.read(magic, 11);
  if (!f || std::string(magic, 11) != std::string("WSAIL-DICT\0", 11)) {
    fail(ErrorCode::CorruptHeader, "bad dictionary magic: " + path);
  }
  std::uint32_t rows = 0, cols = 0;
  f.read(reinterpret_cast<char*>(&rows), 4);
  f.read(reinterpret_cast<char*>(&cols), 4);
  if (!f || rows == 0 || cols == 0) {
    fail(ErrorCode::CorruptHeader, "bad dictionary dims: " + path);
  }
  Matrix dict(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      double v;
      f.read(reinterpret_cast<char*>(&v), 8);
      if (!f) fail(ErrorCode::TruncatedFile, "truncated dictionary: " + path);
      dict(r, c) = v;
    }
  }
  return dict;
}

}  // namespace wsail::nmf
