#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsail/types.hpp"

namespace wsail::nmf {

constexpr double kEpsFloor = 1e-12;

struct NmfModel {
  Matrix W;  // bins x K, spectral patterns
  Matrix H;  // K x frames, activations

  Eigen::Index components() const { return W.cols(); }
};

struct NmfConfig {
  int components = 20;
  int iterations = 200;
  std::uint64_t seed = 0;
  double eps_floor = kEpsFloor;
};

/// Generalized KL divergence sum(q*log(q/v) - q + v), with 0*log(0) := 0.
double kl_divergence(const Matrix& q, const Matrix& approx);

/// Multiplicative-update KL NMF with uniform (0,1] seeded initialization.
/// The KL objective is non-increasing across iterations; W and H stay at
/// or above eps_floor.
NmfModel nmf_decompose(const MagnitudeSpectrogram& q, const NmfConfig& cfg);

/// As above; when `objective_trace` is non-null it receives the KL
/// objective before the first update and after every iteration.
NmfModel nmf_decompose(const MagnitudeSpectrogram& q, const NmfConfig& cfg,
                       std::vector<double>* objective_trace);

/// Wiener-filter split of the mixture into one complex track per
/// component: track_k = (W_k H_k / WH) .* x. Tracks sum back to x.
std::vector<ComplexSpectrogram> component_tracks(const NmfModel& m,
                                                 const ComplexSpectrogram& x);

/// Per-class dictionary: W shared across files, activations refit per
/// file, one multiplicative W step per file per pass (mini-batch = file).
Matrix train_class_dictionary(const std::vector<MagnitudeSpectrogram>& files,
                              int dict_size, const NmfConfig& cfg);

struct SeparationResult {
  Waveform source;
  Waveform noise;
};

/// Supervised-NMF baseline: activations fit against [dict | noise atoms]
/// with dictionary columns frozen, then a Wiener split between the two
/// parts.
SeparationResult supervised_nmf_separate(const ComplexSpectrogram& x,
                                         const Matrix& dict, int noise_k,
                                         const NmfConfig& cfg);

void save_dictionary(const std::string& path, const Matrix& dict);
Matrix load_dictionary(const std::string& path);

}  // namespace wsail::nmf
