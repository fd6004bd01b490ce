#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wsail/types.hpp"

namespace wsail::eval {

struct SdrStats {
  double mean = 0.0;
  double median = 0.0;
  std::vector<double> per_mixture;
};

struct EvalReport {
  double accuracy = 0.0;
  Vector per_class_accuracy;
  Eigen::MatrixXi confusion;  // truth rows, prediction columns
  std::optional<SdrStats> sdr;
};

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& truths);

EvalReport make_report(const std::vector<int>& predictions,
                       const std::vector<int>& truths, int classes);

/// Scale-invariant single-source SDR: the estimate is projected onto the
/// reference, and the energy ratio of projection to residual is reported
/// in dB, capped at +100 for numerically perfect reconstruction.
double sdr(const Waveform& estimate, const Waveform& reference);

double median(std::vector<double> values);

struct NoisyEvalResult {
  std::vector<double> snr_levels;  // +inf means uncorrupted
  std::vector<double> accuracies;
};

/// Mixes every test file with a seeded choice of noise file at each SNR
/// level and classifies the result. An infinite SNR level skips mixing.
NoisyEvalResult evaluate_noisy(
    const std::vector<Waveform>& test_audio, const std::vector<int>& truths,
    const std::vector<Waveform>& noise_corpus,
    const std::vector<double>& snr_levels, std::uint64_t seed,
    const std::function<int(const Waveform&)>& classify);

/// Test-time score addition of two systems; lowest-index tie break.
int ensemble_scores(const Vector& phi_a, const Vector& phi_b);

}  // namespace wsail::eval
