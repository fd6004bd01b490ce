#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace wsail {

using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

/// Failure classes shared across the library. Each maps to one of the
/// documented error conditions of the operation that throws it.
enum class ErrorCode {
  EmptyInput,
  WrongSampleRate,
  InconsistentGeometry,
  WrongBinCount,
  ZeroPowerClean,
  ZeroPowerNoise,
  AllZeroInput,
  DomainError,
  ShapeMismatch,
  EmptyTrainingSet,
  EmptyTrackList,
  EmptyBag,
  LengthMismatch,
  EmptyBatch,
  EmptyDataset,
  EmptyNoiseCorpus,
  ZeroReference,
  NoNcpRows,
  UnsupportedFormat,
  CorruptHeader,
  DuplicateId,
  UnknownLabel,
  MissingFile,
  TruncatedFile,
  DimMismatch,
  IoError,
  MissingCheckpoint,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

constexpr int kSampleRate = 16000;

/// Mono 16 kHz audio. Samples are nominally in [-1, 1]; intermediate
/// processing (e.g. SNR mixing) may exceed that range, the WAV writer
/// rescales on output.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
};

struct SpectrogramGeometry {
  int window_len = 400;  // 25 ms at 16 kHz
  int hop = 160;         // 10 ms
  int fft_size = 512;

  int bins() const { return fft_size / 2 + 1; }
  bool operator==(const SpectrogramGeometry&) const = default;
};

struct ComplexSpectrogram {
  ComplexMatrix values;  // bins x frames
  SpectrogramGeometry geometry;

  Eigen::Index bins() const { return values.rows(); }
  Eigen::Index frames() const { return values.cols(); }
};

struct MagnitudeSpectrogram {
  Matrix values;  // bins x frames, entries >= 0
  SpectrogramGeometry geometry;

  Eigen::Index bins() const { return values.rows(); }
  Eigen::Index frames() const { return values.cols(); }
};

constexpr int kMelBands = 64;
constexpr double kLogMelFloorOffset = 0.01;

struct LogMel {
  Matrix values;  // frames x 64
  double frame_hop_seconds = 0.010;

  Eigen::Index frames() const { return values.rows(); }
};

}  // namespace wsail
