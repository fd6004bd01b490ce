#include "wsail/signal.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace wsail::signal {
namespace {

constexpr SpectrogramGeometry kGeometry{};

// Periodic Hann, 400 points.
const std::vector<double>& hann_window() {
  static const std::vector<double> w = [] {
    std::vector<double> v(kGeometry.window_len);
    for (int n = 0; n < kGeometry.window_len; ++n) {
      v[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n /
                                  kGeometry.window_len);
    }
    return v;
  }();
  return w;
}

// Shared FFTW plans. Creation is not thread-safe, execution on caller
// buffers (new-array interface, FFTW_UNALIGNED) is.
struct FftPlans {
  fftw_plan forward;
  fftw_plan inverse;

  FftPlans() {
    std::vector<double> re(kGeometry.fft_size, 0.0);
    std::vector<fftw_complex> cp(kGeometry.fft_size / 2 + 1);
    forward = fftw_plan_dft_r2c_1d(kGeometry.fft_size, re.data(), cp.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse = fftw_plan_dft_c2r_1d(kGeometry.fft_size, cp.data(), re.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
};

const FftPlans& plans() {
  static std::once_flag flag;
  static FftPlans* p = nullptr;
  std::call_once(flag, [] { p = new FftPlans(); });
  return *p;
}

void check_geometry(const ComplexSpectrogram& s) {
  if (s.geometry != kGeometry || s.bins() != kGeometry.bins() ||
      s.frames() < 1) {
    fail(ErrorCode::InconsistentGeometry,
         "spectrogram geometry does not match the 25ms/10ms/512 layout");
  }
}

}  // namespace

Eigen::Index frame_count(std::size_t len) {
  if (len < static_cast<std::size_t>(kGeometry.window_len)) return 1;
  return 1 + static_cast<Eigen::Index>((len - kGeometry.window_len) /
                                       kGeometry.hop);
}

ComplexSpectrogram stft(const Waveform& w) {
  if (w.samples.empty()) fail(ErrorCode::EmptyInput, "stft: empty waveform");
  if (w.sample_rate != kSampleRate) {
    fail(ErrorCode::WrongSampleRate,
         "stft: expected 16 kHz input, got " + std::to_string(w.sample_rate));
  }
  const auto& win = hann_window();
  const Eigen::Index n_frames = frame_count(w.size());
  ComplexSpectrogram out;
  out.geometry = kGeometry;
  out.values.resize(kGeometry.bins(), n_frames);

  std::vector<double> frame(kGeometry.fft_size, 0.0);
  std::vector<fftw_complex> spec(kGeometry.bins());
  for (Eigen::Index t = 0; t < n_frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * kGeometry.hop;
    for (int n = 0; n < kGeometry.window_len; ++n) {
      const std::size_t idx = start + n;
      frame[n] = idx < w.size() ? win[n] * w.samples[idx] : 0.0;
    }
    fftw_execute_dft_r2c(plans().forward, frame.data(), spec.data());
    for (int f = 0; f < kGeometry.bins(); ++f) {
      out.values(f, t) = std::complex<double>(spec[f][0], spec[f][1]);
    }
  }
  return out;
}

Waveform istft(const ComplexSpectrogram& s) {
  check_geometry(s);
  const auto& win = hann_window();
  const Eigen::Index n_frames = s.frames();
  const std::size_t len =
      kGeometry.window_len +
      static_cast<std::size_t>(n_frames - 1) * kGeometry.hop;

  std::vector<double> acc(len, 0.0);
  std::vector<double> win_sq(len, 0.0);
  std::vector<double> frame(kGeometry.fft_size, 0.0);
  std::vector<fftw_complex> spec(kGeometry.bins());
  for (Eigen::Index t = 0; t < n_frames; ++t) {
    for (int f = 0; f < kGeometry.bins(); ++f) {
      spec[f][0] = s.values(f, t).real();
      spec[f][1] = s.values(f, t).imag();
    }
    fftw_execute_dft_c2r(plans().inverse, spec.data(), frame.data());
    const std::size_t start = static_cast<std::size_t>(t) * kGeometry.hop;
    for (int n = 0; n < kGeometry.window_len; ++n) {
      // c2r output is unnormalized; frame[n] holds fft_size * win * x.
      acc[start + n] += win[n] * frame[n] / kGeometry.fft_size;
      win_sq[start + n] += win[n] * win[n];
    }
  }
  // Near the signal edges the overlap-add window-sum approaches zero; for
  // spectrograms that were modified (masked) and are no longer consistent,
  // dividing by it would blow up the boundary samples, so mute them instead.
  double peak = 0.0;
  for (double w : win_sq) peak = std::max(peak, w);
  const double floor = 1e-3 * peak;
  Waveform out;
  out.samples.resize(len);
  for (std::size_t n = 0; n < len; ++n) {
    out.samples[n] = win_sq[n] < floor ? 0.0 : acc[n] / win_sq[n];
  }
  return out;
}

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& s) {
  MagnitudeSpectrogram m;
  m.geometry = s.geometry;
  m.values = s.values.cwiseAbs();
  return m;
}

namespace {

constexpr double kMelLowHz = 125.0;
constexpr double kMelHighHz = 7500.0;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// 64 x 257 filterbank, each row normalized to unit weight sum.
const Matrix& mel_filterbank() {
  static const Matrix fb = [] {
    Matrix m = Matrix::Zero(kMelBands, kGeometry.bins());
    const double mel_lo = hz_to_mel(kMelLowHz);
    const double mel_hi = hz_to_mel(kMelHighHz);
    std::vector<double> edges(kMelBands + 2);
    for (int i = 0; i < kMelBands + 2; ++i) {
      edges[i] =
          mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (kMelBands + 1));
    }
    const double bin_hz = static_cast<double>(kSampleRate) / kGeometry.fft_size;
    for (int b = 0; b < kMelBands; ++b) {
      const double lo = edges[b], center = edges[b + 1], hi = edges[b + 2];
      double sum = 0.0;
      for (int i = 0; i < kGeometry.bins(); ++i) {
        const double f = i * bin_hz;
        double wgt = 0.0;
        if (f > lo && f < hi) {
          wgt = f <= center ? (f - lo) / (center - lo) : (hi - f) / (hi - center);
        }
        m(b, i) = wgt;
        sum += wgt;
      }
      if (sum > 0.0) m.row(b) /= sum;
    }
    return m;
  }();
  return fb;
}

}  // namespace

double mel_band_center_hz(int b) {
  const double mel_lo = hz_to_mel(kMelLowHz);
  const double mel_hi = hz_to_mel(kMelHighHz);
  return mel_to_hz(mel_lo + (mel_hi - mel_lo) * (b + 1) / (kMelBands + 1));
}

LogMel log_mel(const MagnitudeSpectrogram& m) {
  if (m.bins() != kGeometry.bins()) {
    fail(ErrorCode::WrongBinCount,
         "log_mel: expected 257 frequency bins, got " +
             std::to_string(m.bins()));
  }
  LogMel out;
  // frames x bands
  out.values = ((mel_filterbank() * m.values).array() + kLogMelFloorOffset)
                   .log()
                   .matrix()
                   .transpose();
  return out;
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise,
                    double snr_db) {
  if (clean.samples.empty()) fail(ErrorCode::EmptyInput, "mix_at_snr: empty clean");
  if (noise.samples.empty()) fail(ErrorCode::ZeroPowerNoise, "mix_at_snr: empty noise");

  // Loop or truncate the noise to the clean length.
  std::vector<double> n(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    n[i] = noise.samples[i % noise.size()];
  }

  double p_clean = 0.0, p_noise = 0.0;
  for (double s : clean.samples) p_clean += s * s;
  for (double s : n) p_noise += s * s;
  p_clean /= clean.size();
  p_noise /= n.size();
  if (p_clean <= 0.0) fail(ErrorCode::ZeroPowerClean, "mix_at_snr: clean has zero power");
  if (p_noise <= 0.0) fail(ErrorCode::ZeroPowerNoise, "mix_at_snr: noise has zero power");

  const double g = std::sqrt(p_clean / p_noise * std::pow(10.0, -snr_db / 10.0));
  Waveform out;
  out.sample_rate = clean.sample_rate;
  out.samples.resize(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    out.samples[i] = clean.samples[i] + g * n[i];
  }
  return out;
}

}  // namespace wsail::signal
