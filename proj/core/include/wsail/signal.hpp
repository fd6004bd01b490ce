#pragma once

#include "wsail/types.hpp"

namespace wsail::signal {

/// 25 ms Hann window, 10 ms hop, 512-point FFT (frames zero-padded from
/// 400 samples). Inputs shorter than one window are zero-padded to 400.
ComplexSpectrogram stft(const Waveform& w);

/// Overlap-add with Hann synthesis window and window-sum-square
/// normalization. Interior samples of istft(stft(x)) reconstruct x.
/// Boundary samples whose accumulated window weight is below 1e-3 of the
/// peak are muted: a masked (inconsistent) spectrogram would otherwise be
/// divided by a near-zero weight there and blow up.
Waveform istft(const ComplexSpectrogram& s);

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& s);

/// 64 triangular mel filters, 125-7500 Hz, each normalized to unit weight
/// sum; output is log(mel_energy + 0.01).
LogMel log_mel(const MagnitudeSpectrogram& m);

/// Number of STFT frames for a waveform of `len` samples.
Eigen::Index frame_count(std::size_t len);

/// Center frequency (Hz) of mel band `b`, for locating tones in tests.
double mel_band_center_hz(int b);

/// clean + g * noise with g set so the clean-to-scaled-noise power ratio
/// is `snr_db`. Output is not re-normalized.
Waveform mix_at_snr(const Waveform& clean, const Waveform& noise,
                    double snr_db);

}  // namespace wsail::signal
