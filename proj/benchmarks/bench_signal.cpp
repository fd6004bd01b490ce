#include <benchmark/benchmark.h>

#include "wsail/rng.hpp"
#include "wsail/signal.hpp"
#include "wsail/types.hpp"

namespace {

wsail::Waveform random_waveform(std::size_t samples) {
  wsail::Rng rng(42);
  wsail::Waveform w;
  w.samples.resize(samples);
  for (auto& s : w.samples) s = rng.uniform(-0.5, 0.5);
  return w;
}

void BM_Stft10s(benchmark::State& state) {
  const wsail::Waveform w = random_waveform(10 * wsail::kSampleRate);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wsail::signal::stft(w));
  }
}
BENCHMARK(BM_Stft10s);

void BM_IstftRoundtrip10s(benchmark::State& state) {
  const wsail::Waveform w = random_waveform(10 * wsail::kSampleRate);
  const wsail::ComplexSpectrogram s = wsail::signal::stft(w);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wsail::signal::istft(s));
  }
}
BENCHMARK(BM_IstftRoundtrip10s);

void BM_LogMel10s(benchmark::State& state) {
  const wsail::Waveform w = random_waveform(10 * wsail::kSampleRate);
  const wsail::MagnitudeSpectrogram m =
      wsail::signal::magnitude(wsail::signal::stft(w));
  for (auto _ : state) {
    benchmark::DoNotOptimize(wsail::signal::log_mel(m));
  }
}
BENCHMARK(BM_LogMel10s);

}  // namespace

BENCHMARK_MAIN();
