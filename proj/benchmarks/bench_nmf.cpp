#include <benchmark/benchmark.h>

#include "wsail/nmf.hpp"
#include "wsail/rng.hpp"
#include "wsail/types.hpp"

namespace {

wsail::MagnitudeSpectrogram random_spectrogram(Eigen::Index frames) {
  wsail::Rng rng(7);
  wsail::MagnitudeSpectrogram m;
  m.values.resize(257, frames);
  for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
      m.values(i, j) = rng.uniform_open_closed();
    }
  }
  return m;
}

void BM_NmfDecompose(benchmark::State& state) {
  const wsail::MagnitudeSpectrogram m =
      random_spectrogram(state.range(0));
  wsail::nmf::NmfConfig cfg;
  cfg.components = 20;
  cfg.iterations = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(wsail::nmf::nmf_decompose(m, cfg));
  }
}
BENCHMARK(BM_NmfDecompose)
    ->Args({100, 50})
    ->Args({500, 50})
    ->Args({998, 50})
    ->Unit(benchmark::kMillisecond);

void BM_ComponentTracks(benchmark::State& state) {
  const wsail::MagnitudeSpectrogram m = random_spectrogram(998);
  wsail::nmf::NmfConfig cfg;
  cfg.components = 20;
  cfg.iterations = 20;
  const wsail::nmf::NmfModel model = wsail::nmf::nmf_decompose(m, cfg);
  wsail::ComplexSpectrogram x;
  x.values = m.values.cast<std::complex<double>>();
  for (auto _ : state) {
    benchmark::DoNotOptimize(wsail::nmf::component_tracks(model, x));
  }
}
BENCHMARK(BM_ComponentTracks)->Unit(benchmark::kMillisecond);

}  // namespace
