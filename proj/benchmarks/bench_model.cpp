#include <benchmark/benchmark.h>

#include "wsail/model.hpp"
#include "wsail/rng.hpp"
#include "wsail/types.hpp"

namespace {

using namespace wsail;

model::Example random_example(int proposals, int classes) {
  Rng rng(11);
  model::Example ex;
  ex.id = "bench";
  ex.audio_patches.resize(proposals, model::kPatchInputDim);
  for (Eigen::Index i = 0; i < ex.audio_patches.rows(); ++i) {
    for (Eigen::Index j = 0; j < ex.audio_patches.cols(); ++j) {
      ex.audio_patches(i, j) = rng.uniform(-1.0, 1.0);
    }
    proposals::Origin o;
    o.kind = proposals::OriginKind::Tsp;
    o.segment = static_cast<int>(i);
    ex.audio_origins.push_back(o);
  }
  ex.label = Vector::Constant(classes, -1.0);
  ex.label[0] = 1.0;
  return ex;
}

void BM_ForwardVideo(benchmark::State& state) {
  model::ModelConfig cfg;
  cfg.classes = 5;
  const model::Params params = model::init_params(cfg);
  const model::Example ex = random_example(20, cfg.classes);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model::forward_video(ex, params));
  }
}
BENCHMARK(BM_ForwardVideo)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  model::ModelConfig cfg;
  cfg.classes = 5;
  const model::Params params = model::init_params(cfg);
  const model::Example ex = random_example(20, cfg.classes);
  model::Gradients grads;
  for (auto _ : state) {
    const model::ForwardCache cache = model::forward_video(ex, params);
    benchmark::DoNotOptimize(model::backward(ex, params, cache, grads));
  }
}
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMillisecond);

}  // namespace
