#include <doctest.h>

#include <cmath>

#include "wsail/nmf.hpp"
#include "wsail/proposals.hpp"
#include "wsail/rng.hpp"
#include "wsail/signal.hpp"

using namespace wsail;

namespace {

LogMel random_logmel(Eigen::Index frames, std::uint64_t seed) {
  Rng rng(seed);
  LogMel lm;
  lm.values.resize(frames, kMelBands);
  for (auto& v : lm.values.reshaped()) v = rng.uniform(-4.0, 2.0);
  return lm;
}

Waveform random_waveform(std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.samples.resize(len);
  for (auto& s : w.samples) s = rng.uniform(-0.8, 0.8);
  return w;
}

}  // namespace

TEST_CASE("a 10 s clip yields 20 TSPs") {
  // 160000 samples -> 998 log-mel frames -> 20 windows of 96 at stride 48.
  CHECK(signal::frame_count(160000) == 998);
  const auto bag = proposals::make_tsp(random_logmel(998, 1));
  CHECK(bag.size() == 20);
  for (std::size_t i = 0; i < bag.size(); ++i) {
    CHECK(bag.patches[i].origin.kind == proposals::OriginKind::Tsp);
    CHECK(bag.patches[i].origin.segment == static_cast<int>(i));
    CHECK(bag.patches[i].values.rows() == 96);
    CHECK(bag.patches[i].values.cols() == 64);
  }
}

TEST_CASE("TSP window counts and tail padding") {
  CHECK(proposals::make_tsp(random_logmel(96, 2)).size() == 1);
  CHECK(proposals::make_tsp(random_logmel(1, 3)).size() == 1);

  const auto lm = random_logmel(97, 4);
  const auto bag = proposals::make_tsp(lm);
  REQUIRE(bag.size() == 2);
  // Second window holds frames 48..96 and 47 floor-valued pad frames.
  const double pad = std::log(0.01);
  const auto& second = bag.patches[1].values;
  CHECK(second.topRows(49) == lm.values.bottomRows(49));
  CHECK(second.bottomRows(47).minCoeff() == pad);
  CHECK(second.bottomRows(47).maxCoeff() == pad);

  for (Eigen::Index frames : {1, 50, 96, 97, 144, 145, 998, 1500}) {
    const Eigen::Index expect =
        frames <= 96
            ? 1
            : static_cast<Eigen::Index>(
                  std::ceil((frames - 96) / 48.0)) + 1;
    CHECK(proposals::make_tsp(random_logmel(frames, frames)).size() ==
          static_cast<std::size_t>(expect));
  }
}

TEST_CASE("NCP geometry: K=20 on 10 s yields 200 proposals") {
  // Synthetic tracks with the real spectrogram geometry.
  const auto x = signal::stft(random_waveform(160000, 5));
  nmf::NmfModel m;
  Rng rng(6);
  m.W.resize(x.bins(), 20);
  m.H.resize(20, x.frames());
  for (auto& v : m.W.reshaped()) v = rng.uniform_open_closed();
  for (auto& v : m.H.reshaped()) v = rng.uniform_open_closed();
  const auto bag = proposals::make_ncp(nmf::component_tracks(m, x));
  CHECK(bag.size() == 200);  // 20 components x floor(998/96)
  // Origins are unique and reconstruct (k, t).
  for (std::size_t i = 0; i < bag.size(); ++i) {
    const auto& o = bag.patches[i].origin;
    CHECK(o.kind == proposals::OriginKind::Ncp);
    CHECK(o.component == static_cast<int>(i / 10));
    CHECK(o.segment == static_cast<int>(i % 10));
  }
}

TEST_CASE("tracks shorter than one window raise EmptyBag") {
  // 95 frames of log-mel needs > 95*160+240 samples; use 95 frames directly.
  const auto x = signal::stft(random_waveform(400 + 94 * 160, 7));
  REQUIRE(x.frames() == 95);
  nmf::NmfModel m;
  m.W = Matrix::Constant(x.bins(), 1, 0.5);
  m.H = Matrix::Constant(1, x.frames(), 0.5);
  CHECK_THROWS_AS(proposals::make_ncp(nmf::component_tracks(m, x)), Error);
  CHECK_THROWS_AS(proposals::make_ncp({}), Error);
}

TEST_CASE("a silent track produces floor-valued patches") {
  ComplexSpectrogram t;
  t.values = ComplexMatrix::Zero(257, 100);
  const auto bag = proposals::make_ncp({t});
  REQUIRE(bag.size() == 1);
  CHECK(bag.patches[0].values.minCoeff() == doctest::Approx(std::log(0.01)));
  CHECK(bag.patches[0].values.maxCoeff() == doctest::Approx(std::log(0.01)));
}

TEST_CASE("K=1 NCPs match TSPs at even offsets") {
  const auto x = signal::stft(random_waveform(64000, 8));
  nmf::NmfModel m;
  m.W = Matrix::Constant(x.bins(), 1, 1.0);
  m.H = Matrix::Constant(1, x.frames(), 1.0);
  const auto ncp = proposals::make_ncp(nmf::component_tracks(m, x));
  const auto tsp =
      proposals::make_tsp(signal::log_mel(signal::magnitude(x)));
  // The single track equals the mixture, so NCP window t is TSP window 2t.
  for (std::size_t t = 0; t < ncp.size(); ++t) {
    REQUIRE(2 * t < tsp.size());
    CHECK((ncp.patches[t].values - tsp.patches[2 * t].values)
              .cwiseAbs()
              .maxCoeff() < 1e-9);
  }
}
