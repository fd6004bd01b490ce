#include "wsail/eval.hpp"

#include <algorithm>
#include <cmath>

#include "wsail/model.hpp"
#include "wsail/rng.hpp"
#include "wsail/signal.hpp"

namespace wsail::eval {

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& truths) {
  if (predictions.empty()) fail(ErrorCode::EmptyInput, "accuracy: empty input");
  if (predictions.size() != truths.size()) {
    fail(ErrorCode::LengthMismatch, "accuracy: length mismatch");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == truths[i]) ++correct;
  }
  return static_cast<double>(correct) / predictions.size();
}

EvalReport make_report(const std::vector<int>& predictions,
                       const std::vector<int>& truths, int classes) {
  EvalReport r;
  r.accuracy = accuracy(predictions, truths);
  r.confusion = Eigen::MatrixXi::Zero(classes, classes);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (truths[i] < 0 || truths[i] >= classes || predictions[i] < 0 ||
        predictions[i] >= classes) {
      fail(ErrorCode::DomainError, "make_report: class index out of range");
    }
    r.confusion(truths[i], predictions[i]) += 1;
  }
  r.per_class_accuracy = Vector::Zero(classes);
  for (int c = 0; c < classes; ++c) {
    const int total = r.confusion.row(c).sum();
    if (total > 0) {
      r.per_class_accuracy[c] =
          static_cast<double>(r.confusion(c, c)) / total;
    }
  }
  return r;
}

double sdr(const Waveform& estimate, const Waveform& reference) {
  if (estimate.size() != reference.size()) {
    fail(ErrorCode::LengthMismatch, "sdr: length mismatch");
  }
  double ref_energy = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    ref_energy += reference.samples[i] * reference.samples[i];
    dot += estimate.samples[i] * reference.samples[i];
  }
  if (ref_energy <= 0.0) fail(ErrorCode::ZeroReference, "sdr: zero reference");

  const double scale = dot / ref_energy;
  double target_energy = 0.0, residual_energy = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double target = scale * reference.samples[i];
    const double residual = estimate.samples[i] - target;
    target_energy += target * target;
    residual_energy += residual * residual;
  }
  if (residual_energy < 1e-20 * target_energy) return 100.0;
  return 10.0 * std::log10(target_energy / residual_energy);
}

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::EmptyInput, "median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

NoisyEvalResult evaluate_noisy(
    const std::vector<Waveform>& test_audio, const std::vector<int>& truths,
    const std::vector<Waveform>& noise_corpus,
    const std::vector<double>& snr_levels, std::uint64_t seed,
    const std::function<int(const Waveform&)>& classify) {
  if (test_audio.empty()) fail(ErrorCode::EmptyInput, "evaluate_noisy: no files");
  if (test_audio.size() != truths.size()) {
    fail(ErrorCode::LengthMismatch, "evaluate_noisy: truth length mismatch");
  }
  const bool needs_noise =
      std::any_of(snr_levels.begin(), snr_levels.end(),
                  [](double s) { return std::isfinite(s); });
  if (needs_noise && noise_corpus.empty()) {
    fail(ErrorCode::EmptyNoiseCorpus, "evaluate_noisy: no noise files");
  }
  NoisyEvalResult out;
  out.snr_levels = snr_levels;
  Rng rng(seed);
  for (double level : snr_levels) {
    std::vector<int> preds;
    preds.reserve(test_audio.size());
    for (const auto& wav : test_audio) {
      if (std::isfinite(level)) {
        const auto& noise = noise_corpus[rng.below(noise_corpus.size())];
        preds.push_back(classify(signal::mix_at_snr(wav, noise, level)));
      } else {
        preds.push_back(classify(wav));
      }
    }
    out.accuracies.push_back(accuracy(preds, truths));
  }
  return out;
}

int ensemble_scores(const Vector& phi_a, const Vector& phi_b) {
  if (phi_a.size() != phi_b.size()) {
    fail(ErrorCode::LengthMismatch, "ensemble_scores: length mismatch");
  }
  return model::predict(phi_a + phi_b);
}

}  // namespace wsail::eval
