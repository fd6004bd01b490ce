#include "wsail/enhance.hpp"

#include <algorithm>

#include "wsail/signal.hpp"

namespace wsail::enhance {

ComponentScores aggregate_scores(
    const Matrix& e_audio, int target_class,
    const std::vector<proposals::Origin>& origins) {
  if (static_cast<std::size_t>(e_audio.rows()) != origins.size()) {
    fail(ErrorCode::ShapeMismatch, "aggregate_scores: rows/origins mismatch");
  }
  if (target_class < 0 || target_class >= e_audio.cols()) {
    fail(ErrorCode::DomainError, "aggregate_scores: class index out of range");
  }
  int max_k = -1, max_t = -1;
  for (const auto& o : origins) {
    if (o.kind == proposals::OriginKind::Ncp) {
      max_k = std::max(max_k, o.component);
      max_t = std::max(max_t, o.segment);
    }
  }
  if (max_k < 0) {
    fail(ErrorCode::NoNcpRows, "aggregate_scores: bag has no NCP rows");
  }
  ComponentScores out;
  out.beta = Matrix::Zero(max_k + 1, max_t + 1);
  for (std::size_t r = 0; r < origins.size(); ++r) {
    if (origins[r].kind == proposals::OriginKind::Ncp) {
      out.beta(origins[r].component, origins[r].segment) =
          e_audio(static_cast<Eigen::Index>(r), target_class);
    }
  }
  out.alpha = out.beta.rowwise().maxCoeff();
  const double lo = out.alpha.minCoeff();
  const double hi = out.alpha.maxCoeff();
  if (hi - lo <= 0.0) {
    // No ranking information; keep the full signal.
    out.alpha_prime = Vector::Ones(out.alpha.size());
  } else {
    out.alpha_prime = (out.alpha.array() - lo) / (hi - lo);
  }
  return out;
}

EnhancementResult reconstruct(const nmf::NmfModel& m,
                              const ComplexSpectrogram& x,
                              const ComponentScores& scores,
                              std::optional<double> tau) {
  if (m.W.rows() != x.bins() || m.H.cols() != x.frames() ||
      scores.alpha_prime.size() != m.components()) {
    fail(ErrorCode::ShapeMismatch, "reconstruct: shape mismatch");
  }
  if (tau && (*tau < 0.0 || *tau > 1.0)) {
    fail(ErrorCode::DomainError, "reconstruct: tau must be in [0,1]");
  }
  Vector weights = scores.alpha_prime;
  if (tau) {
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
      weights[k] = weights[k] >= *tau ? 1.0 : 0.0;
    }
  }
  Matrix weighted = Matrix::Zero(x.bins(), x.frames());
  for (Eigen::Index k = 0; k < m.components(); ++k) {
    weighted.noalias() += weights[k] * (m.W.col(k) * m.H.row(k));
  }
  const Matrix denom = (m.W * m.H).cwiseMax(nmf::kEpsFloor);
  const Matrix mask = weighted.cwiseQuotient(denom);

  EnhancementResult out;
  out.scores = scores;
  out.tau = tau;
  out.source_spec.geometry = out.noise_spec.geometry = x.geometry;
  out.source_spec.values =
      mask.cast<std::complex<double>>().cwiseProduct(x.values);
  out.noise_spec.values = x.values - out.source_spec.values;
  out.source = signal::istft(out.source_spec);
  out.noise = signal::istft(out.noise_spec);
  return out;
}

EnhancementResult enhance_pipeline(const Waveform& mixture,
                                   const model::Params& params,
                                   const PipelineConfig& cfg) {
  const ComplexSpectrogram x = signal::stft(mixture);
  const nmf::NmfModel nmf_model =
      nmf::nmf_decompose(signal::magnitude(x), cfg.nmf);
  const auto tracks = nmf::component_tracks(nmf_model, x);
  proposals::ProposalBag bag = proposals::make_ncp(tracks);
  if (cfg.include_tsp) {
    auto tsp = proposals::make_tsp(signal::log_mel(signal::magnitude(x)));
    for (auto& p : tsp.patches) bag.patches.push_back(std::move(p));
  }

  model::Example ex;
  ex.audio_patches.resize(bag.size(), model::kPatchInputDim);
  for (std::size_t i = 0; i < bag.size(); ++i) {
    ex.audio_patches.row(i) =
        model::flatten_patch(bag.patches[i].values).transpose();
    ex.audio_origins.push_back(bag.patches[i].origin);
  }
  const model::ForwardCache cache = model::forward_video(ex, params);

  int target = cfg.known_class;
  if (cfg.mode == LabelMode::Unknown) {
    target = model::predict(cache.score.phi);
  } else if (target < 0 || target >= params.classes) {
    fail(ErrorCode::DomainError, "enhance_pipeline: bad known class index");
  }

  EnhancementResult out = reconstruct(
      nmf_model, x,
      aggregate_scores(cache.audio.E, target, ex.audio_origins), cfg.tau);
  out.selected_class = target;
  return out;
}

}  // namespace wsail::enhance
