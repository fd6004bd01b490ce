#pragma once

#include <optional>
#include <vector>

#include "wsail/model.hpp"
#include "wsail/nmf.hpp"
#include "wsail/proposals.hpp"
#include "wsail/types.hpp"

namespace wsail::enhance {

/// Per-component relevance for one target class: raw per-window scores,
/// their max over time, and the min-max scaled weights in [0,1].
struct ComponentScores {
  Matrix beta;         // K x T, per-window score for the target class
  Vector alpha;        // K, max over windows
  Vector alpha_prime;  // K, min-max scaled; all 1 when alpha is constant
};

/// Reads the audio-stream weighted score matrix E at column `target_class`
/// for every NCP row. TSP rows in a mixed bag are skipped.
ComponentScores aggregate_scores(const Matrix& e_audio, int target_class,
                                 const std::vector<proposals::Origin>& origins);

struct EnhancementResult {
  Waveform source;
  Waveform noise;
  ComplexSpectrogram source_spec;
  ComplexSpectrogram noise_spec;
  ComponentScores scores;
  std::optional<double> tau;
  int selected_class = -1;
};

/// Soft-mask reconstruction S = (sum_k a'_k W_k H_k / WH) .* X and its
/// complement N; with tau set, a'_k is replaced by 1[a'_k >= tau].
// S + N == X in both modes.
EnhancementResult reconstruct(const nmf::NmfModel& m,
                              const ComplexSpectrogram& x,
                              const ComponentScores& scores,
                              std::optional<double> tau);

enum class LabelMode { Known, Unknown };

struct PipelineConfig {
  nmf::NmfConfig nmf;
  LabelMode mode = LabelMode::Unknown;
  int known_class = -1;  // required for LabelMode::Known
  std::optional<double> tau;
  bool include_tsp = false;  // also feed TSPs into the scoring bag
};

/// Full chain: stft -> NMF -> component tracks -> NCP bag -> scoring ->
/// relevance aggregation -> Wiener reconstruction.
EnhancementResult enhance_pipeline(const Waveform& mixture,
                                   const model::Params& params,
                                   const PipelineConfig& cfg);

}  // namespace wsail::enhance
