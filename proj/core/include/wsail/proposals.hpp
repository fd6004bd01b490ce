#pragma once

#include <string>
#include <vector>

#include "wsail/types.hpp"

namespace wsail::proposals {

constexpr int kPatchFrames = 96;  // 960 ms
constexpr int kTspStride = 48;    // 480 ms

enum class OriginKind { Tsp, Ncp, Visual };

/// Provenance of a proposal: which temporal window (and, for NCPs, which
/// NMF component; for visual features, which region) it came from.
struct Origin {
  OriginKind kind = OriginKind::Tsp;
  int component = -1;  // NCP only
  int segment = -1;    // TSP / NCP window index
  int region = -1;     // visual only

  bool operator==(const Origin&) const = default;
};

struct Patch {
  Matrix values;  // 96 x 64
  Origin origin;
};

struct ProposalBag {
  std::vector<Patch> patches;
  std::string video_id;

  std::size_t size() const { return patches.size(); }
};

/// Expected TSP window count for a log-mel of `n_frames` frames.
Eigen::Index tsp_count(Eigen::Index n_frames);

/// Overlapping 96-frame windows with stride 48; the final window is
/// tail-padded with the log-mel floor value log(0.01).
ProposalBag make_tsp(const LogMel& lm);

/// Per component: magnitude -> log-mel -> non-overlapping 96-frame
/// windows, incomplete tail dropped. Throws EmptyBag when the tracks are
/// too short to yield a single window.
ProposalBag make_ncp(const std::vector<ComplexSpectrogram>& tracks);

}  // namespace wsail::proposals
