#include "wsail/proposals.hpp"

#include <cmath>

#include "wsail/signal.hpp"

namespace wsail::proposals {

Eigen::Index tsp_count(Eigen::Index n_frames) {
  if (n_frames <= kPatchFrames) return 1;
  return (n_frames - kPatchFrames + kTspStride - 1) / kTspStride + 1;
}

ProposalBag make_tsp(const LogMel& lm) {
  if (lm.frames() < 1) fail(ErrorCode::EmptyInput, "make_tsp: empty log-mel");
  const double pad = std::log(kLogMelFloorOffset);
  const Eigen::Index count = tsp_count(lm.frames());
  ProposalBag bag;
  bag.patches.reserve(count);
  for (Eigen::Index t = 0; t < count; ++t) {
    Patch p;
    p.origin = {OriginKind::Tsp, -1, static_cast<int>(t), -1};
    p.values.setConstant(kPatchFrames, kMelBands, pad);
    const Eigen::Index start = t * kTspStride;
    const Eigen::Index avail =
        std::min<Eigen::Index>(kPatchFrames, lm.frames() - start);
    p.values.topRows(avail) = lm.values.middleRows(start, avail);
    bag.patches.push_back(std::move(p));
  }
  return bag;
}

ProposalBag make_ncp(const std::vector<ComplexSpectrogram>& tracks) {
  if (tracks.empty()) fail(ErrorCode::EmptyTrackList, "make_ncp: no tracks");
  ProposalBag bag;
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    const LogMel lm = signal::log_mel(signal::magnitude(tracks[k]));
    const Eigen::Index windows = lm.frames() / kPatchFrames;
    for (Eigen::Index t = 0; t < windows; ++t) {
      Patch p;
      p.origin = {OriginKind::Ncp, static_cast<int>(k), static_cast<int>(t),
                  -1};
      p.values = lm.values.middleRows(t * kPatchFrames, kPatchFrames);
      bag.patches.push_back(std::move(p));
    }
  }
  if (bag.patches.empty()) {
    fail(ErrorCode::EmptyBag, "make_ncp: tracks shorter than one window");
  }
  return bag;
}

}  // namespace wsail::proposals
