#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "wsail/data.hpp"
#include "wsail/model.hpp"
#include "wsail/types.hpp"

namespace wsail::cli {

/// Stable per-file seed so NMF proposal extraction is independent of the
/// model seed and of corpus ordering.
std::uint64_t file_seed(std::uint64_t base, const std::string& id);

/// {-1,+1} label vector for an entry against the manifest vocabulary.
Vector label_vector(const data::ManifestEntry& entry, const data::Manifest& m);

/// Index of the entry's first label in the vocabulary (single-label use).
int truth_index(const data::ManifestEntry& entry, const data::Manifest& m);

/// Waveform -> proposal bag(s) -> flattened Example. `visual_dim` zero
/// leaves the visual block empty even when features exist on disk.
model::Example example_from_waveform(const Waveform& w, const std::string& id,
                                     const Vector& label,
                                     const RunConfig& cfg);

model::Example build_example(const data::ManifestEntry& entry,
                             const data::Manifest& m, const RunConfig& cfg,
                             int visual_dim);

/// Builds examples for one split, fanned out over cfg.jobs threads.
/// Order matches the manifest order of that split.
std::vector<model::Example> build_examples(const data::Manifest& m,
                                           const std::string& split,
                                           const RunConfig& cfg,
                                           int visual_dim);

bool log_enabled();
void log_line(const std::string& msg);

}  // namespace wsail::cli
