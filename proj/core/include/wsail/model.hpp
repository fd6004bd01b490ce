#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wsail/proposals.hpp"
#include "wsail/types.hpp"

namespace wsail::model {

constexpr int kEmbedDim = 128;
constexpr int kEmbedHidden = 256;
constexpr int kPatchInputDim = proposals::kPatchFrames * kMelBands;  // 6144

/// y = x W + b, rows are samples. Bias kept as a 1 x out matrix so every
/// trainable tensor has the same type.
struct LinearLayer {
  Matrix W;
  Matrix b;
};

/// flatten -> linear -> ReLU -> linear. Also used, with a different input
/// dimension, as the transform over precomputed visual region features.
struct EmbeddingNet {
  LinearLayer l1;
  LinearLayer l2;

  Eigen::Index input_dim() const { return l1.W.rows(); }
  Eigen::Index output_dim() const { return l2.W.cols(); }
};

/// Parallel classification / localization streams over a bag.
struct TwoStreamHead {
  LinearLayer cls;
  LinearLayer loc;

  Eigen::Index input_dim() const { return cls.W.rows(); }
  Eigen::Index classes() const { return cls.W.cols(); }
};

struct ModelConfig {
  int classes = 5;
  int visual_dim = 0;  // 0 disables the visual branch
  double learning_rate = 1e-5;
  int epochs = 10;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::string checkpoint_dir;  // empty: no checkpoints written
};

struct Params {
  int classes = 0;
  int visual_dim = 0;
  EmbeddingNet audio_net;
  TwoStreamHead audio_head;
  EmbeddingNet visual_net;    // unused when visual_dim == 0
  TwoStreamHead visual_head;  // unused when visual_dim == 0

  bool has_visual() const { return visual_dim > 0; }
  /// All trainable tensors, in a fixed order shared with Gradients.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::vector<std::string> tensor_names() const;
};

/// Glorot-uniform weights, zero biases, seeded.
Params init_params(const ModelConfig& cfg);

/// One training/evaluation video: flattened 96x64 audio patches (one row
/// per proposal), optional visual region features, and a {-1,+1} label
/// vector.
struct Example {
  std::string id;
  Matrix audio_patches;  // P x 6144; 0 rows when the bag is visual-only
  std::vector<proposals::Origin> audio_origins;
  Matrix visual_features;  // M x d_v; 0 rows when absent
  Vector label;            // classes, entries in {-1,+1}
};

Vector flatten_patch(const Matrix& patch);

Vector embed(const Matrix& patch, const EmbeddingNet& net);

/// Softmax over the proposal axis (per class column), max-stabilized.
Matrix softmax_over_proposals(const Matrix& b);

struct BagScore {
  Matrix A;        // P x C classification stream
  Matrix softmax;  // sigma(B), P x C
  Matrix E;        // A .* sigma(B)
  Vector s;        // per-class sum over proposals
};

BagScore score_bag(const Matrix& z, const TwoStreamHead& head);

Vector l2_normalize(const Vector& s);

struct VideoScore {
  Vector phi;
  Vector audio_score;   // pre-fusion s_a (empty if no audio proposals)
  Vector visual_score;  // pre-fusion s_v (empty if no visual branch)
};

VideoScore fuse(const std::optional<Vector>& s_v,
                const std::optional<Vector>& s_a);

double hinge_loss(const std::vector<Vector>& phis,
                  const std::vector<Vector>& labels);

/// Intermediates kept by the forward pass for backprop and for the
/// enhancement module (which reads the audio-stream E matrix).
struct ForwardCache {
  Matrix audio_h1;  // P x hidden, post-ReLU
  Matrix audio_z;   // P x 128 embeddings
  BagScore audio;
  Matrix visual_h1;
  Matrix visual_z;
  BagScore visual;
  VideoScore score;
};

ForwardCache forward_video(const Example& ex, const Params& params);

struct Gradients {
  std::vector<Matrix> tensors;  // same order as Params::tensors()
};

/// Hand-derived gradients of the single-video hinge loss through fusion,
/// l2 normalization, sum pooling, the softmax weighting and both linear
/// stacks. Returns the loss. Hinge subgradient at the kink is 0.
double backward(const Example& ex, const Params& params,
                const ForwardCache& cache, Gradients& grads);

struct TrainResult {
  Params params;
  std::vector<double> epoch_losses;  // mean per-video loss per epoch
};

/// Adam, batch size 1, fixed per-epoch shuffle from the seed. Writes a
/// checkpoint after every epoch when cfg.checkpoint_dir is set.
TrainResult train(const std::vector<Example>& dataset, const ModelConfig& cfg);

int predict(const Vector& phi);
int predict(const Example& ex, const Params& params);

struct Checkpoint {
  Params params;
  std::vector<Matrix> adam_m;
  std::vector<Matrix> adam_v;
  std::int64_t adam_step = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace wsail::model
