#include "wsail/model.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "wsail/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace wsail::model {
namespace {

void glorot_fill(Matrix& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / (w.rows() + w.cols()));
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      w(r, c) = rng.uniform(-limit, limit);
    }
  }
}

LinearLayer make_layer(Eigen::Index in, Eigen::Index out, Rng& rng) {
  LinearLayer l;
  l.W.resize(in, out);
  glorot_fill(l.W, rng);
  l.b = Matrix::Zero(1, out);
  return l;
}

Matrix forward_linear(const Matrix& x, const LinearLayer& l) {
  return (x * l.W).rowwise() + l.b.row(0);
}

// Post-ReLU hidden activations and embeddings for a bag.
void embed_bag(const Matrix& x, const EmbeddingNet& net, Matrix& h1,
               Matrix& z) {
  if (x.cols() != net.input_dim()) {
    fail(ErrorCode::ShapeMismatch,
         "embed: input dim " + std::to_string(x.cols()) + " != " +
             std::to_string(net.input_dim()));
  }
  h1 = forward_linear(x, net.l1).cwiseMax(0.0);
  z = forward_linear(h1, net.l2);
}

void check_label(const Vector& y) {
  for (Eigen::Index c = 0; c < y.size(); ++c) {
    if (y[c] != 1.0 && y[c] != -1.0) {
      fail(ErrorCode::DomainError, "label entries must be -1 or +1");
    }
  }
}

}  // namespace

std::vector<Matrix*> Params::tensors() {
  std::vector<Matrix*> t = {
      &audio_net.l1.W,  &audio_net.l1.b, &audio_net.l2.W, &audio_net.l2.b,
      &audio_head.cls.W, &audio_head.cls.b, &audio_head.loc.W,
      &audio_head.loc.b};
  if (has_visual()) {
    t.insert(t.end(),
             {&visual_net.l1.W, &visual_net.l1.b, &visual_net.l2.W,
              &visual_net.l2.b, &visual_head.cls.W, &visual_head.cls.b,
              &visual_head.loc.W, &visual_head.loc.b});
  }
  return t;
}

std::vector<const Matrix*> Params::tensors() const {
  auto mut = const_cast<Params*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> Params::tensor_names() const {
  std::vector<std::string> n = {"audio_net.l1.W",  "audio_net.l1.b",
                                "audio_net.l2.W",  "audio_net.l2.b",
                                "audio_head.cls.W", "audio_head.cls.b",
                                "audio_head.loc.W", "audio_head.loc.b"};
  if (has_visual()) {
    n.insert(n.end(), {"visual_net.l1.W", "visual_net.l1.b", "visual_net.l2.W",
                       "visual_net.l2.b", "visual_head.cls.W",
                       "visual_head.cls.b", "visual_head.loc.W",
                       "visual_head.loc.b"});
  }
  return n;
}

Params init_params(const ModelConfig& cfg) {
  if (cfg.classes < 2) fail(ErrorCode::DomainError, "need at least 2 classes");
  Rng rng(cfg.seed);
  Params p;
  p.classes = cfg.classes;
  p.visual_dim = cfg.visual_dim;
  p.audio_net.l1 = make_layer(kPatchInputDim, kEmbedHidden, rng);
  p.audio_net.l2 = make_layer(kEmbedHidden, kEmbedDim, rng);
  p.audio_head.cls = make_layer(kEmbedDim, cfg.classes, rng);
  p.audio_head.loc = make_layer(kEmbedDim, cfg.classes, rng);
  if (cfg.visual_dim > 0) {
    p.visual_net.l1 = make_layer(cfg.visual_dim, kEmbedHidden, rng);
    p.visual_net.l2 = make_layer(kEmbedHidden, kEmbedDim, rng);
    p.visual_head.cls = make_layer(kEmbedDim, cfg.classes, rng);
    p.visual_head.loc = make_layer(kEmbedDim, cfg.classes, rng);
  }
  return p;
}

Vector flatten_patch(const Matrix& patch) {
  if (patch.rows() != proposals::kPatchFrames || patch.cols() != kMelBands) {
    fail(ErrorCode::ShapeMismatch, "flatten_patch: patch must be 96x64");
  }
  Vector v(patch.size());
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < patch.rows(); ++r) {
    for (Eigen::Index c = 0; c < patch.cols(); ++c) {
      v[i++] = patch(r, c);
    }
  }
  return v;
}

Vector embed(const Matrix& patch, const EmbeddingNet& net) {
  Matrix h1, z;
  embed_bag(flatten_patch(patch).transpose(), net, h1, z);
  return z.row(0).transpose();
}

Matrix softmax_over_proposals(const Matrix& b) {
  if (b.rows() < 1) fail(ErrorCode::ShapeMismatch, "softmax: empty matrix");
  Matrix out(b.rows(), b.cols());
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    const Vector shifted = b.col(c).array() - b.col(c).maxCoeff();
    const Vector e = shifted.array().exp();
    out.col(c) = e / e.sum();
  }
  return out;
}

BagScore score_bag(const Matrix& z, const TwoStreamHead& head) {
  if (z.cols() != head.input_dim()) {
    fail(ErrorCode::ShapeMismatch, "score_bag: feature dim mismatch");
  }
  BagScore r;
  r.A = forward_linear(z, head.cls);
  r.softmax = softmax_over_proposals(forward_linear(z, head.loc));
  r.E = r.A.cwiseProduct(r.softmax);
  r.s = r.E.colwise().sum().transpose();
  return r;
}

Vector l2_normalize(const Vector& s) {
  const double norm = s.norm();
  if (norm <= 1e-12) return Vector::Zero(s.size());
  return s / norm;
}

VideoScore fuse(const std::optional<Vector>& s_v,
                const std::optional<Vector>& s_a) {
  if (!s_v && !s_a) fail(ErrorCode::EmptyInput, "fuse: no modality present");
  if (s_v && s_a && s_v->size() != s_a->size()) {
    fail(ErrorCode::LengthMismatch, "fuse: score length mismatch");
  }
  VideoScore out;
  const Eigen::Index c = s_a ? s_a->size() : s_v->size();
  out.phi = Vector::Zero(c);
  if (s_v) {
    out.visual_score = *s_v;
    out.phi += l2_normalize(*s_v);
  }
  if (s_a) {
    out.audio_score = *s_a;
    out.phi += l2_normalize(*s_a);
  }
  return out;
}

double hinge_loss(const std::vector<Vector>& phis,
                  const std::vector<Vector>& labels) {
  if (phis.empty()) fail(ErrorCode::EmptyBatch, "hinge_loss: empty batch");
  if (phis.size() != labels.size()) {
    fail(ErrorCode::LengthMismatch, "hinge_loss: batch size mismatch");
  }
  double total = 0.0;
  const Eigen::Index classes = phis.front().size();
  for (std::size_t n = 0; n < phis.size(); ++n) {
    if (phis[n].size() != classes || labels[n].size() != classes) {
      fail(ErrorCode::LengthMismatch, "hinge_loss: class count mismatch");
    }
    check_label(labels[n]);
    for (Eigen::Index c = 0; c < classes; ++c) {
      total += std::max(0.0, 1.0 - labels[n][c] * phis[n][c]);
    }
  }
  return total / (static_cast<double>(classes) * phis.size());
}

ForwardCache forward_video(const Example& ex, const Params& params) {
  ForwardCache cache;
  std::optional<Vector> s_a, s_v;
  if (ex.audio_patches.rows() > 0) {
    embed_bag(ex.audio_patches, params.audio_net, cache.audio_h1,
              cache.audio_z);
    cache.audio = score_bag(cache.audio_z, params.audio_head);
    s_a = cache.audio.s;
  }
  if (params.has_visual() && ex.visual_features.rows() > 0) {
    embed_bag(ex.visual_features, params.visual_net, cache.visual_h1,
              cache.visual_z);
    cache.visual = score_bag(cache.visual_z, params.visual_head);
    s_v = cache.visual.s;
  }
  cache.score = fuse(s_v, s_a);
  return cache;
}

namespace {

// Backprop from d(loss)/ds through one modality's head and embedding
// stack. Gradient tensors are accumulated at `base` in the shared order.
void backward_modality(const Matrix& x, const Matrix& h1, const Matrix& z,
                       const BagScore& bag, const EmbeddingNet& net,
                       const TwoStreamHead& head, const Vector& d_s,
                       std::vector<Matrix>& grads, std::size_t base) {
  const Eigen::Index p = z.rows();
  // s_c = sum_p E_pc, so dE is d_s broadcast over rows.
  const Matrix d_e = Vector::Ones(p) * d_s.transpose();
  const Matrix d_a = d_e.cwiseProduct(bag.softmax);
  const Matrix d_sigma = d_e.cwiseProduct(bag.A);
  Matrix d_b(p, d_s.size());
  for (Eigen::Index c = 0; c < d_s.size(); ++c) {
    const double dot = d_sigma.col(c).dot(bag.softmax.col(c));
    d_b.col(c) =
        bag.softmax.col(c).array() * (d_sigma.col(c).array() - dot);
  }
  grads[base + 4] += z.transpose() * d_a;
  grads[base + 5] += d_a.colwise().sum();
  grads[base + 6] += z.transpose() * d_b;
  grads[base + 7] += d_b.colwise().sum();

  const Matrix d_z = d_a * head.cls.W.transpose() + d_b * head.loc.W.transpose();
  grads[base + 2] += h1.transpose() * d_z;
  grads[base + 3] += d_z.colwise().sum();
  const Matrix d_h1 = d_z * net.l2.W.transpose();
  const Matrix d_pre1 =
      d_h1.cwiseProduct((h1.array() > 0.0).cast<double>().matrix());
  grads[base + 0] += x.transpose() * d_pre1;
  grads[base + 1] += d_pre1.colwise().sum();
}

}  // namespace

double backward(const Example& ex, const Params& params,
                const ForwardCache& cache, Gradients& grads) {
  check_label(ex.label);
  const Eigen::Index classes = ex.label.size();
  if (cache.score.phi.size() != classes) {
    fail(ErrorCode::LengthMismatch, "backward: label/score length mismatch");
  }
  const auto tensor_ptrs = params.tensors();
  grads.tensors.resize(tensor_ptrs.size());
  for (std::size_t i = 0; i < tensor_ptrs.size(); ++i) {
    grads.tensors[i] =
        Matrix::Zero(tensor_ptrs[i]->rows(), tensor_ptrs[i]->cols());
  }

  double loss = 0.0;
  Vector d_phi = Vector::Zero(classes);
  for (Eigen::Index c = 0; c < classes; ++c) {
    const double margin = 1.0 - ex.label[c] * cache.score.phi[c];
    if (margin > 0.0) {
      loss += margin;
      d_phi[c] = -ex.label[c] / static_cast<double>(classes);
    }
  }
  loss /= static_cast<double>(classes);

  // d/ds of s/||s||: (I - u u^T)/||s|| applied to the upstream gradient.
  const auto l2_backward = [](const Vector& s, const Vector& up) -> Vector {
    const double norm = s.norm();
    if (norm <= 1e-12) return Vector::Zero(s.size());
    const Vector u = s / norm;
    return (up - u * u.dot(up)) / norm;
  };

  if (cache.score.audio_score.size() > 0) {
    backward_modality(ex.audio_patches, cache.audio_h1, cache.audio_z,
                      cache.audio, params.audio_net, params.audio_head,
                      l2_backward(cache.score.audio_score, d_phi),
                      grads.tensors, 0);
  }
  if (cache.score.visual_score.size() > 0) {
    backward_modality(ex.visual_features, cache.visual_h1, cache.visual_z,
                      cache.visual, params.visual_net, params.visual_head,
                      l2_backward(cache.score.visual_score, d_phi),
                      grads.tensors, 8);
  }
  return loss;
}

TrainResult train(const std::vector<Example>& dataset, const ModelConfig& cfg) {
  if (dataset.empty()) fail(ErrorCode::EmptyDataset, "train: empty dataset");
  Params params = init_params(cfg);
  const auto tensor_ptrs = params.tensors();
  std::vector<Matrix> m(tensor_ptrs.size()), v(tensor_ptrs.size());
  for (std::size_t i = 0; i < tensor_ptrs.size(); ++i) {
    m[i] = Matrix::Zero(tensor_ptrs[i]->rows(), tensor_ptrs[i]->cols());
    v[i] = Matrix::Zero(tensor_ptrs[i]->rows(), tensor_ptrs[i]->cols());
  }
  std::int64_t step = 0;

  Rng shuffle_rng(cfg.seed ^ 0x73687566666c65ULL);  // decorrelated from init
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  Gradients grads;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t idx : order) {
      const Example& ex = dataset[idx];
      const ForwardCache cache = forward_video(ex, params);
      epoch_loss += backward(ex, params, cache, grads);
      ++step;
      const double bias1 = 1.0 - std::pow(cfg.adam_beta1, step);
      const double bias2 = 1.0 - std::pow(cfg.adam_beta2, step);
      for (std::size_t i = 0; i < tensor_ptrs.size(); ++i) {
        m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grads.tensors[i];
        v[i] = cfg.adam_beta2 * v[i] +
               (1.0 - cfg.adam_beta2) * grads.tensors[i].cwiseProduct(
                                            grads.tensors[i]);
        tensor_ptrs[i]->array() -=
            cfg.learning_rate * (m[i].array() / bias1) /
            ((v[i].array() / bias2).sqrt() + cfg.adam_epsilon);
      }
    }
    result.epoch_losses.push_back(epoch_loss / dataset.size());
    if (!cfg.checkpoint_dir.empty()) {
      Checkpoint ckpt{params, m, v, step};
      save_checkpoint(cfg.checkpoint_dir + "/epoch_" +
                          std::to_string(epoch + 1) + ".ckpt",
                      ckpt);
      save_checkpoint(cfg.checkpoint_dir + "/checkpoint.ckpt", ckpt);
    }
  }
  result.params = std::move(params);
  return result;
}

int predict(const Vector& phi) {
  int best = 0;
  for (Eigen::Index c = 1; c < phi.size(); ++c) {
    if (phi[c] > phi[best]) best = static_cast<int>(c);
  }
  return best;
}

int predict(const Example& ex, const Params& params) {
  return predict(forward_video(ex, params).score.phi);
}

namespace {

constexpr char kCkptMagic[] = "WSAIL-CKPT";  // 10 chars + NUL
constexpr std::uint32_t kCkptVersion = 1;

void write_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::ifstream& f, const std::string& path) {
  std::uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), 4);
  if (!f) fail(ErrorCode::TruncatedFile, "truncated checkpoint: " + path);
  return v;
}

void write_block(std::ofstream& f, const std::string& name, const Matrix& m) {
  write_u32(f, static_cast<std::uint32_t>(name.size()));
  f.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(f, static_cast<std::uint32_t>(m.rows()));
  write_u32(f, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      f.write(reinterpret_cast<const char*>(&v), 8);
    }
  }
}

Matrix read_block(std::ifstream& f, const std::string& path,
                  std::string& name) {
  const std::uint32_t name_len = read_u32(f, path);
  name.resize(name_len);
  f.read(name.data(), name_len);
  const std::uint32_t rows = read_u32(f, path);
  const std::uint32_t cols = read_u32(f, path);
  Matrix m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      double v;
      f.read(reinterpret_cast<char*>(&v), 8);
      if (!f) fail(ErrorCode::TruncatedFile, "truncated checkpoint: " + path);
      m(r, c) = v;
    }
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open for writing: " + path);
  f.write(kCkptMagic, 11);
  write_u32(f, kCkptVersion);
  write_u32(f, static_cast<std::uint32_t>(ckpt.params.classes));
  write_u32(f, static_cast<std::uint32_t>(kEmbedDim));
  write_u32(f, static_cast<std::uint32_t>(ckpt.params.visual_dim));
  const auto names = ckpt.params.tensor_names();
  const auto tensors = ckpt.params.tensors();
  write_u32(f, static_cast<std::uint32_t>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    write_block(f, names[i], *tensors[i]);
  }
  const bool has_moments = ckpt.adam_m.size() == names.size() &&
                           ckpt.adam_v.size() == names.size();
  write_u32(f, has_moments ? 1u : 0u);
  if (has_moments) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      write_block(f, "adam.m." + names[i], ckpt.adam_m[i]);
      write_block(f, "adam.v." + names[i], ckpt.adam_v[i]);
    }
    const std::uint64_t step = static_cast<std::uint64_t>(ckpt.adam_step);
    f.write(reinterpret_cast<const char*>(&step), 8);
  }
  if (!f) fail(ErrorCode::IoError, "write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::MissingCheckpoint, "cannot open checkpoint: " + path);
  char magic[11];
  f.read(magic, 11);
  if (!f || std::string(magic, 11) != std::string(kCkptMagic, 11)) {
    fail(ErrorCode::CorruptHeader, "bad checkpoint magic: " + path);
  }
  if (read_u32(f, path) != kCkptVersion) {
    fail(ErrorCode::CorruptHeader, "unsupported checkpoint version: " + path);
  }
  Checkpoint ckpt;
  ckpt.params.classes = static_cast<int>(read_u32(f, path));
  read_u32(f, path);  // embed dim, fixed by the architecture
  ckpt.params.visual_dim = static_cast<int>(read_u32(f, path));
  const std::uint32_t n_blocks = read_u32(f, path);

  // Size the parameter tensors, then overwrite them from the file.
  ModelConfig shape_cfg;
  shape_cfg.classes = ckpt.params.classes;
  shape_cfg.visual_dim = ckpt.params.visual_dim;
  Params sized = init_params(shape_cfg);
  ckpt.params = std::move(sized);
  const auto names = ckpt.params.tensor_names();
  const auto tensors = ckpt.params.tensors();
  if (n_blocks != names.size()) {
    fail(ErrorCode::CorruptHeader, "unexpected block count: " + path);
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::string name;
    Matrix m = read_block(f, path, name);
    if (name != names[i] || m.rows() != tensors[i]->rows() ||
        m.cols() != tensors[i]->cols()) {
      fail(ErrorCode::CorruptHeader, "unexpected block " + name + ": " + path);
    }
    *tensors[i] = std::move(m);
  }
  if (read_u32(f, path) == 1u) {
    ckpt.adam_m.resize(names.size());
    ckpt.adam_v.resize(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
      std::string name;
      ckpt.adam_m[i] = read_block(f, path, name);
      ckpt.adam_v[i] = read_block(f, path, name);
    }
    std::uint64_t step = 0;
    f.read(reinterpret_cast<char*>(&step), 8);
    if (!f) fail(ErrorCode::TruncatedFile, "truncated checkpoint: " + path);
    ckpt.adam_step = static_cast<std::int64_t>(step);
  }
  return ckpt;
}

}  // namespace wsail::model
