#include "kinebeat/inversion.h"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include <json.hpp>

#include "kinebeat/error.h"

namespace kinebeat::inversion {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInitRange = 0.1;

MatrixXd uniform_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-kInitRange, kInitRange);
  MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  // column-major fill order is part of the reproducibility contract
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  }
  return m;
}

MatrixXd normal_matrix(std::size_t rows, std::size_t cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng) * scale;
  }
  return m;
}

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

VectorXd tanh_vec(const VectorXd& x) { return x.array().tanh().matrix(); }

// Row-wise softmax with max subtraction.
MatrixXd softmax_rows(const MatrixXd& s) {
  const VectorXd mx = s.rowwise().maxCoeff();
  MatrixXd out = (s.colwise() - mx).array().exp().matrix();
  const VectorXd sums = out.rowwise().sum();
  out.array().colwise() /= sums.array();
  return out;
}

VectorXd softmax(const VectorXd& z) {
  const double mx = z.maxCoeff();
  VectorXd e = (z.array() - mx).exp().matrix();
  return e / e.sum();
}

double log_sum_exp(const VectorXd& z) {
  const double mx = z.maxCoeff();
  return mx + std::log((z.array() - mx).exp().sum());
}

struct MlpCache {
  VectorXd hidden;
};

struct AttnCache {
  MatrixXd x, q, k, v, a;
  VectorXd pool;
};

struct RhythmForward {
  VectorXd out;
  VectorXd input;
  MlpCache mlp;
  AttnCache attn;
};

RhythmForward rhythm_forward_cached(const EncoderParams& p, const VectorXd& r_raw) {
  RhythmForward f;
  if (p.variant == ProjectorVariant::kMlp) {
    f.input = fit_rhythm_input(r_raw, static_cast<std::size_t>(p.w1.cols()));
    f.mlp.hidden = tanh_vec(p.w1 * f.input + p.b1.col(0));
    f.out = p.w2 * f.mlp.hidden + p.b2.col(0);
    return f;
  }
  f.input = fit_rhythm_input(r_raw, static_cast<std::size_t>(p.pos.rows()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.wq.rows()));
  AttnCache& c = f.attn;
  c.x = f.input * p.frame_embed.col(0).transpose() + p.pos;  // T x d'
  c.q = c.x * p.wq.transpose();
  c.k = c.x * p.wk.transpose();
  c.v = c.x * p.wv.transpose();
  c.a = softmax_rows((c.q * c.k.transpose()) * scale);
  const MatrixXd o = c.a * c.v;
  c.pool = o.colwise().mean().transpose();
  f.out = p.wo * c.pool + p.bo.col(0);
  return f;
}

// Accumulates into grad the gradient of the rhythm output given d(out).
void rhythm_backward(const EncoderParams& p, const RhythmForward& f, const VectorXd& d_out,
                     EncoderParams& grad) {
  if (p.variant == ProjectorVariant::kMlp) {
    grad.w2 += d_out * f.mlp.hidden.transpose();
    grad.b2.col(0) += d_out;
    const VectorXd d_hidden = p.w2.transpose() * d_out;
    const VectorXd d_pre = d_hidden.array() * (1.0 - f.mlp.hidden.array().square());
    grad.w1 += d_pre * f.input.transpose();
    grad.b1.col(0) += d_pre;
    return;
  }
  const AttnCache& c = f.attn;
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.wq.rows()));
  const auto frames = static_cast<double>(c.x.rows());

  grad.wo += d_out * c.pool.transpose();
  grad.bo.col(0) += d_out;
  const VectorXd d_pool = p.wo.transpose() * d_out;
  // Mean-pooling hands every row of O the same gradient u = d_pool / T, so
  // dA = 1 w^T with w = V u and dV = colsum(A) u^T.
  const VectorXd u = d_pool / frames;
  const VectorXd w = c.v * u;
  const MatrixXd d_v = c.a.colwise().sum().transpose() * u.transpose();
  const VectorXd row_dot = c.a * w;
  const MatrixXd d_s = (c.a.array() * ((-row_dot).replicate(1, c.a.cols()).rowwise() + w.transpose()).array())
                           .matrix() *
                       scale;
  const MatrixXd d_q = d_s * c.k;
  const MatrixXd d_k = d_s.transpose() * c.q;

  grad.wq += d_q.transpose() * c.x;
  grad.wk += d_k.transpose() * c.x;
  grad.wv += d_v.transpose() * c.x;
  const MatrixXd d_x = d_q * p.wq + d_k * p.wk + d_v * p.wv;
  grad.pos += d_x;
  grad.frame_embed.col(0) += d_x.transpose() * f.input;
}

void check_one_hot(const VectorXd& g, std::size_t genres) {
  if (static_cast<std::size_t>(g.size()) != genres) {
    throw InputError("genre vector has length " + std::to_string(g.size()) + ", expected " +
                     std::to_string(genres));
  }
  int ones = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g(i) == 1.0) {
      ++ones;
    } else if (g(i) != 0.0) {
      ones = -1;
      break;
    }
  }
  if (ones != 1) throw InputError("genre input is not one-hot");
}

// d(loss)/d(pooled condition) and the loss for one sample.
double loss_and_condition_grad(const FrozenBackbone& bb, const VectorXd& cond, const Target& target,
                               VectorXd* d_cond) {
  if (bb.mode == LossMode::kRegression) {
    if (target.values.size() != bb.generator.rows()) {
      throw InputError("regression target has wrong length");
    }
    const VectorXd resid = bb.generator * cond - target.values;
    const auto m = static_cast<double>(resid.size());
    if (d_cond) *d_cond = bb.generator.transpose() * (resid * (2.0 / m));
    return resid.squaredNorm() / m;
  }
  if (target.tokens.empty()) throw InputError("categorical target needs at least one token");
  const VectorXd logits = bb.generator * cond;
  const double lse = log_sum_exp(logits);
  double loss = 0.0;
  VectorXd d_logits = softmax(logits);
  const auto n = static_cast<double>(target.tokens.size());
  for (std::size_t tok : target.tokens) {
    if (tok >= static_cast<std::size_t>(logits.size())) {
      throw InputError("categorical target token out of range");
    }
    loss += lse - logits(idx(tok));
    d_logits(idx(tok)) -= 1.0 / n;
  }
  if (d_cond) *d_cond = bb.generator.transpose() * d_logits;
  return loss / n;
}

void put_le64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

nlohmann::json matrix_json(const MatrixXd& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw InputError("checkpoint block has inconsistent size");
  }
  return Eigen::Map<const MatrixXd>(data.data(), rows, cols);
}

}  // namespace

std::string to_string(ProjectorVariant v) { return v == ProjectorVariant::kMlp ? "mlp" : "attnpos"; }
std::string to_string(LossMode m) { return m == LossMode::kRegression ? "regression" : "categorical"; }

ProjectorVariant parse_variant(std::string_view s) {
  if (s == "mlp") return ProjectorVariant::kMlp;
  if (s == "attnpos") return ProjectorVariant::kAttnPos;
  throw InputError("unknown projector variant '" + std::string(s) + "'");
}

LossMode parse_mode(std::string_view s) {
  if (s == "regression") return LossMode::kRegression;
  if (s == "categorical") return LossMode::kCategorical;
  throw InputError("unknown loss mode '" + std::string(s) + "'");
}

PromptTemplate default_prompt() {
  PromptTemplate t;
  t.vocabulary = {"a", "@", "music", "with", "*", "as", "the", "rhythm"};
  t.tokens = {0, 1, 2, 3, 4, 5, 6, 7};
  t.genre_slot = 1;
  t.rhythm_slot = 4;
  return t;
}

FrozenBackbone make_backbone(const Dims& dims, LossMode mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FrozenBackbone bb;
  bb.prompt = default_prompt();
  bb.mode = mode;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dims.embed));
  bb.table = normal_matrix(bb.prompt.vocabulary.size(), dims.embed, scale, rng);
  const std::size_t out = mode == LossMode::kRegression ? dims.gen_out : dims.audio_vocab;
  bb.generator = normal_matrix(out, dims.embed, scale, rng);
  return bb;
}

EncoderParams init_params(const Dims& dims, ProjectorVariant variant, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EncoderParams p;
  p.variant = variant;
  if (variant == ProjectorVariant::kMlp) {
    p.w1 = uniform_matrix(dims.hidden, dims.frames, rng);
    p.b1 = uniform_matrix(dims.hidden, 1, rng);
    p.w2 = uniform_matrix(dims.embed, dims.hidden, rng);
    p.b2 = uniform_matrix(dims.embed, 1, rng);
  } else {
    p.frame_embed = uniform_matrix(dims.attn, 1, rng);
    p.pos = uniform_matrix(dims.frames, dims.attn, rng);
    p.wq = uniform_matrix(dims.attn, dims.attn, rng);
    p.wk = uniform_matrix(dims.attn, dims.attn, rng);
    p.wv = uniform_matrix(dims.attn, dims.attn, rng);
    p.wo = uniform_matrix(dims.embed, dims.attn, rng);
    p.bo = uniform_matrix(dims.embed, 1, rng);
  }
  p.genre_w = uniform_matrix(dims.embed, dims.genres, rng);
  p.genre_b = uniform_matrix(dims.embed, 1, rng);
  return p;
}

EncoderParams zeros_like(const EncoderParams& p) {
  EncoderParams z = p;
  for_each_block(z, [](const std::string&, MatrixXd& m) { m.setZero(); });
  return z;
}

void for_each_block(EncoderParams& p, const std::function<void(const std::string&, MatrixXd&)>& fn) {
  if (p.variant == ProjectorVariant::kMlp) {
    fn("rhythm.w1", p.w1);
    fn("rhythm.b1", p.b1);
    fn("rhythm.w2", p.w2);
    fn("rhythm.b2", p.b2);
  } else {
    fn("rhythm.frame_embed", p.frame_embed);
    fn("rhythm.pos", p.pos);
    fn("rhythm.wq", p.wq);
    fn("rhythm.wk", p.wk);
    fn("rhythm.wv", p.wv);
    fn("rhythm.wo", p.wo);
    fn("rhythm.bo", p.bo);
  }
  fn("genre.w", p.genre_w);
  fn("genre.b", p.genre_b);
}

void for_each_block(const EncoderParams& p,
                    const std::function<void(const std::string&, const MatrixXd&)>& fn) {
  for_each_block(const_cast<EncoderParams&>(p),
                 [&](const std::string& name, MatrixXd& m) { fn(name, m); });
}

MatrixXd assemble_prompt_embeddings(const PromptTemplate& prompt, const MatrixXd& table,
                                    const VectorXd& v_genre, const VectorXd& v_rhythm) {
  const auto len = prompt.tokens.size();
  if (prompt.genre_slot >= len || prompt.rhythm_slot >= len || prompt.genre_slot == prompt.rhythm_slot) {
    throw InputError("prompt slots are invalid");
  }
  if (v_genre.size() != table.cols() || v_rhythm.size() != table.cols()) {
    throw InputError("pseudo-word embedding does not match the table dimension");
  }
  MatrixXd rows(idx(len), table.cols());
  for (std::size_t i = 0; i < len; ++i) {
    if (prompt.tokens[i] >= static_cast<std::size_t>(table.rows())) {
      throw InputError("prompt token outside the embedding table");
    }
    rows.row(idx(i)) = table.row(idx(prompt.tokens[i]));
  }
  rows.row(idx(prompt.genre_slot)) = v_genre.transpose();
  rows.row(idx(prompt.rhythm_slot)) = v_rhythm.transpose();
  return rows;
}

VectorXd fit_rhythm_input(const VectorXd& r, std::size_t frames) {
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!(r(i) >= 0.0 && r(i) <= 1.0)) throw InputError("rhythm input values must lie in [0,1]");
  }
  VectorXd out = VectorXd::Zero(idx(frames));
  const Eigen::Index n = std::min<Eigen::Index>(r.size(), idx(frames));
  out.head(n) = r.head(n);
  return out;
}

VectorXd rhythm_encoder_forward(const EncoderParams& p, const VectorXd& r) {
  return rhythm_forward_cached(p, r).out;
}

VectorXd genre_encoder_forward(const EncoderParams& p, const VectorXd& g) {
  check_one_hot(g, static_cast<std::size_t>(p.genre_w.cols()));
  return tanh_vec(p.genre_w * g + p.genre_b.col(0));
}

double reconstruction_loss(const FrozenBackbone& backbone, const MatrixXd& embeddings, const Target& target) {
  if (embeddings.cols() != backbone.generator.cols()) {
    throw InputError("embedding width does not match the generator");
  }
  const VectorXd cond = embeddings.colwise().mean().transpose();
  return loss_and_condition_grad(backbone, cond, target, nullptr);
}

double batch_loss(const FrozenBackbone& backbone, const EncoderParams& p, const std::vector<Sample>& batch) {
  if (batch.empty()) throw InputError("empty batch");
  double total = 0.0;
  for (const auto& s : batch) {
    const MatrixXd rows = assemble_prompt_embeddings(
        backbone.prompt, backbone.table, genre_encoder_forward(p, s.genre), rhythm_encoder_forward(p, s.rhythm));
    total += reconstruction_loss(backbone, rows, s.target);
  }
  return total / static_cast<double>(batch.size());
}

LossAndGrad encoder_gradients(const FrozenBackbone& backbone, const EncoderParams& p,
                              const std::vector<Sample>& batch) {
  if (batch.empty()) throw InputError("empty batch");
  LossAndGrad out{0.0, zeros_like(p)};
  const auto n = static_cast<double>(batch.size());
  const auto prompt_len = static_cast<double>(backbone.prompt.tokens.size());

  for (const auto& s : batch) {
    const RhythmForward rf = rhythm_forward_cached(p, s.rhythm);
    const VectorXd v_genre = genre_encoder_forward(p, s.genre);
    const MatrixXd rows = assemble_prompt_embeddings(backbone.prompt, backbone.table, v_genre, rf.out);
    const VectorXd cond = rows.colwise().mean().transpose();
    VectorXd d_cond;
    out.loss += loss_and_condition_grad(backbone, cond, s.target, &d_cond);

    // each slot contributes 1/L of the pooled condition; 1/n from the batch mean
    const VectorXd d_slot = d_cond / (prompt_len * n);
    rhythm_backward(p, rf, d_slot, out.grad);
    const VectorXd d_pre = d_slot.array() * (1.0 - v_genre.array().square());
    out.grad.genre_w += d_pre * s.genre.transpose();
    out.grad.genre_b.col(0) += d_pre;
  }
  out.loss /= n;
  return out;
}

TrainingResult train(const TrainingConfig& config, const FrozenBackbone& backbone,
                     const std::vector<Sample>& dataset) {
  if (dataset.empty()) throw InputError("training dataset is empty");
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw InputError("learning rate must be a finite nonnegative number");
  }
  TrainingResult result;
  result.initial = init_params(config.dims, config.variant, config.seed);
  result.params = result.initial;
  result.loss_history.reserve(config.epochs + 1);

  for (std::size_t epoch = 0; epoch <= config.epochs; ++epoch) {
    const bool last = epoch == config.epochs;
    double loss;
    if (last) {
      loss = batch_loss(backbone, result.params, dataset);
    } else {
      LossAndGrad lg = encoder_gradients(backbone, result.params, dataset);
      loss = lg.loss;
      if (std::isfinite(loss)) {
        // walk parameter and gradient blocks in the same order
        std::vector<MatrixXd*> grads;
        for_each_block(lg.grad, [&](const std::string&, MatrixXd& g) { grads.push_back(&g); });
        std::size_t i = 0;
        for_each_block(result.params,
                       [&](const std::string&, MatrixXd& w) { w -= config.learning_rate * *grads[i++]; });
      }
    }
    if (!std::isfinite(loss)) {
      throw ComputeError("training diverged at epoch " + std::to_string(epoch));
    }
    result.loss_history.push_back(loss);
  }
  return result;
}

std::vector<Sample> make_teacher_student_dataset(const FrozenBackbone& backbone, const Dims& dims,
                                                 ProjectorVariant variant, std::size_t samples,
                                                 std::uint64_t teacher_seed) {
  const EncoderParams teacher = init_params(dims, variant, teacher_seed);
  std::mt19937_64 rng(teacher_seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_int_distribution<std::size_t> first_beat(2, 30);
  std::uniform_int_distribution<std::size_t> gap(20, 45);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Sample> data;
  data.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    Sample s;
    s.rhythm = VectorXd::Zero(idx(dims.frames));
    for (std::size_t t = first_beat(rng); t < dims.frames; t += gap(rng)) s.rhythm(idx(t)) = 1.0;
    s.genre = VectorXd::Zero(idx(dims.genres));
    s.genre(idx(i % dims.genres)) = 1.0;

    const MatrixXd rows = assemble_prompt_embeddings(backbone.prompt, backbone.table,
                                                     genre_encoder_forward(teacher, s.genre),
                                                     rhythm_encoder_forward(teacher, s.rhythm));
    const VectorXd cond = rows.colwise().mean().transpose();
    if (backbone.mode == LossMode::kRegression) {
      s.target.values = backbone.generator * cond;
    } else {
      // four tokens drawn from the teacher's distribution by inverse CDF
      const VectorXd probs = softmax(backbone.generator * cond);
      for (int k = 0; k < 4; ++k) {
        double u = unit(rng);
        std::size_t tok = 0;
        while (tok + 1 < static_cast<std::size_t>(probs.size()) && u >= probs(idx(tok))) {
          u -= probs(idx(tok));
          ++tok;
        }
        s.target.tokens.push_back(tok);
      }
    }
    data.push_back(std::move(s));
  }
  return data;
}

GradCheckReport compare_with_finite_differences(const FrozenBackbone& backbone, const EncoderParams& p,
                                                const std::vector<Sample>& batch, double step) {
  const LossAndGrad analytic = encoder_gradients(backbone, p, batch);
  std::vector<const MatrixXd*> grads;
  for_each_block(analytic.grad, [&](const std::string&, const MatrixXd& g) { grads.push_back(&g); });

  EncoderParams probe = p;
  GradCheckReport report;
  std::size_t block = 0;
  for_each_block(probe, [&](const std::string& name, MatrixXd& w) {
    BlockError err{name, 0.0, 0.0, static_cast<std::size_t>(w.size())};
    const MatrixXd& g = *grads[block++];
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double saved = w.data()[i];
      w.data()[i] = saved + step;
      const double plus = batch_loss(backbone, probe, batch);
      w.data()[i] = saved - step;
      const double minus = batch_loss(backbone, probe, batch);
      w.data()[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double a = g.data()[i];
      const double abs_err = std::abs(a - numeric);
      const double rel_err = abs_err / std::max({std::abs(a), std::abs(numeric), kRelativeErrorFloor});
      err.max_abs_error = std::max(err.max_abs_error, abs_err);
      err.max_rel_error = std::max(err.max_rel_error, rel_err);
    }
    report.max_rel_error = std::max(report.max_rel_error, err.max_rel_error);
    report.blocks.push_back(std::move(err));
  });
  return report;
}

GradCheckReport gradcheck(const Dims& dims, ProjectorVariant variant, LossMode mode, std::uint64_t seed) {
  const FrozenBackbone backbone = make_backbone(dims, mode, seed + 1);
  const auto batch = make_teacher_student_dataset(backbone, dims, variant, 3, seed + 2);
  const EncoderParams params = init_params(dims, variant, seed);
  return compare_with_finite_differences(backbone, params, batch);
}

std::string block_digest(const MatrixXd& m) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(16 + static_cast<std::size_t>(m.size()) * 8);
  put_le64(bytes, static_cast<std::uint64_t>(m.rows()));
  put_le64(bytes, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint64_t raw;
    const double v = m.data()[i];
    std::memcpy(&raw, &v, sizeof raw);
    put_le64(bytes, raw);
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw ComputeError("SHA-256 digest failed");
  }
  std::ostringstream hex;
  hex << std::hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.width(2);
    hex.fill('0');
    hex << static_cast<int>(md[i]);
  }
  return hex.str();
}

std::string checkpoint_json(const TrainingConfig& config, const FrozenBackbone& backbone,
                            const EncoderParams& params, double final_loss) {
  const Dims& d = config.dims;
  nlohmann::json blocks = nlohmann::json::object();
  for_each_block(params, [&](const std::string& name, const MatrixXd& m) { blocks[name] = matrix_json(m); });
  nlohmann::json doc = {
      {"format", "kinebeat-toy-checkpoint"},
      {"version", 1},
      {"config",
       {{"variant", to_string(config.variant)},
        {"mode", to_string(config.mode)},
        {"learning_rate", config.learning_rate},
        {"epochs", config.epochs},
        {"dims",
         {{"embed", d.embed}, {"hidden", d.hidden}, {"attn", d.attn}, {"frames", d.frames},
          {"genres", d.genres}, {"gen_out", d.gen_out}, {"audio_vocab", d.audio_vocab}}}}},
      {"seeds", {{"init", config.seed}, {"frozen", config.frozen_seed}}},
      {"params", std::move(blocks)},
      {"frozen_digests",
       {{"embedding_table", block_digest(backbone.table)}, {"generator", block_digest(backbone.generator)}}},
      {"final_loss", final_loss}};
  return doc.dump(1);
}

EncoderParams params_from_checkpoint(std::string_view json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
  if (doc.value("format", "") != "kinebeat-toy-checkpoint" || doc.value("version", 0) != 1) {
    throw InputError("not a version 1 kinebeat checkpoint");
  }
  EncoderParams p;
  p.variant = parse_variant(doc.at("config").at("variant").get<std::string>());
  const auto& blocks = doc.at("params");
  for_each_block(p, [&](const std::string& name, MatrixXd& m) {
    if (!blocks.contains(name)) throw InputError("checkpoint is missing block " + name);
    m = matrix_from_json(blocks.at(name));
  });
  return p;
}

}  // namespace kinebeat::inversion
