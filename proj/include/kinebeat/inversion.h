#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace kinebeat::inversion {

// Desk-scale encoder-based textual inversion. A fixed prompt
// "a @ music with * as the rhythm" is embedded by a frozen table, except
// that "@" takes the genre encoder output and "*" the rhythm encoder
// output. A frozen toy generator reads the mean of the prompt embeddings.
// Training moves only the two encoders.

enum class ProjectorVariant { kMlp, kAttnPos };
enum class LossMode { kRegression, kCategorical };

std::string to_string(ProjectorVariant v);
std::string to_string(LossMode m);
ProjectorVariant parse_variant(std::string_view s);
LossMode parse_mode(std::string_view s);

struct Dims {
  std::size_t embed = 16;        // d
  std::size_t hidden = 32;       // MLP hidden width h
  std::size_t attn = 16;         // d'
  std::size_t frames = 308;      // T, projector input length
  std::size_t genres = 10;       // G
  std::size_t gen_out = 24;      // m, regression target size
  std::size_t audio_vocab = 32;  // V_a, categorical target vocabulary

  bool operator==(const Dims&) const = default;
};

struct PromptTemplate {
  std::vector<std::string> vocabulary;
  std::vector<std::size_t> tokens;
  std::size_t genre_slot = 0;
  std::size_t rhythm_slot = 0;
};

/// "a @ music with * as the rhythm" over an 8-word vocabulary.
PromptTemplate default_prompt();

/// The parts that never train.
struct FrozenBackbone {
  PromptTemplate prompt;
  LossMode mode = LossMode::kRegression;
  Eigen::MatrixXd table;      // vocab x d
  Eigen::MatrixXd generator;  // m x d (regression) or V_a x d (categorical)
};

/// Standard normal entries scaled by 1/sqrt(d), from `seed`.
FrozenBackbone make_backbone(const Dims& dims, LossMode mode, std::uint64_t seed);

/// Trainable weights. Every block is a matrix; biases are column vectors.
struct EncoderParams {
  ProjectorVariant variant = ProjectorVariant::kMlp;
  // MLP rhythm projector: w2 * tanh(w1 * r + b1) + b2
  Eigen::MatrixXd w1, b1, w2, b2;
  // Attn+Pos rhythm projector
  Eigen::MatrixXd frame_embed;  // d' x 1
  Eigen::MatrixXd pos;          // T x d'
  Eigen::MatrixXd wq, wk, wv;   // d' x d'
  Eigen::MatrixXd wo;           // d x d'
  Eigen::MatrixXd bo;           // d x 1
  // genre projector: tanh(genre_w * g + genre_b)
  Eigen::MatrixXd genre_w;  // d x G
  Eigen::MatrixXd genre_b;  // d x 1
};

/// Uniform [-0.1, 0.1] entries from `seed`, shaped for `variant`.
EncoderParams init_params(const Dims& dims, ProjectorVariant variant, std::uint64_t seed);

/// Same shapes, all zeros.
EncoderParams zeros_like(const EncoderParams& p);

/// Visits the blocks that exist for p.variant as ("rhythm.w1", matrix), ...
void for_each_block(EncoderParams& p, const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn);
void for_each_block(const EncoderParams& p,
                    const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn);

/// Rows of the prompt embedding: table rows, with the genre and rhythm slots
/// replaced. Throws InputError on a dimension mismatch.
Eigen::MatrixXd assemble_prompt_embeddings(const PromptTemplate& prompt, const Eigen::MatrixXd& table,
                                           const Eigen::VectorXd& v_genre, const Eigen::VectorXd& v_rhythm);

/// Zero-pads or truncates the tail to `frames`. Values must lie in [0, 1].
Eigen::VectorXd fit_rhythm_input(const Eigen::VectorXd& r, std::size_t frames);

Eigen::VectorXd rhythm_encoder_forward(const EncoderParams& p, const Eigen::VectorXd& r);
/// g must be one-hot of length G.
Eigen::VectorXd genre_encoder_forward(const EncoderParams& p, const Eigen::VectorXd& g);

struct Target {
  Eigen::VectorXd values;            // regression: length m
  std::vector<std::size_t> tokens;   // categorical: ids in [0, V_a)
};

/// Regression: mean squared error of generator * mean(rows) against the
/// target. Categorical: mean cross-entropy of softmax(generator * mean(rows))
/// over the target tokens.
double reconstruction_loss(const FrozenBackbone& backbone, const Eigen::MatrixXd& embeddings,
                           const Target& target);

struct Sample {
  Eigen::VectorXd rhythm;  // any length; fitted to T
  Eigen::VectorXd genre;   // one-hot
  Target target;
};

/// Mean loss over the batch.
double batch_loss(const FrozenBackbone& backbone, const EncoderParams& p, const std::vector<Sample>& batch);

struct LossAndGrad {
  double loss = 0.0;
  EncoderParams grad;
};

/// Analytic gradient of batch_loss with respect to the encoder blocks only.
LossAndGrad encoder_gradients(const FrozenBackbone& backbone, const EncoderParams& p,
                              const std::vector<Sample>& batch);

struct TrainingConfig {
  double learning_rate = 2.0;
  std::size_t epochs = 2000;
  std::uint64_t seed = 7;          // encoder initialisation
  std::uint64_t frozen_seed = 1;   // table and generator
  ProjectorVariant variant = ProjectorVariant::kMlp;
  LossMode mode = LossMode::kRegression;
  Dims dims;
};

struct TrainingResult {
  EncoderParams initial;
  EncoderParams params;
  std::vector<double> loss_history;  // epochs + 1 entries, [0] before any step
};

/// Full-batch gradient descent. Throws ComputeError naming the epoch if the
/// loss becomes non-finite, InputError on an empty dataset.
TrainingResult train(const TrainingConfig& config, const FrozenBackbone& backbone,
                     const std::vector<Sample>& dataset);

/// Teacher-student data: targets come from a hidden teacher of the same
/// architecture (initialised from `teacher_seed`), so a zero-loss solution
/// exists. Rhythms are sparse random beat trains.
std::vector<Sample> make_teacher_student_dataset(const FrozenBackbone& backbone, const Dims& dims,
                                                 ProjectorVariant variant, std::size_t samples,
                                                 std::uint64_t teacher_seed);

struct BlockError {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t coordinates = 0;
};

struct GradCheckReport {
  std::vector<BlockError> blocks;
  double max_rel_error = 0.0;
  bool passed(double threshold = 1e-4) const { return max_rel_error < threshold; }
};

inline constexpr double kFiniteDifferenceStep = 1e-5;
/// Central differences of a loss near ln(V_a) carry ~5e-11 of round-off;
/// below this magnitude a gradient is compared in absolute terms.
inline constexpr double kRelativeErrorFloor = 1e-5;

/// Compares encoder_gradients with central differences on every coordinate.
/// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, kRelativeErrorFloor).
GradCheckReport compare_with_finite_differences(const FrozenBackbone& backbone, const EncoderParams& p,
                                                const std::vector<Sample>& batch,
                                                double step = kFiniteDifferenceStep);

/// Random instance (params, backbone and a small teacher-student batch) built
/// from `seed`, then compare_with_finite_differences.
GradCheckReport gradcheck(const Dims& dims, ProjectorVariant variant, LossMode mode, std::uint64_t seed);

/// SHA-256 (hex) of a matrix's shape and little-endian IEEE-754 contents.
std::string block_digest(const Eigen::MatrixXd& m);

/// Versioned JSON checkpoint: config, seeds, every parameter block, frozen
/// digests and the final loss. Doubles are written shortest-round-trip.
std::string checkpoint_json(const TrainingConfig& config, const FrozenBackbone& backbone,
                            const EncoderParams& params, double final_loss);

/// Reads the parameter blocks back out of a checkpoint.
EncoderParams params_from_checkpoint(std::string_view json);

}  // namespace kinebeat::inversion
