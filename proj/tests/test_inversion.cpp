#include <doctest.h>

#include <cmath>
#include <random>

#include "kinebeat/error.h"
#include "kinebeat/inversion.h"

using namespace kinebeat;
using namespace kinebeat::inversion;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Straight-line re-implementations with explicit loops.
std::vector<double> mlp_reference(const EncoderParams& p, const std::vector<double>& r) {
  const auto h = static_cast<std::size_t>(p.w1.rows());
  const auto d = static_cast<std::size_t>(p.w2.rows());
  std::vector<double> hidden(h), out(d);
  for (std::size_t i = 0; i < h; ++i) {
    double s = p.b1(i, 0);
    for (std::size_t t = 0; t < r.size(); ++t) s += p.w1(i, t) * r[t];
    hidden[i] = std::tanh(s);
  }
  for (std::size_t o = 0; o < d; ++o) {
    double s = p.b2(o, 0);
    for (std::size_t i = 0; i < h; ++i) s += p.w2(o, i) * hidden[i];
    out[o] = s;
  }
  return out;
}

std::vector<double> attn_reference(const EncoderParams& p, const std::vector<double>& r) {
  const std::size_t T = r.size();
  const auto da = static_cast<std::size_t>(p.wq.rows());
  const auto d = static_cast<std::size_t>(p.wo.rows());
  std::vector<std::vector<double>> x(T, std::vector<double>(da)), q = x, k = x, v = x;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < da; ++c) x[t][c] = p.frame_embed(c, 0) * r[t] + p.pos(t, c);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < da; ++c) {
      double sq = 0, sk = 0, sv = 0;
      for (std::size_t e = 0; e < da; ++e) {
        sq += p.wq(c, e) * x[t][e];
        sk += p.wk(c, e) * x[t][e];
        sv += p.wv(c, e) * x[t][e];
      }
      q[t][c] = sq;
      k[t][c] = sk;
      v[t][c] = sv;
    }
  }
  std::vector<double> pool(da, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> s(T);
    double mx = -1e300;
    for (std::size_t u = 0; u < T; ++u) {
      double dot = 0;
      for (std::size_t c = 0; c < da; ++c) dot += q[t][c] * k[u][c];
      s[u] = dot / std::sqrt(double(da));
      mx = std::max(mx, s[u]);
    }
    double z = 0;
    for (auto& e : s) z += (e = std::exp(e - mx));
    for (std::size_t u = 0; u < T; ++u)
      for (std::size_t c = 0; c < da; ++c) pool[c] += s[u] / z * v[u][c] / double(T);
  }
  std::vector<double> out(d);
  for (std::size_t o = 0; o < d; ++o) {
    double s = p.bo(o, 0);
    for (std::size_t c = 0; c < da; ++c) s += p.wo(o, c) * pool[c];
    out[o] = s;
  }
  return out;
}

double loss_reference(const FrozenBackbone& bb, const MatrixXd& rows, const Target& target) {
  const auto d = static_cast<std::size_t>(rows.cols());
  std::vector<double> cond(d, 0.0);
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (std::size_t c = 0; c < d; ++c) cond[c] += rows(i, c) / double(rows.rows());
  std::vector<double> y(bb.generator.rows(), 0.0);
  for (std::size_t o = 0; o < y.size(); ++o)
    for (std::size_t c = 0; c < d; ++c) y[o] += bb.generator(o, c) * cond[c];
  if (bb.mode == LossMode::kRegression) {
    double s = 0;
    for (std::size_t o = 0; o < y.size(); ++o) s += (y[o] - target.values(o)) * (y[o] - target.values(o));
    return s / double(y.size());
  }
  double mx = -1e300, z = 0;
  for (double e : y) mx = std::max(mx, e);
  for (double e : y) z += std::exp(e - mx);
  double s = 0;
  for (auto tok : target.tokens) s += -(y[tok] - mx - std::log(z));
  return s / double(target.tokens.size());
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Dims small_dims() {
  Dims d;
  d.frames = 24;
  d.hidden = 8;
  d.attn = 6;
  d.embed = 5;
  d.genres = 4;
  d.gen_out = 7;
  d.audio_vocab = 9;
  return d;
}

void check_close(const std::vector<double>& a, const VectorXd& b, double rel) {
  REQUIRE(a.size() == static_cast<std::size_t>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i] - b(i)) <= rel * std::max(1.0, std::abs(a[i])));
  }
}

}  // namespace

TEST_CASE("prompt template") {
  const auto t = default_prompt();
  REQUIRE(t.tokens.size() == 8);
  CHECK(t.vocabulary[t.tokens[t.genre_slot]] == "@");
  CHECK(t.vocabulary[t.tokens[t.rhythm_slot]] == "*");
}

TEST_CASE("assemble_prompt_embeddings") {
  const auto bb = make_backbone(Dims{}, LossMode::kRegression, 3);
  const auto& t = bb.prompt;
  SUBCASE("slot rows equal to the table give a plain lookup") {
    const VectorXd vg = bb.table.row(1).transpose(), vr = bb.table.row(4).transpose();
    CHECK(assemble_prompt_embeddings(t, bb.table, vg, vr) == bb.table);
  }
  SUBCASE("changing the rhythm input only touches the rhythm slot") {
    const VectorXd vg = VectorXd::Random(16);
    const MatrixXd a = assemble_prompt_embeddings(t, bb.table, vg, VectorXd::Random(16));
    const MatrixXd b = assemble_prompt_embeddings(t, bb.table, vg, VectorXd::Random(16));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i == static_cast<Eigen::Index>(t.rhythm_slot))
        CHECK(a.row(i) != b.row(i));
      else
        CHECK(a.row(i) == b.row(i));
    }
  }
  SUBCASE("zero slot vectors leave the other rows alone") {
    const MatrixXd a = assemble_prompt_embeddings(t, bb.table, VectorXd::Zero(16), VectorXd::Zero(16));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i == 1 || i == 4)
        CHECK(a.row(i).isZero());
      else
        CHECK(a.row(i) == bb.table.row(i));
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(assemble_prompt_embeddings(t, bb.table, VectorXd::Zero(3), VectorXd::Zero(16)), InputError);
  }
}

TEST_CASE("rhythm_encoder_forward") {
  const Dims dims;
  SUBCASE("zero MLP gives zero") {
    const EncoderParams z = zeros_like(init_params(dims, ProjectorVariant::kMlp, 1));
    VectorXd r = VectorXd::Zero(308);
    r(10) = 1;
    CHECK(rhythm_encoder_forward(z, r).isZero());
  }
  SUBCASE("zero rhythm gives the closed form") {
    const auto p = init_params(dims, ProjectorVariant::kMlp, 2);
    const VectorXd expected = p.w2 * p.b1.col(0).array().tanh().matrix() + p.b2.col(0);
    CHECK(rhythm_encoder_forward(p, VectorXd::Zero(308)) == expected);
  }
  SUBCASE("matches straight-line re-implementations") {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution bit(0.1);
    for (auto variant : {ProjectorVariant::kMlp, ProjectorVariant::kAttnPos}) {
      const auto p = init_params(dims, variant, 9);
      std::vector<double> r(308);
      for (auto& x : r) x = bit(rng);
      const VectorXd rv = Eigen::Map<VectorXd>(r.data(), 308);
      const auto expected = variant == ProjectorVariant::kMlp ? mlp_reference(p, r) : attn_reference(p, r);
      check_close(expected, rhythm_encoder_forward(p, rv), 1e-12);
    }
  }
  SUBCASE("short inputs are zero padded, long ones truncated") {
    const auto p = init_params(dims, ProjectorVariant::kMlp, 4);
    VectorXd shorter = VectorXd::Zero(100);
    shorter(7) = 1;
    VectorXd full = VectorXd::Zero(308);
    full(7) = 1;
    VectorXd longer = VectorXd::Zero(400);
    longer(7) = 1;
    longer(350) = 1;
    CHECK(rhythm_encoder_forward(p, shorter) == rhythm_encoder_forward(p, full));
    CHECK(rhythm_encoder_forward(p, longer) == rhythm_encoder_forward(p, full));
  }
  SUBCASE("values outside [0,1] are rejected") {
    const auto p = init_params(dims, ProjectorVariant::kMlp, 4);
    VectorXd bad = VectorXd::Zero(308);
    bad(0) = 2.0;
    CHECK_THROWS_AS(rhythm_encoder_forward(p, bad), InputError);
  }
  SUBCASE("one differing bit changes the output norm") {
    for (auto variant : {ProjectorVariant::kMlp, ProjectorVariant::kAttnPos}) {
      const auto p = init_params(dims, variant, 7);
      VectorXd a = VectorXd::Zero(308);
      a(30) = a(60) = 1;
      VectorXd b = a;
      b(90) = 1;
      CHECK(rhythm_encoder_forward(p, a).norm() != rhythm_encoder_forward(p, b).norm());
    }
  }
}

TEST_CASE("genre_encoder_forward") {
  const Dims dims;
  auto p = init_params(dims, ProjectorVariant::kMlp, 3);
  VectorXd g = VectorXd::Zero(10);
  g(4) = 1;
  CHECK(genre_encoder_forward(p, g) == (p.genre_w.col(4) + p.genre_b.col(0)).array().tanh().matrix());
  VectorXd h = VectorXd::Zero(10);
  h(5) = 1;
  CHECK(genre_encoder_forward(p, g) != genre_encoder_forward(p, h));
  CHECK_THROWS_AS(genre_encoder_forward(p, VectorXd::Zero(10)), InputError);
  VectorXd two = g;
  two(1) = 1;
  CHECK_THROWS_AS(genre_encoder_forward(p, two), InputError);
  CHECK_THROWS_AS(genre_encoder_forward(p, VectorXd::Zero(3)), InputError);
  p.genre_w.setZero();
  p.genre_b.setZero();
  CHECK(genre_encoder_forward(p, g).isZero());
}

TEST_CASE("reconstruction_loss") {
  const Dims dims;
  SUBCASE("regression target equal to the generator output") {
    const auto bb = make_backbone(dims, LossMode::kRegression, 1);
    const MatrixXd rows = MatrixXd::Random(8, 16);
    Target t{bb.generator * rows.colwise().mean().transpose(), {}};
    CHECK(reconstruction_loss(bb, rows, t) == doctest::Approx(0.0).epsilon(1e-30));
  }
  SUBCASE("uniform logits over four tokens give ln 4") {
    FrozenBackbone bb = make_backbone(dims, LossMode::kCategorical, 1);
    bb.generator = MatrixXd::Zero(4, 16);
    CHECK(reconstruction_loss(bb, MatrixXd::Random(8, 16), Target{{}, {2}}) == doctest::Approx(std::log(4.0)));
    CHECK(std::log(4.0) == doctest::Approx(1.3863).epsilon(1e-4));
  }
  SUBCASE("matches the duplicate implementation") {
    std::mt19937_64 rng(3);
    for (auto mode : {LossMode::kRegression, LossMode::kCategorical}) {
      const auto bb = make_backbone(dims, mode, 5);
      const MatrixXd rows = MatrixXd::Random(8, 16);
      Target t{VectorXd::Random(24), {0, 5, 31, 5}};
      const double a = reconstruction_loss(bb, rows, t);
      const double b = loss_reference(bb, rows, t);
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
    }
  }
  SUBCASE("shape errors") {
    const auto bb = make_backbone(dims, LossMode::kRegression, 1);
    CHECK_THROWS_AS(reconstruction_loss(bb, MatrixXd::Zero(8, 16), Target{VectorXd::Zero(3), {}}), InputError);
    CHECK_THROWS_AS(reconstruction_loss(bb, MatrixXd::Zero(8, 4), Target{VectorXd::Zero(24), {}}), InputError);
    const auto cat = make_backbone(dims, LossMode::kCategorical, 1);
    CHECK_THROWS_AS(reconstruction_loss(cat, MatrixXd::Zero(8, 16), Target{{}, {32}}), InputError);
    CHECK_THROWS_AS(reconstruction_loss(cat, MatrixXd::Zero(8, 16), Target{{}, {}}), InputError);
  }
}

TEST_CASE("encoder_gradients against finite differences") {
  const Dims dims = small_dims();
  SUBCASE("zero rhythm: genre gradient to 1e-6") {
    const auto bb = make_backbone(dims, LossMode::kRegression, 11);
    auto batch = make_teacher_student_dataset(bb, dims, ProjectorVariant::kMlp, 4, 12);
    for (auto& s : batch) s.rhythm.setZero();
    const auto p = init_params(dims, ProjectorVariant::kMlp, 13);
    const auto report = compare_with_finite_differences(bb, p, batch);
    for (const auto& b : report.blocks) {
      if (b.name.rfind("genre.", 0) == 0) CHECK_MESSAGE(b.max_rel_error < 1e-6, b.name);
    }
  }
  SUBCASE("teacher equals student: gradient vanishes") {
    for (auto variant : {ProjectorVariant::kMlp, ProjectorVariant::kAttnPos}) {
      const auto bb = make_backbone(dims, LossMode::kRegression, 1);
      const auto batch = make_teacher_student_dataset(bb, dims, variant, 5, 42);
      const auto lg = encoder_gradients(bb, init_params(dims, variant, 42), batch);
      double sq = 0.0;
      for_each_block(lg.grad, [&](const std::string&, const MatrixXd& g) { sq += g.squaredNorm(); });
      CHECK(std::sqrt(sq) < 1e-8);
      CHECK(lg.loss < 1e-20);
    }
  }
  SUBCASE("every variant and mode, every coordinate, below 1e-4") {
    for (auto variant : {ProjectorVariant::kMlp, ProjectorVariant::kAttnPos}) {
      for (auto mode : {LossMode::kRegression, LossMode::kCategorical}) {
        const auto report = gradcheck(dims, variant, mode, 99);
        CAPTURE(to_string(variant));
        CAPTURE(to_string(mode));
        CHECK(report.max_rel_error < 1e-4);
        CHECK(report.passed());
      }
    }
  }
  SUBCASE("test-side central differences agree with the analytic gradient") {
    // independent of compare_with_finite_differences: perturb via a copy
    const auto bb = make_backbone(dims, LossMode::kCategorical, 21);
    const auto batch = make_teacher_student_dataset(bb, dims, ProjectorVariant::kAttnPos, 3, 22);
    const auto p = init_params(dims, ProjectorVariant::kAttnPos, 23);
    const auto lg = encoder_gradients(bb, p, batch);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < p.pos.size(); i += 7) {
      EncoderParams plus = p, minus = p;
      plus.pos.data()[i] += h;
      minus.pos.data()[i] -= h;
      const double fd = (batch_loss(bb, plus, batch) - batch_loss(bb, minus, batch)) / (2 * h);
      const double a = lg.grad.pos.data()[i];
      CHECK(std::abs(fd - a) <= 1e-4 * std::max({std::abs(a), std::abs(fd), 1e-6}));
    }
  }
}

TEST_CASE("full-size MLP gradient check") {
  const auto report = gradcheck(Dims{}, ProjectorVariant::kMlp, LossMode::kRegression, 5);
  for (const auto& b : report.blocks) CHECK_MESSAGE(b.max_rel_error < 1e-4, b.name);
}

TEST_CASE("train") {
  const Dims dims = small_dims();
  const auto bb = make_backbone(dims, LossMode::kRegression, 1);
  const auto data = make_teacher_student_dataset(bb, dims, ProjectorVariant::kMlp, 6, 100);
  TrainingConfig cfg;
  cfg.dims = dims;
  cfg.epochs = 50;

  SUBCASE("lr 0 keeps the loss constant") {
    cfg.learning_rate = 0.0;
    const auto res = train(cfg, bb, data);
    REQUIRE(res.loss_history.size() == 51);
    for (double l : res.loss_history) CHECK(l == res.loss_history.front());
  }
  SUBCASE("same seed twice is bitwise identical") {
    const auto a = train(cfg, bb, data);
    const auto b = train(cfg, bb, data);
    CHECK(a.loss_history == b.loss_history);
    CHECK(checkpoint_json(cfg, bb, a.params, a.loss_history.back()) ==
          checkpoint_json(cfg, bb, b.params, b.loss_history.back()));
  }
  SUBCASE("frozen blocks are untouched") {
    const std::string table = block_digest(bb.table);
    const std::string gen = block_digest(bb.generator);
    train(cfg, bb, data);
    CHECK(block_digest(bb.table) == table);
    CHECK(block_digest(bb.generator) == gen);
  }
  SUBCASE("divergence reports the epoch") {
    cfg.learning_rate = 1e200;
    CHECK_THROWS_WITH_AS(train(cfg, bb, data), doctest::Contains("epoch"), ComputeError);
  }
  SUBCASE("empty dataset") { CHECK_THROWS_AS(train(cfg, bb, {}), InputError); }
  SUBCASE("zero epochs return the initialisation") {
    cfg.epochs = 0;
    const auto res = train(cfg, bb, data);
    CHECK(res.loss_history.size() == 1);
    CHECK(checkpoint_json(cfg, bb, res.params, 0.0) == checkpoint_json(cfg, bb, res.initial, 0.0));
  }
}

TEST_CASE("checkpoint round trip and digests") {
  const Dims dims = small_dims();
  TrainingConfig cfg;
  cfg.dims = dims;
  cfg.variant = ProjectorVariant::kAttnPos;
  const auto bb = make_backbone(dims, LossMode::kRegression, cfg.frozen_seed);
  const auto p = init_params(dims, cfg.variant, cfg.seed);
  const std::string json = checkpoint_json(cfg, bb, p, 0.5);
  const auto back = params_from_checkpoint(json);
  std::vector<MatrixXd> a, b;
  for_each_block(p, [&](const std::string&, const MatrixXd& m) { a.push_back(m); });
  for_each_block(back, [&](const std::string&, const MatrixXd& m) { b.push_back(m); });
  CHECK(a == b);
  CHECK(block_digest(MatrixXd::Zero(2, 3)) != block_digest(MatrixXd::Zero(3, 2)));
  CHECK(block_digest(MatrixXd::Zero(1, 1)).size() == 64);
  CHECK_THROWS_AS(params_from_checkpoint("{}"), InputError);
}
