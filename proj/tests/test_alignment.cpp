#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kinebeat/alignment.h"
#include "kinebeat/error.h"
#include "support/oracles.h"

using namespace kinebeat;

namespace {

std::vector<double> random_beats(std::mt19937_64& rng, std::size_t max_count, double span) {
  std::uniform_int_distribution<std::size_t> count(0, max_count);
  std::uniform_real_distribution<double> u(0.0, span);
  std::vector<double> v(count(rng));
  for (auto& x : v) x = u(rng);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

TEST_CASE("match_beats worked example") {
  const auto r = match_beats(BeatList({1.0, 2.0, 3.0}), BeatList({1.1, 2.5}));
  CHECK(r.b_g == 3);
  CHECK(r.b_t == 2);
  CHECK(r.b_a == 1);
  CHECK(r.bcs == doctest::Approx(1.0 / 3));
  CHECK(r.bhs == doctest::Approx(0.5));
  CHECK(r.f1 == doctest::Approx(0.4));
  CHECK(oracle::max_matching({1.0, 2.0, 3.0}, {1.1, 2.5}, 0.2) == 1);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0] == std::pair{1.0, 1.1});
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("identical lists score 1") {
  const BeatList b({0.3, 0.9, 1.4, 2.2});
  const auto r = match_beats(b, b);
  CHECK(r.bcs == 1.0);
  CHECK(r.bhs == 1.0);
  CHECK(r.f1 == 1.0);
}

TEST_CASE("f1 of reported BCS/BHS pairs") {
  CHECK(std::abs(f1_score(0.4761, 0.4398) - 0.4572) <= 5e-5);
  CHECK(std::abs(f1_score(0.4118, 0.3874) - 0.3992) <= 5e-5);
  CHECK(std::abs(f1_score(0.4419, 0.3605) - 0.3971) <= 5e-5);
  CHECK(f1_score(0.0, 0.0) == 0.0);
}

TEST_CASE("degenerate inputs are flagged zeros") {
  const auto empty_gen = match_beats(BeatList{}, BeatList({1.0}));
  CHECK(empty_gen.degenerate);
  CHECK(empty_gen.bcs == 0.0);
  CHECK(empty_gen.bhs == 0.0);
  CHECK(empty_gen.f1 == 0.0);
  CHECK(match_beats(BeatList({1.0}), BeatList{}).degenerate);
  CHECK_THROWS_AS(match_beats(BeatList({1.0}), BeatList({1.0}), 0.0), InputError);
}

TEST_CASE("sweep equals exhaustive maximum matching") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto gen = random_beats(rng, 10, 4.0);
    const auto ref = random_beats(rng, 10, 4.0);
    const double tol = 0.05 + 0.05 * (trial % 6);
    const auto r = match_beats(gen, ref, tol);
    CHECK(r.b_a == oracle::max_matching(gen, ref, tol));
    // pairs are one-to-one and within tolerance
    for (std::size_t i = 0; i < r.pairs.size(); ++i) {
      CHECK(std::abs(r.pairs[i].first - r.pairs[i].second) <= tol);
      if (i) {
        CHECK(r.pairs[i].first > r.pairs[i - 1].first);
        CHECK(r.pairs[i].second > r.pairs[i - 1].second);
      }
    }
    CHECK(r.b_a <= std::min(r.b_g, r.b_t));
  }
}

TEST_CASE("swapping gen and ref swaps bcs and bhs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_beats(rng, 12, 5.0);
    const auto b = random_beats(rng, 12, 5.0);
    const auto ab = match_beats(a, b);
    const auto ba = match_beats(b, a);
    CHECK(ab.b_a == ba.b_a);
    CHECK(ab.bcs == ba.bhs);
    CHECK(ab.bhs == ba.bcs);
  }
}

TEST_CASE("shifting both lists changes nothing") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    // quarter-second grid keeps the shifted differences exact
    std::vector<double> a, b;
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 16; ++i) {
      if (coin(rng)) a.push_back(i * 0.25);
      if (coin(rng)) b.push_back(i * 0.25 + (coin(rng) ? 0.125 : 0.5));
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    auto as = a, bs = b;
    for (auto& x : as) x += 3.0;
    for (auto& x : bs) x += 3.0;
    CHECK(match_beats(a, b).b_a == match_beats(as, bs).b_a);
  }
}

TEST_CASE("tempo_difference") {
  CHECK(tempo_difference({120}, {120}) == 0.0);
  CHECK(tempo_difference({120}, {104}) == 16.0);
  const std::vector<std::pair<TempoEstimate, TempoEstimate>> pairs{{{120}, {100}}, {{90}, {102}}};
  CHECK(mean_tempo_difference(pairs) == 16.0);
  CHECK_THROWS_AS(mean_tempo_difference({}), InputError);
}

TEST_CASE("aggregate_reports") {
  const auto a = match_beats(BeatList({1.0, 2.0, 3.0}), BeatList({1.1, 2.5}));
  SUBCASE("single report") {
    const auto s = aggregate_reports(std::vector{a});
    CHECK(s.mean_bcs == a.bcs);
    CHECK(s.mean_bhs == a.bhs);
    CHECK(s.mean_f1 == a.f1);
    CHECK(s.b_a == a.b_a);
  }
  SUBCASE("mean f1") {
    AlignmentReport x, y;
    x.f1 = 0.2;
    y.f1 = 0.6;
    CHECK(aggregate_reports(std::vector{x, y}).mean_f1 == doctest::Approx(0.4));
  }
  SUBCASE("mean of f1 differs from f1 of means") {
    // clip 1: bcs 1, bhs 1 -> f1 1; clip 2: bcs 1, bhs 0.25 -> f1 0.4
    const auto c1 = match_beats(BeatList({1.0}), BeatList({1.0}));
    const auto c2 = match_beats(BeatList({1.0}), BeatList({1.0, 2.0, 3.0, 4.0}));
    const auto s = aggregate_reports(std::vector{c1, c2});
    CHECK(s.mean_f1 == doctest::Approx(0.7));
    CHECK(s.f1_of_means == doctest::Approx(2 * 1.0 * 0.625 / 1.625));
    CHECK(s.mean_f1 != doctest::Approx(s.f1_of_means));
    CHECK(s.pooled_bcs == 1.0);
    CHECK(s.pooled_bhs == doctest::Approx(0.4));
  }
  SUBCASE("order does not matter") {
    std::mt19937_64 rng(3);
    std::vector<AlignmentReport> reports;
    for (int i = 0; i < 30; ++i) reports.push_back(match_beats(random_beats(rng, 10, 5), random_beats(rng, 10, 5)));
    const auto forward = aggregate_reports(reports);
    std::shuffle(reports.begin(), reports.end(), rng);
    const auto shuffled = aggregate_reports(reports);
    CHECK(forward.mean_f1 == shuffled.mean_f1);
    CHECK(forward.mean_bcs == shuffled.mean_bcs);
    CHECK(forward.mean_bhs == shuffled.mean_bhs);
  }
  SUBCASE("empty list") { CHECK_THROWS_AS(aggregate_reports({}), InputError); }
}

TEST_CASE("phase_align") {
  const std::vector<double> ref{0.5, 1.0, 1.5, 2.1, 2.6, 3.0, 3.7, 4.2, 4.6};
  SUBCASE("recovers a 0.37 s shift") {
    std::vector<double> gen = ref;
    for (auto& x : gen) x += 0.37;
    const auto pa = phase_align(BeatList(gen), BeatList(ref));
    CHECK(std::abs(pa.offset + 0.37) <= 0.01 + 1e-12);
    CHECK(pa.report.f1 == 1.0);
  }
  SUBCASE("identical lists stay at zero") {
    const auto pa = phase_align(BeatList(ref), BeatList(ref));
    CHECK(pa.offset == 0.0);
    CHECK(pa.report.f1 == 1.0);
  }
  SUBCASE("empty gen") {
    const auto pa = phase_align(BeatList{}, BeatList(ref));
    CHECK(pa.offset == 0.0);
    CHECK(pa.report.degenerate);
  }
  SUBCASE("never worse than no shift") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
      const BeatList g(random_beats(rng, 10, 5.0)), r(random_beats(rng, 10, 5.0));
      CHECK(phase_align(g, r).report.f1 >= match_beats(g, r).f1);
    }
  }
  SUBCASE("bad search") {
    CHECK_THROWS_AS(phase_align(BeatList(ref), BeatList(ref), {1.0, 0.0, 0.2}), InputError);
    CHECK_THROWS_AS(phase_align(BeatList(ref), BeatList(ref), {0.001, 0.01, 0.2}), InputError);
  }
}

TEST_CASE("report serialisation") {
  const auto r = match_beats(BeatList({1.0, 2.0, 3.0}), BeatList({1.1, 2.5}));
  CHECK(report_to_json(r) ==
        R"({"b_a":1,"b_g":3,"b_t":2,"bcs":0.3333333333333333,"bhs":0.5,"degenerate":false,"f1":0.4,"pairs":[[1.0,1.1]]})");
  const std::vector<std::string> names{"clip_a"};
  const std::string csv = reports_to_csv(names, std::vector{r});
  CHECK(csv.rfind("clip,b_g,b_t,b_a,bcs,bhs,f1,degenerate\nclip_a,3,2,1,", 0) == 0);
  CHECK(csv.find("\nmean,3,2,1,") != std::string::npos);
}

TEST_CASE("BeatList validation") {
  CHECK_THROWS_AS(BeatList({1.0, 1.0}), InputError);
  CHECK_THROWS_AS(BeatList({-0.1}), InputError);
  CHECK(parse_beats_json(serialize_beats_json(BeatList({0.5, 1.25}))) == BeatList({0.5, 1.25}));
  CHECK_THROWS_AS(parse_beats_json(R"({"beats_sec": [2, 1]})"), InputError);
  CHECK_THROWS_AS(parse_beats_json(R"({"beats": []})"), InputError);
}
