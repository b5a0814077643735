#include "kinebeat/alignment.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "kinebeat/error.h"

namespace kinebeat {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double sorted_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double mean_residual(const AlignmentReport& r) {
  if (r.pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [g, t] : r.pairs) sum += std::abs(g - t);
  return sum / static_cast<double>(r.pairs.size());
}

}  // namespace

double f1_score(double bcs, double bhs) {
  const double s = bcs + bhs;
  return s > 0.0 ? 2.0 * bcs * bhs / s : 0.0;
}

AlignmentReport match_beats(std::span<const double> gen, std::span<const double> ref, double tolerance) {
  if (!(tolerance > 0.0)) throw InputError("tolerance must be positive");
  AlignmentReport r;
  r.b_g = gen.size();
  r.b_t = ref.size();
  // With a uniform tolerance the compatibility graph is an interval graph:
  // matching the earliest compatible pair is always part of some maximum
  // matching, and an unmatched earlier beat can never match anything later.
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < gen.size() && j < ref.size()) {
    if (std::abs(gen[i] - ref[j]) <= tolerance) {
      r.pairs.emplace_back(gen[i], ref[j]);
      ++i;
      ++j;
    } else if (gen[i] < ref[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  r.b_a = r.pairs.size();
  r.bcs = ratio(r.b_a, r.b_g);
  r.bhs = ratio(r.b_a, r.b_t);
  r.f1 = f1_score(r.bcs, r.bhs);
  r.degenerate = r.b_g == 0 || r.b_t == 0;
  return r;
}

AlignmentReport match_beats(const BeatList& gen, const BeatList& ref, double tolerance) {
  return match_beats(gen.times(), ref.times(), tolerance);
}

double tempo_difference(const TempoEstimate& gen, const TempoEstimate& ref) {
  return std::abs(gen.bpm - ref.bpm);
}

double mean_tempo_difference(std::span<const std::pair<TempoEstimate, TempoEstimate>> pairs) {
  if (pairs.empty()) throw InputError("no tempo pairs to average");
  std::vector<double> diffs;
  diffs.reserve(pairs.size());
  for (const auto& [g, r] : pairs) diffs.push_back(tempo_difference(g, r));
  return sorted_mean(std::move(diffs));
}

AggregateSummary aggregate_reports(std::span<const AlignmentReport> reports) {
  if (reports.empty()) throw InputError("no reports to aggregate");
  AggregateSummary s;
  s.clips = reports.size();
  std::vector<double> bcs, bhs, f1;
  for (const auto& r : reports) {
    s.b_g += r.b_g;
    s.b_t += r.b_t;
    s.b_a += r.b_a;
    s.degenerate_clips += r.degenerate ? 1 : 0;
    bcs.push_back(r.bcs);
    bhs.push_back(r.bhs);
    f1.push_back(r.f1);
  }
  s.mean_bcs = sorted_mean(std::move(bcs));
  s.mean_bhs = sorted_mean(std::move(bhs));
  s.mean_f1 = sorted_mean(std::move(f1));
  s.f1_of_means = f1_score(s.mean_bcs, s.mean_bhs);
  s.pooled_bcs = ratio(s.b_a, s.b_g);
  s.pooled_bhs = ratio(s.b_a, s.b_t);
  s.pooled_f1 = f1_score(s.pooled_bcs, s.pooled_bhs);
  return s;
}

PhaseAlignment phase_align(const BeatList& gen, const BeatList& ref, const PhaseSearch& search) {
  if (!(search.step > 0.0) || !(search.range >= search.step)) {
    throw InputError("phase search needs step > 0 and range >= step");
  }
  const auto steps = static_cast<long>(std::floor(search.range / search.step + 1e-9));
  std::vector<double> shifted(gen.size());

  auto evaluate = [&](long k) {
    const double offset = static_cast<double>(k) * search.step;
    for (std::size_t i = 0; i < gen.size(); ++i) shifted[i] = gen.times()[i] + offset;
    return PhaseAlignment{offset, match_beats(shifted, ref.times(), search.tolerance)};
  };

  // Visit 0, -1, +1, -2, +2, ... so that only strict improvements replace
  // the incumbent and the remaining ties resolve by |offset| then sign.
  PhaseAlignment best = evaluate(0);
  double best_residual = mean_residual(best.report);
  constexpr double kResidualEps = 1e-12;
  for (long k = 1; k <= steps; ++k) {
    for (long signed_k : {-k, k}) {
      PhaseAlignment cand = evaluate(signed_k);
      const double residual = mean_residual(cand.report);
      const bool better = cand.report.f1 > best.report.f1 ||
                          (cand.report.f1 == best.report.f1 && residual < best_residual - kResidualEps);
      if (better) {
        best = std::move(cand);
        best_residual = residual;
      }
    }
  }
  return best;
}

std::string report_to_json(const AlignmentReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [g, r] : report.pairs) pairs.push_back({g, r});
  nlohmann::json doc = {{"b_g", report.b_g}, {"b_t", report.b_t}, {"b_a", report.b_a},
                        {"bcs", report.bcs}, {"bhs", report.bhs}, {"f1", report.f1},
                        {"pairs", std::move(pairs)}, {"degenerate", report.degenerate}};
  return doc.dump();
}

std::string reports_to_csv(std::span<const std::string> clip_names,
                           std::span<const AlignmentReport> reports) {
  if (clip_names.size() != reports.size()) {
    throw InputError("clip name count does not match report count");
  }
  std::ostringstream os;
  os.precision(17);
  os << "clip,b_g,b_t,b_a,bcs,bhs,f1,degenerate\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    os << clip_names[i] << ',' << r.b_g << ',' << r.b_t << ',' << r.b_a << ',' << r.bcs << ','
       << r.bhs << ',' << r.f1 << ',' << (r.degenerate ? 1 : 0) << '\n';
  }
  const AggregateSummary s = aggregate_reports(reports);
  os << "mean," << s.b_g << ',' << s.b_t << ',' << s.b_a << ',' << s.mean_bcs << ',' << s.mean_bhs
     << ',' << s.mean_f1 << ',' << s.degenerate_clips << '\n';
  return os.str();
}

}  // namespace kinebeat
