#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kinebeat/audio.h"
#include "kinebeat/beats.h"

namespace kinebeat {

inline constexpr double kDefaultTolerance = 0.2;  // seconds

/// Beat alignment between generated (gen) and reference (ref) beats.
///
/// b_a is the size of a maximum one-to-one matching under
/// |gen - ref| <= tolerance. bcs = b_a / b_g, bhs = b_a / b_t and f1 is
/// their harmonic mean. An empty side makes its ratio 0 and sets
/// `degenerate`.
struct AlignmentReport {
  std::size_t b_g = 0;
  std::size_t b_t = 0;
  std::size_t b_a = 0;
  double bcs = 0.0;
  double bhs = 0.0;
  double f1 = 0.0;
  std::vector<std::pair<double, double>> pairs;  // (gen_time, ref_time)
  bool degenerate = false;
};

/// Harmonic mean of the two scores, 0 when both are 0.
double f1_score(double bcs, double bhs);

/// Maximum matching by a sorted two-pointer sweep. Inputs must be ascending.
AlignmentReport match_beats(std::span<const double> gen, std::span<const double> ref,
                            double tolerance = kDefaultTolerance);
AlignmentReport match_beats(const BeatList& gen, const BeatList& ref,
                            double tolerance = kDefaultTolerance);

/// |gen - ref| in BPM.
double tempo_difference(const TempoEstimate& gen, const TempoEstimate& ref);

/// Mean of tempo_difference over pairs; throws InputError when empty.
double mean_tempo_difference(std::span<const std::pair<TempoEstimate, TempoEstimate>> pairs);

struct AggregateSummary {
  std::size_t clips = 0;
  std::size_t b_g = 0;
  std::size_t b_t = 0;
  std::size_t b_a = 0;
  std::size_t degenerate_clips = 0;
  // Headline: unweighted means of per-clip scores.
  double mean_bcs = 0.0;
  double mean_bhs = 0.0;
  double mean_f1 = 0.0;
  // Harmonic mean of mean_bcs and mean_bhs; can differ from mean_f1.
  double f1_of_means = 0.0;
  // Ratios of the summed counts (beats pooled over the dataset).
  double pooled_bcs = 0.0;
  double pooled_bhs = 0.0;
  double pooled_f1 = 0.0;
};

/// Dataset summary. Means are taken over sorted values, so the result does
/// not depend on the order of `reports`. Throws InputError when empty.
AggregateSummary aggregate_reports(std::span<const AlignmentReport> reports);

struct PhaseSearch {
  double range = 1.0;   // seconds
  double step = 0.01;   // seconds
  double tolerance = kDefaultTolerance;
};

struct PhaseAlignment {
  double offset = 0.0;  // added to every gen time
  AlignmentReport report;  // pairs hold shifted gen times
};

/// Scores gen shifted by every k * step with |k * step| <= range and keeps
/// the best f1. Ties go to the smaller mean |gen - ref| over matched pairs,
/// then the smaller |offset|, then the negative offset.
PhaseAlignment phase_align(const BeatList& gen, const BeatList& ref, const PhaseSearch& search = {});

/// `{"b_g", "b_t", "b_a", "bcs", "bhs", "f1", "pairs", "degenerate"}`
std::string report_to_json(const AlignmentReport& report);

/// One row per clip, then a summary row labelled "mean".
std::string reports_to_csv(std::span<const std::string> clip_names,
                           std::span<const AlignmentReport> reports);

}  // namespace kinebeat
