#include "kinebeat/rhythm.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "kinebeat/error.h"

namespace kinebeat {

VelocityField compute_velocity(const PoseSequence& seq) {
  VelocityField vel;
  vel.fps = seq.fps();
  vel.steps = seq.frame_count() - 1;
  vel.joints = seq.joint_count();
  vel.values.resize(vel.steps * vel.joints);
  for (std::size_t t = 0; t < vel.steps; ++t) {
    for (std::size_t j = 0; j < vel.joints; ++j) {
      const Keypoint& a = seq.at(t, j);
      const Keypoint& b = seq.at(t + 1, j);
      vel.values[t * vel.joints + j] = {b.x - a.x, b.y - a.y};
    }
  }
  return vel;
}

std::size_t direction_bin(double vx, double vy, std::size_t bins) {
  if (vx == 0.0 && vy == 0.0) return bins;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double theta = std::atan2(vy, vx);
  if (theta < 0.0) theta += kTwoPi;
  const double sector = kTwoPi / static_cast<double>(bins);
  const auto k = static_cast<std::size_t>(std::floor(theta / sector));
  return std::min(k, bins - 1);
}

DirectionalVelocity direction_discretize(const VelocityField& vel, std::size_t bins) {
  if (bins < 2) throw InputError("direction bin count must be at least 2");
  DirectionalVelocity dv;
  dv.fps = vel.fps;
  dv.steps = vel.steps;
  dv.joints = vel.joints;
  dv.bins = bins;
  dv.values.assign(dv.steps * dv.joints * bins, 0.0);
  for (std::size_t t = 0; t < vel.steps; ++t) {
    for (std::size_t j = 0; j < vel.joints; ++j) {
      const Velocity& v = vel.at(t, j);
      const std::size_t k = direction_bin(v.vx, v.vy, bins);
      if (k == bins) continue;
      dv.at(t, j, k) = std::sqrt(v.vx * v.vx + v.vy * v.vy);
    }
  }
  return dv;
}

DiscreteAcceleration discrete_acceleration(const DirectionalVelocity& dv) {
  if (dv.steps < 2) throw InputError("acceleration needs at least two velocity steps");
  DiscreteAcceleration aq;
  aq.fps = dv.fps;
  aq.steps = dv.steps - 1;
  aq.joints = dv.joints;
  aq.bins = dv.bins;
  aq.values.resize(aq.steps * aq.joints * aq.bins);
  const std::size_t stride = dv.joints * dv.bins;
  for (std::size_t i = 0; i < aq.values.size(); ++i) {
    aq.values[i] = std::max(0.0, dv.values[i + stride] - dv.values[i]);
  }
  return aq;
}

TotalAcceleration total_acceleration(const DiscreteAcceleration& aq) {
  TotalAcceleration a;
  a.fps = aq.fps;
  a.values.assign(aq.steps, 0.0);
  for (std::size_t t = 0; t < aq.steps; ++t) {
    double sum = 0.0;
    for (std::size_t j = 0; j < aq.joints; ++j) {
      for (std::size_t k = 0; k < aq.bins; ++k) sum += aq.at(t, j, k);
    }
    a.values[t] = sum;
  }
  return a;
}

RhythmSequence detect_kinematic_beats(const TotalAcceleration& a, const PeakPickConfig& config) {
  if (!(config.min_value >= 0.0) || !(config.min_relative >= 0.0)) {
    throw InputError("peak thresholds must be nonnegative");
  }
  const std::size_t half = peak_half_window(config.window_seconds, a.fps);
  double peak = 0.0;
  for (double v : a.values) peak = std::max(peak, v);
  const double floor = std::max(config.min_value, config.min_relative * peak);

  RhythmSequence r;
  r.fps = a.fps;
  r.bits.assign(a.values.size() + kAccelerationFrameOffset, 0);
  for (std::size_t t : windowed_maxima(a.values, half, floor)) {
    r.bits[t + kAccelerationFrameOffset] = 1;
  }
  return r;
}

RhythmSequence extract_rhythm(const PoseSequence& seq, const RhythmConfig& config) {
  const PoseSequence repaired = interpolate_low_confidence(seq, config.confidence_threshold);
  const auto dv = direction_discretize(compute_velocity(repaired), config.bins);
  const auto a = total_acceleration(discrete_acceleration(dv));
  return detect_kinematic_beats(
      a, PeakPickConfig{config.window_seconds, config.min_value, config.min_relative});
}

std::string serialize_rhythm_json(const RhythmSequence& r) {
  nlohmann::json doc = {{"fps", r.fps}, {"bits", r.bits}};
  return doc.dump();
}

RhythmSequence parse_rhythm_json(std::string_view content) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed rhythm JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("fps") || !doc["fps"].is_number() ||
      !doc.contains("bits") || !doc["bits"].is_array()) {
    throw InputError("rhythm file must be {\"fps\": number, \"bits\": [0|1, ...]}");
  }
  RhythmSequence r;
  r.fps = doc["fps"].get<double>();
  if (!(r.fps > 0.0) || !std::isfinite(r.fps)) throw InputError("rhythm fps must be positive");
  for (const auto& b : doc["bits"]) {
    if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1)) {
      throw InputError("rhythm bits must be 0 or 1");
    }
    r.bits.push_back(static_cast<std::uint8_t>(b.get<int>()));
  }
  return r;
}

}  // namespace kinebeat
