#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kinebeat/peaks.h"
#include "kinebeat/pose.h"

namespace kinebeat {

// Kinematic rhythm extraction. A pose sequence of T frames becomes
//   velocity       (T-1) x J        first difference of keypoints
//   directional    (T-1) x J x K    speed placed in one of K direction bins
//   acceleration   (T-2) x J x K    rectified first difference of the above
//   total          (T-2)            sum over joints then bins
//   rhythm bits    T                windowed local maxima of the total
// Acceleration sample t lines up with original frame t + 2.

struct Velocity {
  double vx = 0.0;
  double vy = 0.0;
};

struct VelocityField {
  double fps = 0.0;
  std::size_t steps = 0;  // T - 1
  std::size_t joints = 0;
  std::vector<Velocity> values;

  const Velocity& at(std::size_t t, std::size_t j) const { return values[t * joints + j]; }
};

/// Dense steps x joints x bins array of nonnegative reals. Shared layout for
/// direction-binned velocity and rectified acceleration.
struct BinnedField {
  double fps = 0.0;
  std::size_t steps = 0;
  std::size_t joints = 0;
  std::size_t bins = 0;
  std::vector<double> values;

  double& at(std::size_t t, std::size_t j, std::size_t k) {
    return values[(t * joints + j) * bins + k];
  }
  double at(std::size_t t, std::size_t j, std::size_t k) const {
    return values[(t * joints + j) * bins + k];
  }
};

struct DirectionalVelocity : BinnedField {};
struct DiscreteAcceleration : BinnedField {};

struct TotalAcceleration {
  double fps = 0.0;
  std::vector<double> values;  // length T - 2
};

struct RhythmSequence {
  double fps = 0.0;
  std::vector<std::uint8_t> bits;  // length T, bits[0] = bits[1] = 0

  bool operator==(const RhythmSequence&) const = default;
};

/// Frame offset between acceleration sample t and its original frame.
inline constexpr std::size_t kAccelerationFrameOffset = 2;

inline constexpr std::size_t kDefaultDirectionBins = 8;
inline constexpr double kDefaultPeakWindowSeconds = 0.3;
inline constexpr double kDefaultMinRelative = 0.05;

VelocityField compute_velocity(const PoseSequence& seq);

/// Direction bin of a velocity: atan2(vy, vx) mapped to [0, 2pi), divided
/// into `bins` equal sectors starting at angle 0. Returns `bins` (no bin)
/// for the zero vector.
std::size_t direction_bin(double vx, double vy, std::size_t bins);

/// One-hot placement of the speed into its direction bin. bins >= 2.
DirectionalVelocity direction_discretize(const VelocityField& vel, std::size_t bins);

/// max(0, v[t+1] - v[t]) per (joint, bin). Needs at least 2 velocity steps.
DiscreteAcceleration discrete_acceleration(const DirectionalVelocity& dv);

/// Sum over joints (outer) and bins (inner), in that fixed order.
TotalAcceleration total_acceleration(const DiscreteAcceleration& aq);

struct PeakPickConfig {
  double window_seconds = kDefaultPeakWindowSeconds;
  double min_value = 0.0;
  /// Extra floor as a fraction of max(a); 0 disables it.
  double min_relative = 0.0;
};

/// Marks windowed maxima of the total acceleration; acceleration index t
/// sets rhythm bit t + 2. The effective floor is
/// max(min_value, min_relative * max(a)).
RhythmSequence detect_kinematic_beats(const TotalAcceleration& a, const PeakPickConfig& config);

struct RhythmConfig {
  std::size_t bins = kDefaultDirectionBins;
  double window_seconds = kDefaultPeakWindowSeconds;
  double min_value = 0.0;
  double min_relative = kDefaultMinRelative;
  double confidence_threshold = kDefaultConfidenceThreshold;
};

/// Full pipeline: interpolate_low_confidence, then velocity, direction bins,
/// rectified acceleration, total acceleration and peak picking.
RhythmSequence extract_rhythm(const PoseSequence& seq, const RhythmConfig& config);

/// `{"fps": n, "bits": [0|1, ...]}`
std::string serialize_rhythm_json(const RhythmSequence& r);
RhythmSequence parse_rhythm_json(std::string_view content);

}  // namespace kinebeat
