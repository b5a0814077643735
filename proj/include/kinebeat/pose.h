#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace kinebeat {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 1.0;

  bool operator==(const Keypoint&) const = default;
};

/// Timed 2D keypoint trajectories: T frames of J joints sampled at `fps`.
///
/// Construction validates the invariants (fps > 0, T >= 3, J >= 1, finite
/// coordinates, confidence in [0, 1]) and throws InputError otherwise, so a
/// PoseSequence that exists is always well-formed.
class PoseSequence {
 public:
  PoseSequence(double fps, std::size_t joints, std::vector<Keypoint> frames_row_major);

  /// Builds from nested frames; reports ragged frames with their index.
  static PoseSequence from_frames(double fps, const std::vector<std::vector<Keypoint>>& frames);

  double fps() const { return fps_; }
  std::size_t frame_count() const { return data_.size() / joints_; }
  std::size_t joint_count() const { return joints_; }

  const Keypoint& at(std::size_t frame, std::size_t joint) const {
    return data_[frame * joints_ + joint];
  }

  /// Frames [first, first + count) as a new sequence with the same fps.
  PoseSequence slice(std::size_t first, std::size_t count) const;

  const std::vector<Keypoint>& data() const { return data_; }

  bool operator==(const PoseSequence&) const = default;

 private:
  double fps_;
  std::size_t joints_;
  std::vector<Keypoint> data_;
};

/// Minimum frame count: two difference operations need T >= 3.
inline constexpr std::size_t kMinFrames = 3;

/// Parses the keypoint JSON format `{"fps": n, "frames": [[[x, y, c], ...], ...]}`.
PoseSequence parse_pose_json(std::string_view content);

/// Serializes to the same format parse_pose_json reads (shortest round-trip doubles).
std::string serialize_pose_json(const PoseSequence& seq);

/// Replaces entries with confidence < threshold by linear interpolation between
/// the nearest valid frames of the same joint. Gaps touching the sequence ends
/// hold the nearest valid value. Repaired entries get confidence = threshold.
/// Throws InputError if some joint has no valid frame at all.
PoseSequence interpolate_low_confidence(const PoseSequence& seq, double threshold);

inline constexpr double kDefaultConfidenceThreshold = 0.3;
inline constexpr double kDefaultClipSeconds = 5.12;

struct ClipSpec {
  double duration = kDefaultClipSeconds;  // seconds
};

/// round(duration * fps); throws InputError when below kMinFrames.
std::size_t clip_frame_count(const ClipSpec& spec, double fps);

struct Segmentation {
  std::vector<PoseSequence> clips;
  std::size_t frames_per_clip = 0;
  std::size_t dropped_frames = 0;
};

/// Cuts consecutive non-overlapping clips from the start; the trailing
/// remainder shorter than one clip is dropped.
Segmentation segment_clips(const PoseSequence& seq, const ClipSpec& spec);

}  // namespace kinebeat
