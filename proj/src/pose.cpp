#include "kinebeat/pose.h"

#include <cmath>
#include <optional>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "kinebeat/error.h"

namespace kinebeat {

namespace {

std::string frame_msg(std::size_t frame, const std::string& what) {
  std::ostringstream os;
  os << what << " at frame " << frame;
  return os.str();
}

void validate_keypoint(const Keypoint& kp, std::size_t frame) {
  if (!std::isfinite(kp.x) || !std::isfinite(kp.y) || !std::isfinite(kp.confidence)) {
    throw InputError(frame_msg(frame, "non-finite keypoint value"));
  }
  if (kp.confidence < 0.0 || kp.confidence > 1.0) {
    throw InputError(frame_msg(frame, "confidence outside [0,1]"));
  }
}

}  // namespace

PoseSequence::PoseSequence(double fps, std::size_t joints, std::vector<Keypoint> frames_row_major)
    : fps_(fps), joints_(joints), data_(std::move(frames_row_major)) {
  if (!std::isfinite(fps_) || fps_ <= 0.0) {
    throw InputError("fps must be a positive finite number");
  }
  if (joints_ == 0) {
    throw InputError("pose sequence needs at least one joint");
  }
  if (data_.size() % joints_ != 0) {
    throw InputError("keypoint buffer size is not a multiple of the joint count");
  }
  if (frame_count() < kMinFrames) {
    throw InputError("pose sequence needs at least 3 frames, got " + std::to_string(frame_count()));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    validate_keypoint(data_[i], i / joints_);
  }
}

PoseSequence PoseSequence::from_frames(double fps, const std::vector<std::vector<Keypoint>>& frames) {
  if (frames.empty()) {
    throw InputError("pose sequence needs at least 3 frames, got 0");
  }
  const std::size_t joints = frames.front().size();
  std::vector<Keypoint> flat;
  flat.reserve(frames.size() * joints);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].size() != joints) {
      throw InputError(frame_msg(t, "ragged joints"));
    }
    flat.insert(flat.end(), frames[t].begin(), frames[t].end());
  }
  return PoseSequence(fps, joints, std::move(flat));
}

PoseSequence PoseSequence::slice(std::size_t first, std::size_t count) const {
  auto begin = data_.begin() + static_cast<std::ptrdiff_t>(first * joints_);
  std::vector<Keypoint> part(begin, begin + static_cast<std::ptrdiff_t>(count * joints_));
  return PoseSequence(fps_, joints_, std::move(part));
}

PoseSequence parse_pose_json(std::string_view content) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("fps") || !doc.contains("frames")) {
    throw InputError("keypoint file must be an object with \"fps\" and \"frames\"");
  }
  if (!doc["fps"].is_number()) {
    throw InputError("\"fps\" must be a number");
  }
  const double fps = doc["fps"].get<double>();
  const auto& frames_json = doc["frames"];
  if (!frames_json.is_array()) {
    throw InputError("\"frames\" must be an array");
  }

  std::vector<std::vector<Keypoint>> frames;
  frames.reserve(frames_json.size());
  std::optional<std::size_t> joints;
  for (std::size_t t = 0; t < frames_json.size(); ++t) {
    const auto& frame = frames_json[t];
    if (!frame.is_array()) {
      throw InputError(frame_msg(t, "frame is not an array"));
    }
    if (!joints) joints = frame.size();
    if (frame.size() != *joints) {
      throw InputError(frame_msg(t, "ragged joints"));
    }
    std::vector<Keypoint> row;
    row.reserve(frame.size());
    for (const auto& kp : frame) {
      if (!kp.is_array() || kp.size() != 3 || !kp[0].is_number() || !kp[1].is_number() ||
          !kp[2].is_number()) {
        throw InputError(frame_msg(t, "keypoint must be [x, y, confidence]"));
      }
      Keypoint p{kp[0].get<double>(), kp[1].get<double>(), kp[2].get<double>()};
      validate_keypoint(p, t);
      row.push_back(p);
    }
    frames.push_back(std::move(row));
  }
  return PoseSequence::from_frames(fps, frames);
}

std::string serialize_pose_json(const PoseSequence& seq) {
  nlohmann::json frames = nlohmann::json::array();
  for (std::size_t t = 0; t < seq.frame_count(); ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < seq.joint_count(); ++j) {
      const auto& kp = seq.at(t, j);
      row.push_back({kp.x, kp.y, kp.confidence});
    }
    frames.push_back(std::move(row));
  }
  nlohmann::json doc = {{"fps", seq.fps()}, {"frames", std::move(frames)}};
  return doc.dump();
}

PoseSequence interpolate_low_confidence(const PoseSequence& seq, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InputError("confidence threshold must be in [0,1]");
  }
  const std::size_t frames = seq.frame_count();
  const std::size_t joints = seq.joint_count();
  std::vector<Keypoint> out = seq.data();

  for (std::size_t j = 0; j < joints; ++j) {
    std::vector<std::size_t> valid;
    for (std::size_t t = 0; t < frames; ++t) {
      if (seq.at(t, j).confidence >= threshold) valid.push_back(t);
    }
    if (valid.empty()) {
      throw InputError("joint " + std::to_string(j) + " has no frame with confidence >= threshold");
    }
    if (valid.size() == frames) continue;

    std::size_t next = 0;  // index into `valid` of the first valid frame >= t
    for (std::size_t t = 0; t < frames; ++t) {
      while (next < valid.size() && valid[next] < t) ++next;
      if (next < valid.size() && valid[next] == t) continue;

      Keypoint& dst = out[t * joints + j];
      if (next == 0) {
        dst = seq.at(valid.front(), j);
      } else if (next == valid.size()) {
        dst = seq.at(valid.back(), j);
      } else {
        const std::size_t lo = valid[next - 1];
        const std::size_t hi = valid[next];
        const Keypoint& a = seq.at(lo, j);
        const Keypoint& b = seq.at(hi, j);
        const double w = static_cast<double>(t - lo) / static_cast<double>(hi - lo);
        dst.x = a.x + (b.x - a.x) * w;
        dst.y = a.y + (b.y - a.y) * w;
      }
      dst.confidence = threshold;
    }
  }
  return PoseSequence(seq.fps(), joints, std::move(out));
}

std::size_t clip_frame_count(const ClipSpec& spec, double fps) {
  if (!std::isfinite(spec.duration) || spec.duration <= 0.0) {
    throw InputError("clip duration must be positive");
  }
  const double frames = std::round(spec.duration * fps);
  if (frames < static_cast<double>(kMinFrames)) {
    throw InputError("clip would contain fewer than 3 frames");
  }
  return static_cast<std::size_t>(frames);
}

Segmentation segment_clips(const PoseSequence& seq, const ClipSpec& spec) {
  Segmentation seg;
  seg.frames_per_clip = clip_frame_count(spec, seq.fps());
  const std::size_t n = seq.frame_count() / seg.frames_per_clip;
  seg.clips.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    seg.clips.push_back(seq.slice(i * seg.frames_per_clip, seg.frames_per_clip));
  }
  seg.dropped_frames = seq.frame_count() - n * seg.frames_per_clip;
  return seg;
}

}  // namespace kinebeat
