#include <doctest.h>

#include <random>
#include <string>

#include "kinebeat/error.h"
#include "kinebeat/pose.h"
#include "support/synthetic.h"

using namespace kinebeat;

namespace {

std::string pose_file(double fps, std::size_t frames, std::size_t joints) {
  std::string s = "{\"fps\": " + std::to_string(fps) + ", \"frames\": [";
  for (std::size_t t = 0; t < frames; ++t) {
    s += t ? ",[" : "[";
    for (std::size_t j = 0; j < joints; ++j) {
      s += j ? "," : "";
      s += "[" + std::to_string(t + j) + ", " + std::to_string(2.0 * t) + ", 0.9]";
    }
    s += "]";
  }
  return s + "]}";
}

}  // namespace

TEST_CASE("parse_pose_file reads the documented format") {
  const PoseSequence seq = parse_pose_json(pose_file(60, 308, 17));
  CHECK(seq.fps() == 60.0);
  CHECK(seq.frame_count() == 308);
  CHECK(seq.joint_count() == 17);
  CHECK(seq.at(5, 3).x == 8.0);
  CHECK(seq.at(5, 3).y == 10.0);
  CHECK(seq.at(5, 3).confidence == doctest::Approx(0.9));
}

TEST_CASE("parser accepts any T >= 3, clip length is not enforced here") {
  // 5.12 s at 60 fps is 307.2 frames; a 308-frame file is still valid input
  CHECK_NOTHROW(parse_pose_json(pose_file(60, 308, 2)));
  CHECK_NOTHROW(parse_pose_json(pose_file(60, 3, 1)));
  CHECK_THROWS_AS(parse_pose_json(pose_file(60, 2, 1)), InputError);
}

TEST_CASE("parser errors carry the frame index") {
  const std::string ragged =
      R"({"fps": 60, "frames": [[[0,0,1],[1,1,1]], [[0,0,1],[1,1,1]], [[0,0,1]], [[0,0,1],[1,1,1]]]})";
  try {
    parse_pose_json(ragged);
    FAIL("expected ragged error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()) == "ragged joints at frame 2");
  }

  CHECK_THROWS_WITH_AS(parse_pose_json("{\"fps\": 60, \"frames\": ["), doctest::Contains("malformed JSON"),
                       InputError);
  CHECK_THROWS_AS(parse_pose_json(R"({"fps": 60, "frames": [[[0,0,1]],[[0,NaN,1]],[[0,0,1]]]})"), InputError);
  CHECK_THROWS_WITH_AS(parse_pose_json(R"({"fps": 60, "frames": [[[0,0,1]],[[0,1e999,1]],[[0,0,1]]]})"),
                       doctest::Contains("malformed JSON"), InputError);
  CHECK_THROWS_WITH_AS(parse_pose_json(R"({"fps": 60, "frames": [[[0,0,1]],[[0,"y",1]],[[0,0,1]]]})"),
                       doctest::Contains("frame 1"), InputError);
  CHECK_THROWS_WITH_AS(parse_pose_json(R"({"fps": 60, "frames": [[[0,0,1]],[[0,0,1]],[[0,0,1.5]]]})"),
                       doctest::Contains("frame 2"), InputError);
  CHECK_THROWS_AS(parse_pose_json(R"({"fps": -1, "frames": [[[0,0,1]],[[0,0,1]],[[0,0,1]]]})"), InputError);
  CHECK_THROWS_AS(parse_pose_json(R"({"frames": []})"), InputError);
}

TEST_CASE("parse -> serialize -> parse is the identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    PoseSequence seq = synth::random_pose(rng, 3 + trial, 1 + trial % 5);
    std::vector<Keypoint> kps = seq.data();
    for (auto& kp : kps) kp.confidence = u(rng);
    seq = PoseSequence(29.97, seq.joint_count(), kps);
    const std::string once = serialize_pose_json(seq);
    const PoseSequence back = parse_pose_json(once);
    CHECK(back == seq);
    CHECK(serialize_pose_json(back) == once);
  }
}

TEST_CASE("interpolate_low_confidence") {
  std::vector<Keypoint> kps(8, Keypoint{0, 0, 0.9});
  SUBCASE("single dip is replaced by the midpoint") {
    kps[4] = {10, 0, 0.9};
    kps[5] = {99, 99, 0.1};
    kps[6] = {14, 0, 0.9};
    const auto out = interpolate_low_confidence(PoseSequence(60, 1, kps), 0.3);
    CHECK(out.at(5, 0).x == 12.0);
    CHECK(out.at(5, 0).y == 0.0);
    CHECK(out.at(5, 0).confidence == 0.3);
  }
  SUBCASE("threshold 0 leaves the input untouched") {
    kps[2].confidence = 0.0;
    const PoseSequence in(60, 1, kps);
    CHECK(interpolate_low_confidence(in, 0.0) == in);
  }
  SUBCASE("leading gap holds the first valid value") {
    for (int t = 0; t < 3; ++t) kps[t] = {1, 2, 0.05};
    kps[3] = {7, 7, 0.8};
    const auto out = interpolate_low_confidence(PoseSequence(60, 1, kps), 0.3);
    for (int t = 0; t < 3; ++t) {
      CHECK(out.at(t, 0).x == 7.0);
      CHECK(out.at(t, 0).y == 7.0);
    }
  }
  SUBCASE("trailing gap holds the last valid value") {
    kps[5] = {3, 4, 0.9};
    kps[6] = {0, 0, 0.0};
    kps[7] = {0, 0, 0.0};
    const auto out = interpolate_low_confidence(PoseSequence(60, 1, kps), 0.3);
    CHECK(out.at(7, 0).x == 3.0);
    CHECK(out.at(7, 0).y == 4.0);
  }
  SUBCASE("a joint with no valid frame is named in the error") {
    std::vector<Keypoint> two(6, Keypoint{0, 0, 0.9});
    for (int t = 0; t < 3; ++t) two[t * 2 + 1].confidence = 0.1;
    CHECK_THROWS_WITH_AS(interpolate_low_confidence(PoseSequence(60, 2, two), 0.3),
                         doctest::Contains("joint 1"), InputError);
  }
  SUBCASE("threshold outside [0,1] is rejected") {
    CHECK_THROWS_AS(interpolate_low_confidence(PoseSequence(60, 1, kps), 1.5), InputError);
  }
}

TEST_CASE("interpolate_low_confidence is idempotent") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    PoseSequence base = synth::random_pose(rng, 20, 3);
    std::vector<Keypoint> kps = base.data();
    for (auto& kp : kps) kp.confidence = u(rng);
    for (std::size_t j = 0; j < 3; ++j) kps[j].confidence = 1.0;  // every joint keeps a valid frame
    const PoseSequence seq(60, 3, kps);
    const double thr = u(rng);
    const auto once = interpolate_low_confidence(seq, thr);
    CHECK(interpolate_low_confidence(once, thr) == once);
  }
}

TEST_CASE("segment_clips") {
  std::mt19937_64 rng(3);
  SUBCASE("1000 frames at 60 fps give three 307-frame clips") {
    const auto seq = synth::random_pose(rng, 1000, 2);
    const auto seg = segment_clips(seq, ClipSpec{5.12});
    CHECK(seg.frames_per_clip == 307);
    CHECK(seg.clips.size() == 3);
    CHECK(seg.dropped_frames == 79);
    // clips tile a prefix of the input with no gap or overlap
    std::size_t t = 0;
    for (const auto& clip : seg.clips) {
      CHECK(clip.fps() == 60.0);
      for (std::size_t i = 0; i < clip.frame_count(); ++i, ++t) {
        CHECK(clip.at(i, 1) == seq.at(t, 1));
      }
    }
    CHECK(t == 921);
  }
  SUBCASE("exactly one clip") {
    const auto seg = segment_clips(synth::random_pose(rng, 307, 1), ClipSpec{});
    CHECK(seg.clips.size() == 1);
    CHECK(seg.dropped_frames == 0);
  }
  SUBCASE("one frame short of a clip") {
    const auto seg = segment_clips(synth::random_pose(rng, 306, 1), ClipSpec{});
    CHECK(seg.clips.empty());
    CHECK(seg.dropped_frames == 306);
  }
  SUBCASE("clip shorter than three frames is an error") {
    CHECK_THROWS_AS(segment_clips(synth::random_pose(rng, 50, 1), ClipSpec{0.02}), InputError);
    CHECK_THROWS_AS(segment_clips(synth::random_pose(rng, 50, 1), ClipSpec{0.0}), InputError);
  }
}
