#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kinebeat/beats.h"
#include "kinebeat/rhythm.h"

namespace kinebeat {

/// Mono audio in [-1, 1].
struct AudioClip {
  int sample_rate = 0;
  std::vector<double> samples;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Decodes RIFF/WAVE: PCM 16-bit or IEEE float 32-bit (also inside
/// WAVE_FORMAT_EXTENSIBLE), 1 or 2 channels. Stereo is averaged to mono,
/// 16-bit samples are divided by 32768.
AudioClip read_wav(std::span<const std::uint8_t> bytes);
AudioClip read_wav_file(const std::string& path);

enum class WavEncoding { kPcm16, kFloat32 };

/// Mono WAV encoder, mainly for fixtures. PCM16 rounds and clips.
std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding encoding = WavEncoding::kPcm16);

struct OnsetConfig {
  std::size_t window = 1024;  // samples
  std::size_t hop = 256;      // samples
};

struct OnsetEnvelope {
  double frame_rate = 0.0;  // sample_rate / hop
  std::vector<double> values;
};

/// Spectral-flux onset strength.
///
/// Frames are centred: frame t covers samples [t*hop - window/2,
/// t*hop + window/2) with zero padding outside the clip, so frame t sits at
/// time t / frame_rate and there are 1 + N / hop frames. Each frame is Hann
/// windowed, its magnitude spectrum compressed as log(1 + 10|X|), and the
/// envelope is the sum over bins of the positive frame-to-frame increase.
/// Frame 0 has flux 0.
OnsetEnvelope onset_envelope(const AudioClip& clip, const OnsetConfig& config = {});

struct BeatPickConfig {
  double window_seconds = 0.3;
  double delta = 0.1;
};

/// Frame t is a beat when it is the windowed maximum over +-window/2
/// (earliest of a plateau), positive, and at least
/// mean(window) + delta * std(whole envelope).
BeatList pick_beats(const OnsetEnvelope& env, const BeatPickConfig& config = {});

struct TempoRange {
  double bpm_min = 60.0;
  double bpm_max = 180.0;
};

struct TempoEstimate {
  double bpm = 0.0;
};

/// Autocorrelation tempo estimate; see audio.cpp for the lag scoring.
/// Throws InputError for a bad range or an envelope shorter than the longest
/// lag, ComputeError when the envelope has no periodicity.
TempoEstimate estimate_tempo(const OnsetEnvelope& env, const TempoRange& range = {});

/// Kinematic beats as times index / fps.
BeatList beats_from_rhythm(const RhythmSequence& r);

}  // namespace kinebeat
