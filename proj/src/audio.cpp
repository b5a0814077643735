#include "kinebeat/audio.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

#include "kinebeat/error.h"
#include "kinebeat/peaks.h"

namespace kinebeat {

namespace {

// FFTW planning touches global state; execution with new-array functions does not.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

/// Real-to-complex transform of a fixed size with its own buffers.
class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(fftw_alloc_real(n)),
        out_(fftw_alloc_complex(n / 2 + 1)) {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }
  std::size_t bins() const { return n_ / 2 + 1; }

  void execute() { fftw_execute(plan_); }
  double magnitude(std::size_t k) const { return std::hypot(out_.get()[k][0], out_.get()[k][1]); }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_;
};

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

// Linear interpolation of a sampled function at a fractional index.
double sample_at(const std::vector<double>& f, double x) {
  const auto i = static_cast<std::size_t>(x);
  const double frac = x - static_cast<double>(i);
  if (i + 1 >= f.size()) return f.back();
  return f[i] + frac * (f[i + 1] - f[i]);
}

}  // namespace

OnsetEnvelope onset_envelope(const AudioClip& clip, const OnsetConfig& config) {
  if (config.hop < 1 || config.window < config.hop) {
    throw InputError("onset analysis needs window >= hop >= 1");
  }
  if (clip.sample_rate <= 0) throw InputError("sample rate must be positive");
  const std::size_t n = clip.samples.size();
  const std::size_t frames = 1 + n / config.hop;
  if (frames < 2) throw InputError("clip too short for two analysis frames");

  const std::size_t win = config.window;
  const auto half = static_cast<std::ptrdiff_t>(win / 2);
  const std::vector<double> taper = hann(win);
  RealFft fft(win);

  OnsetEnvelope env;
  env.frame_rate = static_cast<double>(clip.sample_rate) / static_cast<double>(config.hop);
  env.values.assign(frames, 0.0);

  std::vector<double> prev(fft.bins(), 0.0);
  std::vector<double> cur(fft.bins(), 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(t * config.hop) - half;
    double* buf = fft.input();
    for (std::size_t i = 0; i < win; ++i) {
      const std::ptrdiff_t s = start + static_cast<std::ptrdiff_t>(i);
      const double x = (s >= 0 && s < static_cast<std::ptrdiff_t>(n)) ? clip.samples[static_cast<std::size_t>(s)] : 0.0;
      buf[i] = x * taper[i];
    }
    fft.execute();
    for (std::size_t k = 0; k < fft.bins(); ++k) cur[k] = std::log1p(10.0 * fft.magnitude(k));
    if (t > 0) {
      double flux = 0.0;
      for (std::size_t k = 0; k < fft.bins(); ++k) flux += std::max(0.0, cur[k] - prev[k]);
      env.values[t] = flux;
    }
    std::swap(prev, cur);
  }
  return env;
}

BeatList pick_beats(const OnsetEnvelope& env, const BeatPickConfig& config) {
  if (!(config.delta >= 0.0)) throw InputError("delta must be nonnegative");
  const std::size_t half = peak_half_window(config.window_seconds, env.frame_rate);
  const auto& v = env.values;
  const std::size_t n = v.size();
  if (n == 0) return BeatList{};

  const double mean_all = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double x : v) var += (x - mean_all) * (x - mean_all);
  const double stdev = std::sqrt(var / static_cast<double>(n));

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];

  std::vector<double> times;
  for (std::size_t t : windowed_maxima(v, half, 0.0)) {
    const std::size_t lo = t > half ? t - half : 0;
    const std::size_t hi = std::min(n - 1, t + half);
    const double local_mean = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    if (v[t] >= local_mean + config.delta * stdev) {
      times.push_back(static_cast<double>(t) / env.frame_rate);
    }
  }
  return BeatList(std::move(times));
}

// Lag scoring. With e the mean-removed envelope and
// ac[L] = sum_t e[t] e[t + L], a candidate period of p frames scores
//   sum_{m >= 1, m p <= N - 1} ac(m p)
// where ac is linearly interpolated between integer lags. Summing the
// multiples resolves the period below one frame and favours the
// fundamental over its multiples and fractions: a wrong half period picks
// up negative autocorrelation at the odd multiples. Candidates run from the
// shortest to the longest lag in steps of 0.01 frames; ties keep the
// longer lag.
TempoEstimate estimate_tempo(const OnsetEnvelope& env, const TempoRange& range) {
  if (!(range.bpm_min > 0.0) || !(range.bpm_min < range.bpm_max)) {
    throw InputError("tempo range needs 0 < bpm_min < bpm_max");
  }
  if (!(env.frame_rate > 0.0)) throw InputError("envelope frame rate must be positive");
  const std::size_t n = env.values.size();
  const double lag_min = 60.0 * env.frame_rate / range.bpm_max;
  const double lag_max = 60.0 * env.frame_rate / range.bpm_min;
  if (n < 2 || lag_max > static_cast<double>(n - 1)) {
    throw InputError("envelope too short for the longest tempo lag");
  }

  const double mean = std::accumulate(env.values.begin(), env.values.end(), 0.0) / static_cast<double>(n);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = env.values[i] - mean;
  std::vector<double> ac(n, 0.0);
  for (std::size_t lag = 0; lag < n; ++lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += e[t] * e[t + lag];
    ac[lag] = s;
  }
  if (!(ac[0] > 0.0)) throw ComputeError("no periodicity: onset envelope is constant");

  constexpr double kLagStep = 0.01;
  const double last = static_cast<double>(n - 1);
  const auto steps = static_cast<std::size_t>(std::floor((lag_max - lag_min) / kLagStep + 1e-9));
  double best_score = -std::numeric_limits<double>::infinity();
  double best_lag = lag_min;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double lag = lag_min + static_cast<double>(i) * kLagStep;
    double score = 0.0;
    for (std::size_t m = 1; static_cast<double>(m) * lag <= last; ++m) {
      score += sample_at(ac, static_cast<double>(m) * lag);
    }
    if (score >= best_score) {
      best_score = score;
      best_lag = lag;
    }
  }
  if (!(best_score > 0.0)) throw ComputeError("no periodicity above threshold in tempo range");
  return TempoEstimate{60.0 * env.frame_rate / best_lag};
}

BeatList beats_from_rhythm(const RhythmSequence& r) {
  std::vector<double> times;
  for (std::size_t t = 0; t < r.bits.size(); ++t) {
    if (r.bits[t]) times.push_back(static_cast<double>(t) / r.fps);
  }
  return BeatList(std::move(times));
}

}  // namespace kinebeat
