#include "kinebeat/peaks.h"

#include <cmath>
#include <deque>
#include <limits>

#include "kinebeat/error.h"

namespace kinebeat {

namespace {

constexpr double kNone = -std::numeric_limits<double>::infinity();

// out[i] = max(values[i - width + 1 .. i]) clipped at 0; kNone when width == 0.
std::vector<double> trailing_max(std::span<const double> values, std::size_t width) {
  std::vector<double> out(values.size(), kNone);
  if (width == 0) return out;
  std::deque<std::size_t> q;  // indices with decreasing values
  for (std::size_t i = 0; i < values.size(); ++i) {
    while (!q.empty() && values[q.back()] <= values[i]) q.pop_back();
    q.push_back(i);
    if (q.front() + width <= i) q.pop_front();
    out[i] = values[q.front()];
  }
  return out;
}

}  // namespace

std::size_t peak_half_window(double window_seconds, double rate) {
  if (!(window_seconds > 0.0) || !std::isfinite(window_seconds)) {
    throw InputError("peak window must be positive");
  }
  if (std::round(window_seconds * rate) < 1.0) {
    throw InputError("peak window is shorter than one frame");
  }
  return static_cast<std::size_t>(std::round(window_seconds * rate / 2.0));
}

std::vector<std::size_t> windowed_maxima(std::span<const double> values, std::size_t half,
                                         double floor) {
  const std::size_t n = values.size();
  const std::vector<double> before = trailing_max(values, half);
  std::vector<double> reversed(values.rbegin(), values.rend());
  const std::vector<double> after_rev = trailing_max(reversed, half);

  std::vector<std::size_t> peaks;
  for (std::size_t t = 0; t < n; ++t) {
    const double v = values[t];
    if (!(v > floor)) continue;
    const double left = t > 0 ? before[t - 1] : kNone;
    // after_rev[n - 1 - (t + 1)] covers values[t + 1 .. t + half]
    const double right = t + 1 < n ? after_rev[n - 2 - t] : kNone;
    if (v > left && v >= right) peaks.push_back(t);
  }
  return peaks;
}

}  // namespace kinebeat
