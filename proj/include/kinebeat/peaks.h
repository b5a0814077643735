#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kinebeat {

/// Half-window in frames, round(window * rate / 2). Throws InputError when
/// window <= 0 or round(window * rate) < 1.
std::size_t peak_half_window(double window_seconds, double rate);

/// Indices t where values[t] is a windowed local maximum and exceeds `floor`.
///
/// A maximum is >= every value in [t - half, t + half] and strictly greater
/// than every earlier value in that range, so of a tied plateau only the
/// earliest element survives. Runs in O(n) with monotonic queues.
std::vector<std::size_t> windowed_maxima(std::span<const double> values, std::size_t half,
                                         double floor);

}  // namespace kinebeat
