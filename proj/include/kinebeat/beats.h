#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kinebeat {

/// Strictly ascending, nonnegative beat times in seconds.
class BeatList {
 public:
  BeatList() = default;
  /// Throws InputError unless `times` is finite, nonnegative and strictly increasing.
  explicit BeatList(std::vector<double> times);

  std::span<const double> times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

  bool operator==(const BeatList&) const = default;

 private:
  std::vector<double> times_;
};

/// `{"beats_sec": [t0, t1, ...]}`
std::string serialize_beats_json(const BeatList& beats);
BeatList parse_beats_json(std::string_view content);

}  // namespace kinebeat
