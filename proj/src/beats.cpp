#include "kinebeat/beats.h"

#include <cmath>
#include <utility>

#include <json.hpp>

#include "kinebeat/error.h"

namespace kinebeat {

BeatList::BeatList(std::vector<double> times) : times_(std::move(times)) {
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || times_[i] < 0.0) {
      throw InputError("beat time " + std::to_string(i) + " is negative or non-finite");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw InputError("beat times must be strictly ascending (index " + std::to_string(i) + ")");
    }
  }
}

std::string serialize_beats_json(const BeatList& beats) {
  nlohmann::json doc = {{"beats_sec", std::vector<double>(beats.times().begin(), beats.times().end())}};
  return doc.dump();
}

BeatList parse_beats_json(std::string_view content) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed beats JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("beats_sec") || !doc["beats_sec"].is_array()) {
    throw InputError("beats file must be {\"beats_sec\": [...]}");
  }
  std::vector<double> times;
  for (const auto& t : doc["beats_sec"]) {
    if (!t.is_number()) throw InputError("beat times must be numbers");
    times.push_back(t.get<double>());
  }
  return BeatList(std::move(times));
}

}  // namespace kinebeat
