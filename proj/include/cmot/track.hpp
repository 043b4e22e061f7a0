#pragma once

#include <cstdint>
#include <string_view>

#include "cmot/core.hpp"
#include "cmot/gallery.hpp"
#include "cmot/kalman.hpp"

namespace cmot {

enum class TrackStatus { Tentative, Confirmed, Deleted };

inline std::string_view to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::Tentative: return "tentative";
    case TrackStatus::Confirmed: return "confirmed";
    case TrackStatus::Deleted: return "deleted";
  }
  return "unknown";
}

struct Track {
  std::uint64_t id = 0;
  StateDistribution state;
  int time_since_update = 0;  // frames since the last successful association
  int hits = 0;
  TrackStatus status = TrackStatus::Tentative;
  Gallery gallery;

  bool confirmed() const { return status == TrackStatus::Confirmed; }
  bool tentative() const { return status == TrackStatus::Tentative; }

  BoundingBox bbox() const { return xyah_to_bbox(MeasurementXYAH::from_vector(state.mean.head<4>())); }
};

}  // namespace cmot
