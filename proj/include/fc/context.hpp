#pragma once

#include <map>
#include <optional>
#include <string>

#include "fc/values.hpp"

namespace fc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

using LocationId = std::string;

/// Everything a device perceives at the start of a round.
struct RoundContext {
  DeviceId self = 0;
  double time = 0.0;
  /// Sensor readings at `time` (sigma).
  std::map<std::string, Value, std::less<>> sensors;
  /// Latest exports received from neighbours (Theta). Never contains self.
  NeighbourExports neighbours;
  /// Own export from the previous round, if any.
  std::optional<ValueTree> previous;
  std::map<DeviceId, LocationId> location_of;
  std::map<DeviceId, Vec2> position_of;
  std::map<std::string, LocalValue, std::less<>> constants;
};

}  // namespace fc
