#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fc/builtins.hpp"
#include "fc/context.hpp"
#include "fc/values.hpp"

namespace fc {

class ScenarioError : public FcError {
 public:
  using FcError::FcError;
};

enum class TopologyKind { Grid, UnitDisk, Edges };

struct TopologySpec {
  TopologyKind kind = TopologyKind::Edges;
  int width = 0;
  int height = 0;
  double spacing = 1.0;
  double radius = 1.0;
  std::vector<std::pair<DeviceId, DeviceId>> edges;
};

struct DeviceSpec {
  DeviceId id = 0;
  Vec2 position;
  LocationId location = "default";
  double period = 1.0;
  double offset = 0.0;
  double jitter = 0.0;  // each period is extended by U[0, jitter)
  bool reactive = false;
  double tmin = 0.0;
  double skew = 0.0;  // local clock offset
};

struct DelaySpec {
  enum class Kind { Fixed, Uniform };
  Kind kind = Kind::Fixed;
  double lo = 0.0;
  double hi = 0.0;
};

struct LinkSpec {
  /// Absent: fixed at 10% of the sender's period.
  std::optional<DelaySpec> delay;
  double loss = 0.0;
};

struct SensorSpec {
  std::optional<Value> fallback;
  std::map<DeviceId, SensorTimeline> timelines;
};

struct EnvAction {
  enum class Kind { AddEdge, RemoveEdge, Kill, Revive, Move };
  double time = 0.0;
  Kind kind = Kind::AddEdge;
  DeviceId a = 0;
  DeviceId b = 0;
  Vec2 position;
};

struct ScenarioConfig {
  std::optional<std::uint64_t> seed;
  TopologySpec topology;
  /// Sorted by id after `normalize`.
  std::vector<DeviceSpec> devices;
  LinkSpec link;
  std::optional<double> ttl;
  std::map<std::string, SensorSpec, std::less<>> sensors;
  std::map<std::string, LocalValue, std::less<>> constants;
  std::optional<int> rounds;
  std::optional<double> until;
  std::vector<EnvAction> env;
  /// Program path, resolved relative to the scenario file.
  std::string program;

  double max_period() const;
  /// Defaults to 2.5 times the largest period.
  double effective_ttl() const;
  /// Events strictly before this time are simulated.
  double stop_time() const;
  const DeviceSpec* device(DeviceId id) const;
};

/// Parses a YAML scenario. `base_dir` resolves a relative program path.
ScenarioConfig parse_scenario(const std::string& yaml_text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& file);

/// Fills devices implied by the topology and sorts them. Idempotent.
void normalize(ScenarioConfig& config);
/// Throws ScenarioError describing the first problem found.
void validate(const ScenarioConfig& config);

/// Parses a scalar such as `3`, `True`, `Null`, `Vec2(1, 0)`; anything else
/// becomes a String.
LocalValue parse_scalar(const std::string& text);

/// Grid device id for column x, row y (row-major).
inline DeviceId grid_id(int x, int y, int width) { return static_cast<DeviceId>(y) * width + x; }

}  // namespace fc
