#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fc/eval.hpp"
#include "fc/lang.hpp"
#include "fc/scenario.hpp"

namespace fc {

/// One activation of a device.
struct Event {
  std::uint64_t ordinal = 0;  // shared with the trace record
  DeviceId device = 0;
  double time = 0.0;          // local clock
  double global_time = 0.0;
  std::optional<Value> value;  // absent when the round failed
  std::string error;
  std::shared_ptr<const ValueTree> exported;
};

/// Events plus the neighbour relation between them. Event handles are
/// indices into `events`, which is in firing order.
struct EventStructure {
  std::vector<Event> events;
  std::vector<std::vector<std::size_t>> preds;
  std::map<DeviceId, std::vector<std::size_t>> by_device;

  std::size_t size() const { return events.size(); }
  std::size_t edge_count() const;
  /// The k-th (0-based) event of a device, if it happened.
  std::optional<std::size_t> nth_of(DeviceId device, std::size_t k) const;
};

bool is_acyclic(const EventStructure& es);
std::set<std::size_t> causal_past(const EventStructure& es, std::size_t e);
std::set<std::size_t> causal_future(const EventStructure& es, std::size_t e);
std::set<std::size_t> concurrent(const EventStructure& es, std::size_t e);

struct TraceRecord {
  enum class Kind { Fire, Env, Delivery };
  std::uint64_t ordinal = 0;
  Kind kind = Kind::Fire;
  DeviceId device = 0;
  double time = 0.0;
  std::string value;  // stable encoding, or "!error: ..." for failed rounds
  std::string note;   // env action name, or sender id for deliveries
};

struct SimulationTrace {
  std::vector<TraceRecord> records;
};

enum class TraceFormat { Text, Records };

std::string format_trace(const SimulationTrace& trace, TraceFormat format);
/// Events with their predecessor ordinals, one line each.
std::string format_events(const EventStructure& es);

class World {
 public:
  /// `program` must already be desugared. The config is normalized and validated.
  World(ScenarioConfig config, Program program);

  std::set<DeviceId> neighbours(DeviceId id) const;
  bool alive(DeviceId id) const;

  /// Processes the earliest pending action. Returns false once nothing is
  /// left before the stop time.
  bool step();
  void run();

  /// Fires a device immediately at the current clock.
  std::size_t fire(DeviceId id);

  double clock() const { return clock_; }
  const EventStructure& events() const { return events_; }
  const SimulationTrace& trace() const { return trace_; }
  const ScenarioConfig& config() const { return config_; }
  const std::optional<ValueTree>& last_export(DeviceId id) const;
  const std::map<DeviceId, std::set<DeviceId>>& links() const { return links_; }

  /// Optional hook, called after each successful round.
  std::function<void(const RoundContext&, const Export&)> on_round;

 private:
  struct Device {
    DeviceSpec spec;
    bool alive = true;
    std::uint64_t generation = 0;
    NeighbourExports mailbox;
    std::map<DeviceId, std::size_t> mailbox_event;
    std::optional<ValueTree> previous;
    double last_fire = -1.0;
    bool fired = false;
    bool fire_pending = false;
  };

  enum class ActionKind { Env = 0, Sensor = 1, Delivery = 2, Fire = 3 };

  struct Action {
    double time = 0.0;
    ActionKind kind = ActionKind::Fire;
    DeviceId device = 0;
    std::uint64_t seq = 0;
    std::uint64_t generation = 0;
    DeviceId sender = 0;
    std::size_t sender_event = 0;
    std::shared_ptr<const ValueTree> payload = nullptr;
    std::size_t env_index = 0;
  };

  struct Later {
    bool operator()(const Action& a, const Action& b) const;
  };

  void schedule(Action a);
  void schedule_fire(Device& d, double time);
  void request_wake(Device& d);
  void deliver(const Action& a);
  void apply_env(const EnvAction& a);
  void link(DeviceId a, DeviceId b);
  void unlink(DeviceId a, DeviceId b);
  void rebuild_disk_links(DeviceId id);
  double sample_delay(const Device& sender);
  double uniform();
  std::uint64_t record(TraceRecord::Kind kind, DeviceId device, double time, std::string value, std::string note);

  ScenarioConfig config_;
  Program program_;
  std::map<DeviceId, Device> devices_;
  std::map<DeviceId, std::set<DeviceId>> links_;
  std::priority_queue<Action, std::vector<Action>, Later> queue_;
  std::mt19937_64 rng_;
  double clock_ = 0.0;
  double stop_;
  std::uint64_t seq_ = 0;
  std::uint64_t ordinal_ = 0;
  EventStructure events_;
  SimulationTrace trace_;
};

struct RunResult {
  SimulationTrace trace;
  EventStructure events;
};

/// Parses `source`, substitutes the scenario constants and desugars.
/// Throws FcError on the first diagnostic.
Program compile(std::string_view source, const std::map<std::string, LocalValue, std::less<>>& constants);

/// Runs a desugared program on the scenario until its stop time.
RunResult run(const ScenarioConfig& config, const Program& core_program);

}  // namespace fc
