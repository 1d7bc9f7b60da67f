#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fc/netsim.hpp"
#include "fc/scenario.hpp"

namespace fc {

/// Undirected adjacency, self excluded.
using Graph = std::map<DeviceId, std::set<DeviceId>>;

/// The static topology a scenario describes, built without the simulator.
Graph topology_of(const ScenarioConfig& config);
/// Largest finite hop distance between two devices.
int diameter(const Graph& g);

// Oracles ------------------------------------------------------------------

/// Hop distances to the nearest source, +inf when unreachable.
std::map<DeviceId, double> oracle_bfs(const Graph& g, const std::set<DeviceId>& sources);

/// 1 + the maximum over the neighbour predecessors of each event, 1 for
/// events without predecessors. Throws on a cycle.
std::vector<double> oracle_longest_chain(const EventStructure& es);

/// Size of the connected component of `id` among devices holding its value.
std::size_t oracle_same_value_component(const Graph& g, const std::map<DeviceId, LocalValue>& values, DeviceId id);

std::set<DeviceId> oracle_ellipse(const std::map<DeviceId, double>& d_source, const std::map<DeviceId, double>& d_dest,
                                  double d_source_dest, double width);

/// Sensor value at a device and time, as the simulator would read it.
std::optional<Value> sensor_at(const ScenarioConfig& config, std::string_view name, DeviceId device, double time);

// Corpus -------------------------------------------------------------------

struct Horizon {
  int diameter_factor = 0;
  int offset = 0;
  std::string plus_constant;  // added when non-empty, read from the scenario constants

  int rounds(int diam, const ScenarioConfig& config) const;
};

struct Mutation {
  std::string from;
  std::string to;
  int occurrence = 1;  // 1-based
};

struct CorpusEntry {
  std::string name;
  std::filesystem::path program_path;
  std::filesystem::path scenario_path;
  std::string source;
  std::string oracle;
  /// Absent when the oracle checks every event rather than one round.
  std::optional<Horizon> horizon;
  std::vector<std::string> deviations;
  std::optional<Mutation> mutation;
  /// False for transcriptions known not to meet their oracle.
  bool expected_pass = true;
};

class CorpusError : public FcError {
 public:
  using FcError::FcError;
};

/// Reads `<dir>/meta.yaml` and the files it names.
CorpusEntry load_entry(const std::filesystem::path& dir);
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& root);
/// Replaces the chosen occurrence of `m.from`; throws if it does not exist.
std::string apply_mutation(const std::string& source, const Mutation& m);

std::vector<std::string> oracle_names();

// Checking -----------------------------------------------------------------

struct CheckRow {
  DeviceId device = 0;
  std::size_t event = 0;  // index into the event structure
  std::string expected;
  std::string actual;
  bool ok = false;
};

struct CheckReport {
  std::string name;
  std::string scenario;
  int horizon = -1;  // -1 when every event is checked
  std::vector<CheckRow> rows;
  bool pass = false;
  std::optional<CheckRow> first_divergence;
  std::uint64_t first_divergence_ordinal = 0;

  std::size_t mismatches() const;
  std::string format(const EventStructure& es) const;
};

/// Applies the entry's oracle to a finished run. Throws CorpusError when the
/// horizon lies beyond the trace.
CheckReport check_stabilized(const SimulationTrace& trace, const EventStructure& es, const CorpusEntry& entry,
                             const ScenarioConfig& scenario, const Program& program);

/// Earliest round from which the entry's oracle holds at every later round
/// of the trace; nullopt when it fails at the last one. Entries without a
/// horizon are checked once over all events, giving 0 or nullopt.
std::optional<int> settled_round(const SimulationTrace& trace, const EventStructure& es, const CorpusEntry& entry,
                                 const ScenarioConfig& scenario, const Program& program);

}  // namespace fc
