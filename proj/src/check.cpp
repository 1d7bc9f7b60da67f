#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "fc/builtins.hpp"
#include "fc/monitors.hpp"

namespace fc {

int Horizon::rounds(int diam, const ScenarioConfig& config) const {
  int h = diameter_factor * diam + offset;
  if (!plus_constant.empty()) {
    auto it = config.constants.find(plus_constant);
    if (it == config.constants.end()) throw CorpusError("horizon refers to missing constant " + plus_constant);
    h += static_cast<int>(it->second.as_number());
  }
  return h;
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw CorpusError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

const std::vector<std::string> kOracles = {
    "bfs",    "longest_chain", "lights_local", "stereo",    "evacuation", "global_all",   "global_any", "remote_lights",
    "remote_alert", "broadcast", "ellipse", "channel", "samevalue", "monitor", "width_bounds"};

}  // namespace

std::vector<std::string> oracle_names() { return kOracles; }

CorpusEntry load_entry(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.yaml";
  YAML::Node meta;
  try {
    meta = YAML::Load(read_file(meta_path));
  } catch (const YAML::Exception& e) {
    throw CorpusError(meta_path.string() + ": " + e.what());
  }
  CorpusEntry entry;
  try {
    entry.name = meta["name"].as<std::string>();
    entry.program_path = dir / meta["program"].as<std::string>();
    entry.scenario_path = dir / meta["scenario"].as<std::string>();
    entry.oracle = meta["oracle"].as<std::string>();
    if (const auto h = meta["horizon"]) {
      Horizon hz;
      hz.diameter_factor = h["diameter_factor"].as<int>(0);
      hz.offset = h["offset"].as<int>(0);
      hz.plus_constant = h["plus"].as<std::string>("");
      entry.horizon = hz;
    }
    for (const auto& d : meta["deviations"]) entry.deviations.push_back(d.as<std::string>());
    if (const auto x = meta["expected"]) {
      const auto v = x.as<std::string>();
      if (v != "pass" && v != "fail") throw CorpusError(dir.string() + ": expected must be pass or fail");
      entry.expected_pass = v == "pass";
    }
    if (const auto m = meta["mutation"]) {
      entry.mutation = Mutation{m["from"].as<std::string>(), m["to"].as<std::string>(), m["occurrence"].as<int>(1)};
    }
  } catch (const YAML::Exception& e) {
    throw CorpusError(meta_path.string() + ": " + e.what());
  }
  if (std::find(kOracles.begin(), kOracles.end(), entry.oracle) == kOracles.end()) {
    throw CorpusError(meta_path.string() + ": unknown oracle '" + entry.oracle + "'");
  }
  entry.source = read_file(entry.program_path);
  return entry;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> dirs;
  for (const auto& item : std::filesystem::directory_iterator(root)) {
    if (item.is_directory() && std::filesystem::exists(item.path() / "meta.yaml")) dirs.push_back(item.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<CorpusEntry> out;
  for (const auto& d : dirs) out.push_back(load_entry(d));
  return out;
}

std::string apply_mutation(const std::string& source, const Mutation& m) {
  const bool word_start = !m.from.empty() && ident_char(m.from.front());
  const bool word_end = !m.from.empty() && ident_char(m.from.back());
  int seen = 0;
  for (std::size_t pos = source.find(m.from); pos != std::string::npos; pos = source.find(m.from, pos + 1)) {
    const std::size_t end = pos + m.from.size();
    if (word_start && pos > 0 && ident_char(source[pos - 1])) continue;
    if (word_end && end < source.size() && ident_char(source[end])) continue;
    if (++seen == m.occurrence) return source.substr(0, pos) + m.to + source.substr(end);
  }
  throw CorpusError("mutation target '" + m.from + "' (occurrence " + std::to_string(m.occurrence) + ") not found");
}

// ---------------------------------------------------------------------------
// Checking

std::size_t CheckReport::mismatches() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.ok; }));
}

std::string CheckReport::format(const EventStructure& es) const {
  std::string out = "check\t" + name + '\t' + scenario + "\thorizon=" + (horizon < 0 ? "all" : std::to_string(horizon)) +
                    '\t' + (pass ? "PASS" : "FAIL") + "\tmismatches=" + std::to_string(mismatches()) + '/' +
                    std::to_string(rows.size()) + '\n';
  for (const auto& r : rows) {
    if (r.ok) continue;
    const Event& ev = es.events[r.event];
    out += "mismatch\t" + std::to_string(ev.ordinal) + '\t' + std::to_string(r.device) + "\tt=" +
           format_number(ev.time) + "\texpected=" + r.expected + "\tactual=" + r.actual + '\n';
  }
  if (first_divergence) {
    const Event& ev = es.events[first_divergence->event];
    out += "first-divergence\t" + std::to_string(ev.ordinal) + '\t' + std::to_string(first_divergence->device) +
           "\tt=" + format_number(ev.time) + "\texpected=" + first_divergence->expected +
           "\tactual=" + first_divergence->actual + '\n';
  }
  return out;
}

namespace {

struct CheckContext {
  const EventStructure& es;
  const ScenarioConfig& config;
  const Program& program;
  Graph graph;
  int horizon = -1;
  std::vector<CheckRow> rows;

  LocalValue sensor(std::string_view name, DeviceId d, double t) const {
    auto v = sensor_at(config, name, d, t);
    if (!v || is_field(*v)) return LocalValue::null();
    return as_local(*v);
  }

  double constant(const std::string& name) const {
    auto it = config.constants.find(name);
    if (it == config.constants.end()) throw CorpusError("scenario lacks constant " + name);
    return it->second.as_number();
  }

  std::string actual(std::size_t e) const {
    const Event& ev = es.events[e];
    return ev.value ? encode(*ev.value) : "!error: " + ev.error;
  }

  void add(DeviceId d, std::size_t e, const LocalValue& expected) {
    const Event& ev = es.events[e];
    const bool ok = ev.value && equal(*ev.value, Value(expected));
    rows.push_back({d, e, encode(expected), actual(e), ok});
  }

  /// The event at the horizon round of each device.
  std::map<DeviceId, std::size_t> horizon_events() const {
    std::map<DeviceId, std::size_t> out;
    for (const auto& d : config.devices) {
      auto e = es.nth_of(d.id, static_cast<std::size_t>(horizon));
      if (!e) {
        throw CorpusError("horizon " + std::to_string(horizon) + " exceeds the trace for device " +
                          std::to_string(d.id));
      }
      out[d.id] = *e;
    }
    return out;
  }

  std::set<DeviceId> holding(std::string_view sensor_name, const std::map<DeviceId, std::size_t>& at) const {
    std::set<DeviceId> out;
    for (const auto& [d, e] : at) {
      if (sensor(sensor_name, d, es.events[e].time) == LocalValue::boolean(true)) out.insert(d);
    }
    return out;
  }

  std::map<DeviceId, double> distances(std::string_view sensor_name, const std::map<DeviceId, std::size_t>& at) const {
    return oracle_bfs(graph, holding(sensor_name, at));
  }

  /// Devices reachable from `d`, including `d`.
  std::set<DeviceId> component(DeviceId d) const {
    std::set<DeviceId> seen{d};
    std::vector<DeviceId> stack{d};
    while (!stack.empty()) {
      const DeviceId u = stack.back();
      stack.pop_back();
      for (DeviceId v : graph.at(u)) {
        if (seen.insert(v).second) stack.push_back(v);
      }
    }
    return seen;
  }

  bool same_location(DeviceId a, DeviceId b) const { return config.device(a)->location == config.device(b)->location; }
};

bool is_true(const LocalValue& v) { return v == LocalValue::boolean(true); }
bool is_false(const LocalValue& v) { return v == LocalValue::boolean(false); }

// Each device's value at the horizon is the BFS distance to a source.
void check_bfs(CheckContext& c) {
  const auto at = c.horizon_events();
  const auto dist = c.distances("source", at);
  for (const auto& [d, e] : at) c.add(d, e, LocalValue::number(dist.at(d)));
}

void check_longest_chain(CheckContext& c) {
  const auto expected = oracle_longest_chain(c.es);
  for (std::size_t e = 0; e < c.es.size(); ++e) c.add(c.es.events[e].device, e, LocalValue::number(expected[e]));
}

/// Values a local-scope hood sees at event e: self plus same-location
/// predecessors, each read at the predecessor's own time.
template <typename F>
std::vector<LocalValue> local_view(const CheckContext& c, std::size_t e, F read) {
  const Event& ev = c.es.events[e];
  std::vector<LocalValue> out{read(ev.device, ev.time)};
  for (std::size_t p : c.es.preds[e]) {
    const Event& pe = c.es.events[p];
    if (c.same_location(pe.device, ev.device)) out.push_back(read(pe.device, pe.time));
  }
  return out;
}

void check_lights_local(CheckContext& c) {
  for (std::size_t e = 0; e < c.es.size(); ++e) {
    const Event& ev = c.es.events[e];
    const LocalValue lights = c.sensor("lights", ev.device, ev.time);
    bool verdict = true;
    if (!lights.is_null()) {
      const auto people = local_view(c, e, [&](DeviceId d, double t) { return c.sensor("people", d, t); });
      const bool someone = std::any_of(people.begin(), people.end(), is_true);
      verdict = lights == LocalValue::boolean(someone);
    }
    c.add(ev.device, e, LocalValue::boolean(verdict));
  }
}

void check_stereo(CheckContext& c) {
  const double threshold = c.constant("THRESHOLD");
  const double delay = c.constant("DELAY");
  for (const auto& [d, events] : c.es.by_device) {
    double rounds = 0.0;
    bool first = true;
    for (std::size_t e : events) {
      const Event& ev = c.es.events[e];
      const auto alerts = local_view(c, e, [&](DeviceId x, double t) { return c.sensor("alert", x, t); });
      const bool all_alert = std::none_of(alerts.begin(), alerts.end(), is_false);
      const LocalValue level = c.sensor("level", d, ev.time);
      const bool condition = all_alert || level.as_number() <= threshold;
      rounds = condition ? 0.0 : (first ? 0.0 : rounds) + 1.0;
      first = false;
      c.add(d, e, LocalValue::boolean(rounds < delay));
    }
  }
}

double unsigned_angle(Vec2 a, Vec2 b) {
  const double cosine = (a.x * b.x + a.y * b.y) / (std::hypot(a.x, a.y) * std::hypot(b.x, b.y));
  return std::acos(std::clamp(cosine, -1.0, 1.0)) * 180.0 / M_PI;
}

void check_evacuation(CheckContext& c) {
  const auto at = c.horizon_events();
  for (const auto& [d, e] : at) {
    const double t = c.es.events[e].time;
    const Vec2 p = c.config.device(d)->position;
    const Vec2 dir = to_vec2(c.sensor("direction", d, t));
    bool violation = false;
    for (DeviceId n : c.graph.at(d)) {
      const Vec2 q = c.config.device(n)->position;
      const Vec2 ndir = to_vec2(c.sensor("direction", n, t));
      const bool mine = unsigned_angle({q.x - p.x, q.y - p.y}, dir) < 60.0;
      const bool theirs = unsigned_angle({p.x - q.x, p.y - q.y}, ndir) < 60.0;
      violation = violation || (mine && theirs);
    }
    c.add(d, e, LocalValue::boolean(!violation));
  }
}

void check_global(CheckContext& c, bool all) {
  const auto at = c.horizon_events();
  for (DeviceId d : c.holding("source", at)) {
    bool acc = all;
    for (DeviceId x : c.component(d)) {
      const bool v = is_true(c.sensor("prop", x, c.es.events[at.at(x)].time));
      acc = all ? (acc && v) : (acc || v);
    }
    c.add(d, at.at(d), LocalValue::boolean(acc));
  }
}

void check_remote_lights(CheckContext& c) {
  const auto at = c.horizon_events();
  for (const auto& [d, e] : at) {
    const LocalValue lights = c.sensor("lights", d, c.es.events[e].time);
    bool verdict = true;
    if (!lights.is_null()) {
      bool someone = false;
      for (DeviceId x : c.component(d)) someone = someone || is_true(c.sensor("people", x, c.es.events[at.at(x)].time));
      verdict = lights == LocalValue::boolean(someone);
    }
    c.add(d, e, LocalValue::boolean(verdict));
  }
}

void check_remote_alert(CheckContext& c) {
  const double threshold = c.constant("THRESHOLD");
  const auto at = c.horizon_events();
  for (const auto& [d, e] : at) {
    const LocalValue level = c.sensor("level", d, c.es.events[e].time);
    bool verdict = true;
    if (level.as_number() != 0.0) {
      bool everyone = true;
      for (DeviceId x : c.component(d)) {
        everyone = everyone && !is_false(c.sensor("alert", x, c.es.events[at.at(x)].time));
      }
      verdict = everyone || level.as_number() <= threshold;
    }
    c.add(d, e, LocalValue::boolean(verdict));
  }
}

/// The source a device hears from: the nearest one, smallest id on ties.
std::optional<DeviceId> nearest_source(const CheckContext& c, DeviceId d, const std::set<DeviceId>& sources) {
  std::optional<DeviceId> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (DeviceId s : sources) {
    const double dist = oracle_bfs(c.graph, {s}).at(d);
    if (dist < best_dist) {
      best_dist = dist;
      best = s;
    }
  }
  return best;
}

void check_broadcast(CheckContext& c) {
  const auto at = c.horizon_events();
  const auto sources = c.holding("source", at);
  for (const auto& [d, e] : at) {
    if (auto s = nearest_source(c, d, sources)) c.add(d, e, LocalValue::device(*s));
  }
}

std::set<DeviceId> ellipse_of(const CheckContext& c, const std::map<DeviceId, std::size_t>& at) {
  const auto ds = c.distances("source", at);
  const auto dd = c.distances("dest", at);
  const auto dests = c.holding("dest", at);
  double d_sd = std::numeric_limits<double>::infinity();
  for (DeviceId x : dests) d_sd = std::min(d_sd, ds.at(x));
  return oracle_ellipse(ds, dd, d_sd, c.constant("WIDTH"));
}

void check_ellipse(CheckContext& c) {
  const auto at = c.horizon_events();
  const auto area = ellipse_of(c, at);
  for (const auto& [d, e] : at) c.add(d, e, LocalValue::boolean(area.count(d) > 0));
}

void check_channel(CheckContext& c) {
  const auto at = c.horizon_events();
  const auto area = ellipse_of(c, at);
  const auto sources = c.holding("source", at);
  for (const auto& [d, e] : at) {
    if (!area.count(d)) {
      c.add(d, e, LocalValue::device(d));
    } else if (auto s = nearest_source(c, d, sources)) {
      c.add(d, e, LocalValue::device(*s));
    }
  }
}

std::map<DeviceId, LocalValue> as_values(const std::map<DeviceId, double>& m) {
  std::map<DeviceId, LocalValue> out;
  for (const auto& [d, v] : m) out[d] = LocalValue::number(v);
  return out;
}

void check_samevalue(CheckContext& c) {
  const auto at = c.horizon_events();
  const auto values = as_values(c.distances("source", at));
  for (const auto& [d, e] : at) {
    c.add(d, e, LocalValue::number(static_cast<double>(oracle_same_value_component(c.graph, values, d))));
  }
}

LocalValue status_for(double w, double minw, double maxw) {
  if (w > maxw) return LocalValue::constructor("HIGH");
  if (w < minw) return LocalValue::constructor("LOW");
  return LocalValue::constructor("OK");
}

void check_monitor(CheckContext& c) {
  const auto at = c.horizon_events();
  const auto by_source = as_values(c.distances("source", at));
  const auto by_dest = as_values(c.distances("dest", at));
  const double minw = c.constant("MINW"), maxw = c.constant("MAXW");
  for (const auto& [d, e] : at) {
    const double w = static_cast<double>(std::min(oracle_same_value_component(c.graph, by_source, d),
                                                  oracle_same_value_component(c.graph, by_dest, d)));
    c.add(d, e, status_for(w, minw, maxw));
  }
}

bool has_prefix(const Path& path, const Path& prefix) {
  if (prefix.size() > path.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const auto &a = path[i], &b = prefix[i];
    if (a.kind != b.kind || a.index != b.index || a.then_branch != b.then_branch || a.function != b.function) {
      return false;
    }
  }
  return true;
}

// The adjusting channel keeps [area, width] in a rep owned by the channel
// itself; status values come from monitor() calls whose two samevalue()
// estimates are visible in the same export.
void check_width_bounds(CheckContext& c) {
  const std::set<std::string> helpers{"hopcount", "broadcast", "samevalue", "monitor", "elliptic_channel"};
  std::vector<Path> width_sites;
  for (const auto& [path, expr] : static_sites(c.program, [](const Expr& e) { return e.kind == ExprKind::Rep; })) {
    const bool in_helper = std::any_of(path.begin(), path.end(), [&](const PathStep& s) {
      return s.kind == PathStep::Kind::Frame && helpers.count(s.function);
    });
    if (!in_helper) width_sites.push_back(path);
  }
  auto calls_to = [&](const std::string& fn) {
    std::vector<Path> out;
    for (const auto& [path, expr] :
         static_sites(c.program, [&](const Expr& e) { return e.kind == ExprKind::Call && e.name == fn; })) {
      out.push_back(path);
    }
    return out;
  };
  const auto monitor_calls = calls_to("monitor");
  const auto samevalue_calls = calls_to("samevalue");
  const double minw = c.constant("MINW"), maxw = c.constant("MAXW");

  for (std::size_t e = 0; e < c.es.size(); ++e) {
    const Event& ev = c.es.events[e];
    CheckRow row{ev.device, e, "1 <= width <= " + format_number(maxw) + ", status consistent", "", true};
    if (!ev.exported) {
      row.ok = false;
      row.actual = c.actual(e);
      c.rows.push_back(row);
      continue;
    }
    std::string problems;
    for (const auto& p : width_sites) {
      auto v = vt_lookup(*ev.exported, p);
      if (!v || is_field(*v) || !as_local(*v).is_constructor("Tuple")) continue;
      const double width = as_local(*v).ctor_args().at(1).as_number();
      if (width < 1.0 || width > maxw) problems += "width=" + format_number(width) + " ";
    }
    for (const auto& m : monitor_calls) {
      auto status = vt_lookup(*ev.exported, m);
      if (!status) continue;
      std::vector<double> estimates;
      for (const auto& s : samevalue_calls) {
        if (!has_prefix(s, m)) continue;
        if (auto v = vt_lookup(*ev.exported, s)) estimates.push_back(as_local(*v).as_number());
      }
      if (estimates.size() != 2) {
        problems += "monitor without two estimates ";
        continue;
      }
      const auto expected = status_for(std::min(estimates[0], estimates[1]), minw, maxw);
      if (!equal(*status, Value(expected))) problems += "status=" + encode(*status) + " expected " + encode(expected) + " ";
    }
    row.ok = problems.empty();
    row.actual = row.ok ? row.expected : problems;
    c.rows.push_back(row);
  }
}

const std::map<std::string, std::function<void(CheckContext&)>>& checkers() {
  static const std::map<std::string, std::function<void(CheckContext&)>> table = {
      {"bfs", check_bfs},
      {"longest_chain", check_longest_chain},
      {"lights_local", check_lights_local},
      {"stereo", check_stereo},
      {"evacuation", check_evacuation},
      {"global_all", [](CheckContext& c) { check_global(c, true); }},
      {"global_any", [](CheckContext& c) { check_global(c, false); }},
      {"remote_lights", check_remote_lights},
      {"remote_alert", check_remote_alert},
      {"broadcast", check_broadcast},
      {"ellipse", check_ellipse},
      {"channel", check_channel},
      {"samevalue", check_samevalue},
      {"monitor", check_monitor},
      {"width_bounds", check_width_bounds},
  };
  return table;
}

}  // namespace

CheckReport check_stabilized(const SimulationTrace&, const EventStructure& es, const CorpusEntry& entry,
                             const ScenarioConfig& scenario, const Program& program) {
  CheckContext c{es, scenario, program, topology_of(scenario), -1, {}};
  if (entry.horizon) c.horizon = entry.horizon->rounds(diameter(c.graph), scenario);
  auto it = checkers().find(entry.oracle);
  if (it == checkers().end()) throw CorpusError("unknown oracle '" + entry.oracle + "'");
  it->second(c);

  CheckReport report;
  report.name = entry.name;
  report.scenario = entry.scenario_path.filename().string();
  report.horizon = c.horizon;
  report.rows = std::move(c.rows);
  report.pass = report.mismatches() == 0;
  for (const auto& r : report.rows) {
    if (r.ok) continue;
    if (!report.first_divergence || es.events[r.event].ordinal < report.first_divergence_ordinal) {
      report.first_divergence = r;
      report.first_divergence_ordinal = es.events[r.event].ordinal;
    }
  }
  return report;
}

std::optional<int> settled_round(const SimulationTrace& trace, const EventStructure& es, const CorpusEntry& entry,
                                 const ScenarioConfig& scenario, const Program& program) {
  if (!entry.horizon) {
    if (check_stabilized(trace, es, entry, scenario, program).pass) return 0;
    return std::nullopt;
  }
  std::size_t last = std::numeric_limits<std::size_t>::max();
  for (const auto& d : scenario.devices) {
    auto it = es.by_device.find(d.id);
    last = std::min(last, it == es.by_device.end() ? 0 : it->second.size());
  }
  if (last == 0) return std::nullopt;
  CorpusEntry probe = entry;
  std::optional<int> settled;
  for (int h = static_cast<int>(last) - 1; h >= 0; --h) {
    probe.horizon = Horizon{0, h, ""};
    if (!check_stabilized(trace, es, probe, scenario, program).pass) break;
    settled = h;
  }
  return settled;
}

}  // namespace fc
