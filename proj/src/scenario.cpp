#include "fc/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace fc {

double ScenarioConfig::max_period() const {
  double m = 0.0;
  for (const auto& d : devices) m = std::max(m, d.period);
  return m > 0.0 ? m : 1.0;
}

double ScenarioConfig::effective_ttl() const { return ttl ? *ttl : 2.5 * max_period(); }

double ScenarioConfig::stop_time() const {
  if (until) return *until;
  if (rounds) return *rounds * max_period();
  return 0.0;
}

const DeviceSpec* ScenarioConfig::device(DeviceId id) const {
  for (const auto& d : devices) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

LocalValue parse_scalar(const std::string& text) {
  try {
    return decode_local(text);
  } catch (const FcError&) {
    return LocalValue::string(text);
  }
}

namespace {

[[noreturn]] void bad(const YAML::Node& node, const std::string& what) {
  std::ostringstream os;
  os << "scenario";
  if (node.Mark().line >= 0) os << " line " << node.Mark().line + 1;
  os << ": " << what;
  throw ScenarioError(os.str());
}

template <typename T>
T as(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    bad(node, "invalid value for " + what);
  }
}

Vec2 as_point(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence() || node.size() != 2) bad(node, what + " must be a pair [x, y]");
  return {as<double>(node[0], what), as<double>(node[1], what)};
}

void check_keys(const YAML::Node& node, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!node.IsMap()) bad(node, where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad(kv.first, "unknown key '" + key + "' in " + where);
    }
  }
}

void apply_device_fields(DeviceSpec& d, const YAML::Node& node) {
  if (node["position"]) d.position = as_point(node["position"], "position");
  if (node["location"]) d.location = as<std::string>(node["location"], "location");
  if (node["period"]) d.period = as<double>(node["period"], "period");
  if (node["offset"]) d.offset = as<double>(node["offset"], "offset");
  if (node["jitter"]) d.jitter = as<double>(node["jitter"], "jitter");
  if (node["reactive"]) d.reactive = as<bool>(node["reactive"], "reactive");
  if (node["tmin"]) d.tmin = as<double>(node["tmin"], "tmin");
  if (node["skew"]) d.skew = as<double>(node["skew"], "skew");
}

Value as_value(const YAML::Node& node) {
  if (node.IsNull()) return LocalValue::null();
  if (!node.IsScalar()) bad(node, "sensor values must be scalars");
  return parse_scalar(node.Scalar());
}

SensorTimeline as_timeline(const YAML::Node& node) {
  SensorTimeline tl;
  if (node.IsScalar() || node.IsNull()) {
    tl.set(-std::numeric_limits<double>::infinity(), as_value(node));
    return tl;
  }
  if (!node.IsSequence()) bad(node, "sensor timeline must be a value or a list of [time, value]");
  double last = -std::numeric_limits<double>::infinity();
  for (const auto& point : node) {
    if (!point.IsSequence() || point.size() != 2) bad(point, "timeline points are [time, value]");
    const double t = as<double>(point[0], "timeline time");
    if (!tl.points.empty() && t <= last) bad(point, "timeline times must strictly increase");
    last = t;
    tl.set(t, as_value(point[1]));
  }
  return tl;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

EnvAction::Kind env_kind(const YAML::Node& node) {
  const auto s = as<std::string>(node, "action");
  if (s == "add_edge") return EnvAction::Kind::AddEdge;
  if (s == "remove_edge") return EnvAction::Kind::RemoveEdge;
  if (s == "kill") return EnvAction::Kind::Kill;
  if (s == "revive") return EnvAction::Kind::Revive;
  if (s == "move") return EnvAction::Kind::Move;
  bad(node, "unknown env action '" + s + "'");
}

}  // namespace

void normalize(ScenarioConfig& config) {
  std::map<DeviceId, DeviceSpec> by_id;
  for (const auto& d : config.devices) by_id.emplace(d.id, d);
  const auto& topo = config.topology;
  if (topo.kind == TopologyKind::Grid) {
    for (int y = 0; y < topo.height; ++y) {
      for (int x = 0; x < topo.width; ++x) {
        const DeviceId id = grid_id(x, y, topo.width);
        auto [it, inserted] = by_id.try_emplace(id);
        it->second.id = id;
        if (inserted) it->second.position = {x * topo.spacing, y * topo.spacing};
      }
    }
  } else if (topo.kind == TopologyKind::Edges) {
    for (const auto& [a, b] : topo.edges) {
      for (DeviceId id : {a, b}) by_id.try_emplace(id).first->second.id = id;
    }
  }
  config.devices.clear();
  for (auto& [id, d] : by_id) config.devices.push_back(d);
}

void validate(const ScenarioConfig& config) {
  if (!config.seed) throw ScenarioError("scenario: seed is mandatory");
  if (!config.rounds && !config.until) throw ScenarioError("scenario: a stop condition (rounds or until) is required");
  if (config.rounds && *config.rounds < 0) throw ScenarioError("scenario: rounds must be non-negative");
  const auto& topo = config.topology;
  if (topo.kind == TopologyKind::Grid && (topo.width <= 0 || topo.height <= 0)) {
    throw ScenarioError("scenario: grid dimensions must be positive");
  }
  if (topo.kind == TopologyKind::UnitDisk && !(topo.radius > 0.0)) {
    throw ScenarioError("scenario: unit-disk radius must be positive");
  }
  std::set<DeviceId> ids;
  for (const auto& d : config.devices) {
    if (!ids.insert(d.id).second) throw ScenarioError("scenario: duplicate device " + std::to_string(d.id));
    if (!(d.period > 0.0)) throw ScenarioError("scenario: device " + std::to_string(d.id) + " needs a positive period");
    if (d.tmin < 0.0 || d.jitter < 0.0 || d.offset < 0.0) {
      throw ScenarioError("scenario: device " + std::to_string(d.id) + " has a negative tmin, jitter or offset");
    }
  }
  auto known = [&](DeviceId id, const std::string& where) {
    if (!ids.count(id)) throw ScenarioError("scenario: " + where + " references unknown device " + std::to_string(id));
  };
  for (const auto& [a, b] : topo.edges) {
    known(a, "edge");
    known(b, "edge");
  }
  if (!(config.effective_ttl() > 0.0)) throw ScenarioError("scenario: ttl must be positive");
  if (config.link.loss < 0.0 || config.link.loss > 1.0) throw ScenarioError("scenario: loss must be within [0, 1]");
  if (config.link.delay) {
    const auto& d = *config.link.delay;
    if (d.lo < 0.0 || d.hi < d.lo) throw ScenarioError("scenario: invalid delay interval");
  }
  for (const auto& [name, s] : config.sensors) {
    for (const auto& [id, tl] : s.timelines) known(id, "sensor '" + name + "'");
  }
  for (const auto& a : config.env) {
    known(a.a, "env action");
    if (a.kind == EnvAction::Kind::AddEdge || a.kind == EnvAction::Kind::RemoveEdge) known(a.b, "env action");
  }
}

ScenarioConfig parse_scenario(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(std::string("scenario: malformed YAML: ") + e.what());
  }
  check_keys(root,
             {"seed", "program", "topology", "defaults", "devices", "link", "ttl", "rounds", "until", "constants",
              "sensors", "env", "locations"},
             "scenario");

  ScenarioConfig config;
  if (root["seed"]) config.seed = as<std::uint64_t>(root["seed"], "seed");
  if (root["program"]) {
    std::filesystem::path p = as<std::string>(root["program"], "program");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    config.program = p.string();
  }
  if (root["ttl"]) config.ttl = as<double>(root["ttl"], "ttl");
  if (root["rounds"]) config.rounds = as<int>(root["rounds"], "rounds");
  if (root["until"]) config.until = as<double>(root["until"], "until");

  DeviceSpec defaults;
  if (const auto node = root["defaults"]) {
    check_keys(node, {"period", "offset", "jitter", "reactive", "tmin", "skew", "location"}, "defaults");
    apply_device_fields(defaults, node);
  }

  std::map<DeviceId, DeviceSpec> devices;
  auto device = [&](DeviceId id) -> DeviceSpec& {
    auto [it, inserted] = devices.try_emplace(id, defaults);
    it->second.id = id;
    return it->second;
  };

  const auto topo = root["topology"];
  if (!topo) bad(root, "missing topology");
  check_keys(topo, {"kind", "width", "height", "spacing", "radius", "positions", "random", "edges"}, "topology");
  const auto kind = as<std::string>(topo["kind"], "topology kind");
  if (kind == "grid") {
    config.topology.kind = TopologyKind::Grid;
    config.topology.width = as<int>(topo["width"], "grid width");
    config.topology.height = as<int>(topo["height"], "grid height");
    if (topo["spacing"]) config.topology.spacing = as<double>(topo["spacing"], "spacing");
    for (int y = 0; y < config.topology.height; ++y) {
      for (int x = 0; x < config.topology.width; ++x) {
        device(grid_id(x, y, config.topology.width)).position = {x * config.topology.spacing,
                                                                  y * config.topology.spacing};
      }
    }
  } else if (kind == "unit_disk") {
    config.topology.kind = TopologyKind::UnitDisk;
    config.topology.radius = as<double>(topo["radius"], "radius");
    if (const auto pos = topo["positions"]) {
      for (const auto& kv : pos) device(as<DeviceId>(kv.first, "device id")).position = as_point(kv.second, "position");
    }
    if (const auto rnd = topo["random"]) {
      check_keys(rnd, {"count", "width", "height"}, "random");
      if (!config.seed) bad(rnd, "random positions need a seed");
      std::mt19937_64 rng(*config.seed);
      const int count = as<int>(rnd["count"], "count");
      const double w = as<double>(rnd["width"], "width");
      const double h = as<double>(rnd["height"], "height");
      for (int i = 0; i < count; ++i) {
        const double x = unit_uniform(rng) * w;
        const double y = unit_uniform(rng) * h;
        device(i).position = {x, y};
      }
    }
  } else if (kind == "edges") {
    config.topology.kind = TopologyKind::Edges;
    for (const auto& e : topo["edges"]) {
      if (!e.IsSequence() || e.size() != 2) bad(e, "edges are pairs [a, b]");
      const auto a = as<DeviceId>(e[0], "edge endpoint");
      const auto b = as<DeviceId>(e[1], "edge endpoint");
      config.topology.edges.emplace_back(a, b);
      device(a);
      device(b);
    }
  } else {
    bad(topo["kind"], "unknown topology kind '" + kind + "'");
  }

  if (const auto list = root["devices"]) {
    if (!list.IsSequence()) bad(list, "devices must be a list");
    for (const auto& node : list) {
      check_keys(node, {"id", "position", "location", "period", "offset", "jitter", "reactive", "tmin", "skew"},
                 "device");
      if (!node["id"]) bad(node, "device entry without id");
      apply_device_fields(device(as<DeviceId>(node["id"], "device id")), node);
    }
  }
  if (const auto locs = root["locations"]; locs && locs.IsScalar()) {
    if (locs.Scalar() != "distinct") bad(locs, "locations must be 'distinct' or a mapping");
    for (auto& [id, d] : devices) d.location = "L" + std::to_string(id);
  } else if (locs) {
    for (const auto& kv : locs) {
      const auto loc = kv.first.as<std::string>();
      for (const auto& id : kv.second) device(as<DeviceId>(id, "device id")).location = loc;
    }
  }

  if (const auto link = root["link"]) {
    check_keys(link, {"delay", "loss"}, "link");
    if (const auto d = link["delay"]) {
      DelaySpec spec;
      if (d.IsScalar()) {
        spec.lo = spec.hi = as<double>(d, "delay");
      } else {
        check_keys(d, {"min", "max"}, "delay");
        spec.kind = DelaySpec::Kind::Uniform;
        spec.lo = as<double>(d["min"], "delay min");
        spec.hi = as<double>(d["max"], "delay max");
      }
      config.link.delay = spec;
    }
    if (link["loss"]) config.link.loss = as<double>(link["loss"], "loss");
  }

  if (const auto consts = root["constants"]) {
    for (const auto& kv : consts) {
      if (!kv.second.IsScalar()) bad(kv.second, "constants must be scalars");
      config.constants[kv.first.as<std::string>()] = parse_scalar(kv.second.Scalar());
    }
  }

  if (const auto sensors = root["sensors"]) {
    for (const auto& kv : sensors) {
      SensorSpec spec;
      const auto& body = kv.second;
      check_keys(body, {"default", "devices"}, "sensor");
      if (body["default"]) spec.fallback = as_value(body["default"]);
      if (const auto per = body["devices"]) {
        for (const auto& dv : per) spec.timelines[as<DeviceId>(dv.first, "device id")] = as_timeline(dv.second);
      }
      config.sensors[kv.first.as<std::string>()] = std::move(spec);
    }
  }

  if (const auto env = root["env"]) {
    for (const auto& node : env) {
      check_keys(node, {"time", "action", "a", "b", "device", "position"}, "env action");
      EnvAction a;
      a.time = as<double>(node["time"], "env time");
      a.kind = env_kind(node["action"]);
      if (node["device"]) a.a = as<DeviceId>(node["device"], "device");
      if (node["a"]) a.a = as<DeviceId>(node["a"], "a");
      if (node["b"]) a.b = as<DeviceId>(node["b"], "b");
      if (node["position"]) a.position = as_point(node["position"], "position");
      config.env.push_back(a);
    }
  }

  for (auto& [id, d] : devices) config.devices.push_back(d);
  normalize(config);
  validate(config);
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ScenarioError("cannot read scenario file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), file.parent_path());
}

}  // namespace fc
