#include "fc/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace fc {

// ---------------------------------------------------------------------------
// Event structure

std::size_t EventStructure::edge_count() const {
  std::size_t n = 0;
  for (const auto& p : preds) n += p.size();
  return n;
}

std::optional<std::size_t> EventStructure::nth_of(DeviceId device, std::size_t k) const {
  auto it = by_device.find(device);
  if (it == by_device.end() || k >= it->second.size()) return std::nullopt;
  return it->second[k];
}

namespace {

std::vector<std::vector<std::size_t>> successors(const EventStructure& es) {
  std::vector<std::vector<std::size_t>> succ(es.size());
  for (std::size_t e = 0; e < es.size(); ++e) {
    for (std::size_t p : es.preds[e]) succ[p].push_back(e);
  }
  return succ;
}

std::set<std::size_t> reach(const std::vector<std::vector<std::size_t>>& adj, std::size_t from) {
  std::set<std::size_t> seen;
  std::vector<std::size_t> stack{from};
  while (!stack.empty()) {
    const std::size_t e = stack.back();
    stack.pop_back();
    for (std::size_t n : adj[e]) {
      if (seen.insert(n).second) stack.push_back(n);
    }
  }
  seen.erase(from);
  return seen;
}

void check_event(const EventStructure& es, std::size_t e) {
  if (e >= es.size()) throw FcError("unknown event " + std::to_string(e));
}

}  // namespace

bool is_acyclic(const EventStructure& es) {
  std::vector<std::size_t> indegree(es.size(), 0);
  const auto succ = successors(es);
  for (std::size_t e = 0; e < es.size(); ++e) indegree[e] = es.preds[e].size();
  std::vector<std::size_t> ready;
  for (std::size_t e = 0; e < es.size(); ++e) {
    if (indegree[e] == 0) ready.push_back(e);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const std::size_t e = ready.back();
    ready.pop_back();
    ++visited;
    for (std::size_t n : succ[e]) {
      if (--indegree[n] == 0) ready.push_back(n);
    }
  }
  return visited == es.size();
}

std::set<std::size_t> causal_past(const EventStructure& es, std::size_t e) {
  check_event(es, e);
  return reach(es.preds, e);
}

std::set<std::size_t> causal_future(const EventStructure& es, std::size_t e) {
  check_event(es, e);
  return reach(successors(es), e);
}

std::set<std::size_t> concurrent(const EventStructure& es, std::size_t e) {
  const auto past = causal_past(es, e);
  const auto future = causal_future(es, e);
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (i != e && !past.count(i) && !future.count(i)) out.insert(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace output

namespace {

const char* kind_name(TraceRecord::Kind k) {
  switch (k) {
    case TraceRecord::Kind::Fire: return "fire";
    case TraceRecord::Kind::Env: return "env";
    case TraceRecord::Kind::Delivery: return "delivery";
  }
  return "?";
}

}  // namespace

std::string format_trace(const SimulationTrace& trace, TraceFormat format) {
  std::string out;
  for (const auto& r : trace.records) {
    if (format == TraceFormat::Records) {
      out += std::to_string(r.ordinal) + '\t' + kind_name(r.kind) + '\t' + std::to_string(r.device) + '\t' +
             format_number(r.time) + '\t' + r.value;
      if (!r.note.empty()) out += '\t' + r.note;
    } else {
      out += '[' + std::to_string(r.ordinal) + "] t=" + format_number(r.time) + ' ' + kind_name(r.kind) +
             " device " + std::to_string(r.device);
      if (!r.note.empty()) out += " (" + r.note + ')';
      if (!r.value.empty()) out += ": " + r.value;
    }
    out += '\n';
  }
  return out;
}

std::string format_events(const EventStructure& es) {
  std::string out;
  for (std::size_t e = 0; e < es.size(); ++e) {
    const Event& ev = es.events[e];
    out += "event\t" + std::to_string(ev.ordinal) + '\t' + std::to_string(ev.device) + '\t' +
           format_number(ev.time) + '\t' + (ev.value ? encode(*ev.value) : "!error: " + ev.error) + "\tpreds=";
    for (std::size_t i = 0; i < es.preds[e].size(); ++i) {
      if (i) out += ',';
      out += std::to_string(es.events[es.preds[e][i]].ordinal);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// World

bool World::Later::operator()(const Action& a, const Action& b) const {
  return std::tie(a.time, a.kind, a.device, a.seq) > std::tie(b.time, b.kind, b.device, b.seq);
}

World::World(ScenarioConfig config, Program program)
    : config_(std::move(config)), program_(std::move(program)) {
  normalize(config_);
  validate(config_);
  rng_.seed(*config_.seed);
  stop_ = config_.stop_time();

  for (const auto& spec : config_.devices) {
    Device d;
    d.spec = spec;
    devices_.emplace(spec.id, std::move(d));
    links_[spec.id];
  }

  const auto& topo = config_.topology;
  switch (topo.kind) {
    case TopologyKind::Grid:
      for (int y = 0; y < topo.height; ++y) {
        for (int x = 0; x < topo.width; ++x) {
          if (x + 1 < topo.width) link(grid_id(x, y, topo.width), grid_id(x + 1, y, topo.width));
          if (y + 1 < topo.height) link(grid_id(x, y, topo.width), grid_id(x, y + 1, topo.width));
        }
      }
      break;
    case TopologyKind::UnitDisk:
      for (auto& [id, d] : devices_) rebuild_disk_links(id);
      break;
    case TopologyKind::Edges:
      for (const auto& [a, b] : topo.edges) {
        if (a != b) link(a, b);
      }
      break;
  }

  for (auto& [id, d] : devices_) schedule_fire(d, d.spec.offset);
  for (std::size_t i = 0; i < config_.env.size(); ++i) {
    Action a{config_.env[i].time, ActionKind::Env, config_.env[i].a, 0};
    a.env_index = i;
    schedule(std::move(a));
  }
  for (const auto& [name, sensor] : config_.sensors) {
    for (const auto& [id, timeline] : sensor.timelines) {
      for (const auto& [t, v] : timeline.points) {
        if (std::isfinite(t) && t >= 0.0) schedule(Action{t, ActionKind::Sensor, id, 0});
      }
    }
  }
}

void World::link(DeviceId a, DeviceId b) {
  links_[a].insert(b);
  links_[b].insert(a);
}

void World::unlink(DeviceId a, DeviceId b) {
  links_[a].erase(b);
  links_[b].erase(a);
}

void World::rebuild_disk_links(DeviceId id) {
  for (DeviceId other : std::set<DeviceId>(links_[id])) unlink(id, other);
  const Vec2 p = devices_.at(id).spec.position;
  const double r = config_.topology.radius;
  for (const auto& [other, d] : devices_) {
    if (other == id) continue;
    const double dx = d.spec.position.x - p.x;
    const double dy = d.spec.position.y - p.y;
    if (dx * dx + dy * dy <= r * r) link(id, other);
  }
}

std::set<DeviceId> World::neighbours(DeviceId id) const {
  auto it = links_.find(id);
  if (it == links_.end()) throw FcError("unknown device " + std::to_string(id));
  std::set<DeviceId> out;
  for (DeviceId n : it->second) {
    if (devices_.at(n).alive) out.insert(n);
  }
  return out;
}

bool World::alive(DeviceId id) const {
  auto it = devices_.find(id);
  return it != devices_.end() && it->second.alive;
}

const std::optional<ValueTree>& World::last_export(DeviceId id) const { return devices_.at(id).previous; }

void World::schedule(Action a) {
  a.seq = seq_++;
  queue_.push(std::move(a));
}

void World::schedule_fire(Device& d, double time) {
  Action a{time, ActionKind::Fire, d.spec.id, 0};
  a.generation = d.generation;
  d.fire_pending = true;
  schedule(std::move(a));
}

void World::request_wake(Device& d) {
  if (!d.alive || !d.spec.reactive || d.fire_pending) return;
  double t = clock_;
  if (d.fired) {
    t = std::max(t, d.last_fire + d.spec.tmin);
    if (t <= d.last_fire) t = std::nextafter(d.last_fire, INFINITY);
  }
  schedule_fire(d, t);
}

double World::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

double World::sample_delay(const Device& sender) {
  if (!config_.link.delay) return 0.1 * sender.spec.period;
  const auto& d = *config_.link.delay;
  if (d.kind == DelaySpec::Kind::Fixed) return d.lo;
  return d.lo + (d.hi - d.lo) * uniform();
}

std::uint64_t World::record(TraceRecord::Kind kind, DeviceId device, double time, std::string value,
                            std::string note) {
  TraceRecord r;
  r.ordinal = ordinal_++;
  r.kind = kind;
  r.device = device;
  r.time = time;
  r.value = std::move(value);
  r.note = std::move(note);
  trace_.records.push_back(std::move(r));
  return trace_.records.back().ordinal;
}

std::size_t World::fire(DeviceId id) {
  Device& d = devices_.at(id);
  const double ttl = config_.effective_ttl();
  for (auto it = d.mailbox.begin(); it != d.mailbox.end();) {
    if (clock_ - it->second.received_at > ttl) {
      d.mailbox_event.erase(it->first);
      it = d.mailbox.erase(it);
    } else {
      ++it;
    }
  }

  RoundContext ctx;
  ctx.self = id;
  ctx.time = clock_ + d.spec.skew;
  for (const auto& [name, sensor] : config_.sensors) {
    std::optional<Value> v;
    if (auto tl = sensor.timelines.find(id); tl != sensor.timelines.end()) v = tl->second.at(ctx.time);
    if (!v) v = sensor.fallback;
    if (v) ctx.sensors.emplace(name, std::move(*v));
  }
  ctx.neighbours = d.mailbox;
  ctx.previous = d.previous;
  for (const auto& [other, od] : devices_) ctx.location_of.emplace(other, od.spec.location);
  ctx.position_of.emplace(id, d.spec.position);
  const auto nbrs = neighbours(id);
  for (DeviceId n : nbrs) ctx.position_of.emplace(n, devices_.at(n).spec.position);
  ctx.constants = config_.constants;

  Event ev;
  ev.device = id;
  ev.time = ctx.time;
  ev.global_time = clock_;
  std::optional<Export> out;
  try {
    out = eval_round(program_, ctx);
    ev.value = out->root_value;
  } catch (const FcError& e) {
    ev.error = e.what();
  }
  ev.ordinal = record(TraceRecord::Kind::Fire, id, ctx.time, ev.value ? encode(*ev.value) : "!error: " + ev.error, "");

  std::vector<std::size_t> preds;
  for (const auto& [sender, idx] : d.mailbox_event) preds.push_back(idx);
  std::sort(preds.begin(), preds.end());
  const std::size_t index = events_.events.size();
  events_.events.push_back(std::move(ev));
  events_.preds.push_back(std::move(preds));
  events_.by_device[id].push_back(index);

  d.fired = true;
  d.last_fire = clock_;
  d.fire_pending = false;

  if (out) {
    d.previous = out->tree;
    if (on_round) on_round(ctx, *out);
    auto payload = std::make_shared<const ValueTree>(std::move(out->tree));
    events_.events[index].exported = payload;
    for (DeviceId n : nbrs) {
      if (config_.link.loss > 0.0 && uniform() < config_.link.loss) continue;
      Action a{clock_ + sample_delay(d), ActionKind::Delivery, n, 0};
      a.generation = devices_.at(n).generation;
      a.sender = id;
      a.sender_event = index;
      a.payload = payload;
      schedule(std::move(a));
    }
  }

  if (!d.spec.reactive) schedule_fire(d, clock_ + d.spec.period + d.spec.jitter * uniform());
  return index;
}

void World::deliver(const Action& a) {
  Device& d = devices_.at(a.device);
  if (!d.alive || a.generation != d.generation) return;
  auto prev = d.mailbox_event.find(a.sender);
  if (prev != d.mailbox_event.end() && prev->second > a.sender_event) return;
  auto old = d.mailbox.find(a.sender);
  const bool changed = old == d.mailbox.end() || !(old->second.tree == *a.payload);
  d.mailbox[a.sender] = ReceivedExport{*a.payload, clock_};
  d.mailbox_event[a.sender] = a.sender_event;
  record(TraceRecord::Kind::Delivery, a.device, clock_, encode(a.payload->value), "from " + std::to_string(a.sender));
  if (changed) request_wake(d);
}

void World::apply_env(const EnvAction& a) {
  std::string note;
  switch (a.kind) {
    case EnvAction::Kind::AddEdge:
      link(a.a, a.b);
      note = "add_edge " + std::to_string(a.b);
      break;
    case EnvAction::Kind::RemoveEdge:
      unlink(a.a, a.b);
      note = "remove_edge " + std::to_string(a.b);
      break;
    case EnvAction::Kind::Kill: {
      Device& d = devices_.at(a.a);
      d.alive = false;
      ++d.generation;
      d.mailbox.clear();
      d.mailbox_event.clear();
      d.fire_pending = false;
      note = "kill";
      break;
    }
    case EnvAction::Kind::Revive: {
      Device& d = devices_.at(a.a);
      if (!d.alive) {
        d.alive = true;
        ++d.generation;
        d.previous.reset();
        d.fired = false;
        schedule_fire(d, clock_);
      }
      note = "revive";
      break;
    }
    case EnvAction::Kind::Move:
      devices_.at(a.a).spec.position = a.position;
      if (config_.topology.kind == TopologyKind::UnitDisk) rebuild_disk_links(a.a);
      note = "move " + format_number(a.position.x) + "," + format_number(a.position.y);
      break;
  }
  record(TraceRecord::Kind::Env, a.a, clock_, "", note);
}

bool World::step() {
  while (!queue_.empty()) {
    if (queue_.top().time >= stop_) return false;
    Action a = queue_.top();
    queue_.pop();
    clock_ = a.time;
    switch (a.kind) {
      case ActionKind::Env: apply_env(config_.env[a.env_index]); return true;
      case ActionKind::Sensor: request_wake(devices_.at(a.device)); return true;
      case ActionKind::Delivery: deliver(a); return true;
      case ActionKind::Fire: {
        Device& d = devices_.at(a.device);
        if (!d.alive || a.generation != d.generation) continue;
        fire(a.device);
        return true;
      }
    }
  }
  return false;
}

void World::run() {
  while (step()) {
  }
}

Program compile(std::string_view source, const std::map<std::string, LocalValue, std::less<>>& constants) {
  Program program = parse_or_throw(source);
  bind_constants(program, {constants.begin(), constants.end()});
  return desugar(program);
}

RunResult run(const ScenarioConfig& config, const Program& core_program) {
  World world(config, core_program);
  world.run();
  return {world.trace(), world.events()};
}

}  // namespace fc
