#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "fc/monitors.hpp"

namespace fc {

Graph topology_of(const ScenarioConfig& config) {
  Graph g;
  for (const auto& d : config.devices) g[d.id];
  auto connect = [&g](DeviceId a, DeviceId b) {
    if (a == b) return;
    g[a].insert(b);
    g[b].insert(a);
  };
  const auto& topo = config.topology;
  switch (topo.kind) {
    case TopologyKind::Grid:
      for (const auto& a : config.devices) {
        for (const auto& b : config.devices) {
          const auto ax = a.id % topo.width, ay = a.id / topo.width;
          const auto bx = b.id % topo.width, by = b.id / topo.width;
          if (std::abs(ax - bx) + std::abs(ay - by) == 1) connect(a.id, b.id);
        }
      }
      break;
    case TopologyKind::UnitDisk:
      for (const auto& a : config.devices) {
        for (const auto& b : config.devices) {
          if (std::hypot(a.position.x - b.position.x, a.position.y - b.position.y) <= topo.radius) {
            connect(a.id, b.id);
          }
        }
      }
      break;
    case TopologyKind::Edges:
      for (const auto& [a, b] : topo.edges) connect(a, b);
      break;
  }
  return g;
}

std::map<DeviceId, double> oracle_bfs(const Graph& g, const std::set<DeviceId>& sources) {
  std::map<DeviceId, double> dist;
  for (const auto& [id, adj] : g) dist[id] = std::numeric_limits<double>::infinity();
  std::deque<DeviceId> queue;
  for (DeviceId s : sources) {
    if (!g.count(s)) continue;
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const DeviceId u = queue.front();
    queue.pop_front();
    for (DeviceId v : g.at(u)) {
      if (std::isinf(dist[v])) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

int diameter(const Graph& g) {
  int best = 0;
  for (const auto& [id, adj] : g) {
    for (const auto& [other, d] : oracle_bfs(g, {id})) {
      if (std::isfinite(d)) best = std::max(best, static_cast<int>(d));
    }
  }
  return best;
}

std::vector<double> oracle_longest_chain(const EventStructure& es) {
  // Memoised depth-first evaluation; colour 1 marks events on the stack.
  std::vector<double> value(es.size(), 0.0);
  std::vector<int> colour(es.size(), 0);
  for (std::size_t root = 0; root < es.size(); ++root) {
    if (colour[root] == 2) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [e, next] = stack.back();
      if (next < es.preds[e].size()) {
        const std::size_t p = es.preds[e][next++];
        if (colour[p] == 1) throw FcError("cycle in the neighbour relation");
        if (colour[p] == 0) {
          colour[p] = 1;
          stack.emplace_back(p, 0);
        }
        continue;
      }
      double best = 0.0;
      for (std::size_t p : es.preds[e]) best = std::max(best, value[p]);
      value[e] = best + 1.0;
      colour[e] = 2;
      stack.pop_back();
    }
  }
  return value;
}

std::size_t oracle_same_value_component(const Graph& g, const std::map<DeviceId, LocalValue>& values, DeviceId id) {
  const LocalValue& mine = values.at(id);
  std::set<DeviceId> seen{id};
  std::vector<DeviceId> stack{id};
  while (!stack.empty()) {
    const DeviceId u = stack.back();
    stack.pop_back();
    for (DeviceId v : g.at(u)) {
      auto it = values.find(v);
      if (it == values.end() || !(it->second == mine)) continue;
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  return seen.size();
}

std::set<DeviceId> oracle_ellipse(const std::map<DeviceId, double>& d_source, const std::map<DeviceId, double>& d_dest,
                                  double d_source_dest, double width) {
  std::set<DeviceId> out;
  for (const auto& [id, ds] : d_source) {
    auto it = d_dest.find(id);
    if (it != d_dest.end() && ds + it->second <= d_source_dest + width) out.insert(id);
  }
  return out;
}

std::optional<Value> sensor_at(const ScenarioConfig& config, std::string_view name, DeviceId device, double time) {
  auto s = config.sensors.find(name);
  if (s == config.sensors.end()) return std::nullopt;
  if (auto tl = s->second.timelines.find(device); tl != s->second.timelines.end()) {
    if (auto v = tl->second.at(time)) return v;
  }
  return s->second.fallback;
}

}  // namespace fc
