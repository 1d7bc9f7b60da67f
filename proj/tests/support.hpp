#pragma once
// Shared helpers for the test binaries: hand-rolled generators over
// mt19937_64, scenario builders and small program runners.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "fc/builtins.hpp"
#include "fc/eval.hpp"
#include "fc/lang.hpp"
#include "fc/monitors.hpp"
#include "fc/netsim.hpp"
#include "fc/scenario.hpp"

#ifndef FC_CORPUS_DIR
#define FC_CORPUS_DIR "corpus"
#endif

namespace fctest {

using namespace fc;

inline std::filesystem::path corpus_dir() { return FC_CORPUS_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  double real(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  bool coin(double p = 0.5) { return real() < p; }
  template <typename T>
  const T& pick(const std::vector<T>& xs) { return xs[static_cast<std::size_t>(between(0, static_cast<int>(xs.size()) - 1))]; }
};

// Graphs ----------------------------------------------------------------------

inline void add_edge(Graph& g, DeviceId a, DeviceId b) {
  g[a].insert(b);
  g[b].insert(a);
}

/// Erdos-Renyi graph on ids 0..n-1.
inline Graph random_graph(Rng& rng, int n, double p) {
  Graph g;
  for (int i = 0; i < n; ++i) g[i];
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.coin(p)) add_edge(g, i, j);
    }
  }
  return g;
}

/// A random spanning tree plus `extra` random edges: always connected.
inline Graph random_connected(Rng& rng, int n, int extra) {
  Graph g;
  g[0];
  for (int i = 1; i < n; ++i) add_edge(g, i, rng.between(0, i - 1));
  for (int k = 0; k < extra && n > 1; ++k) {
    const int a = rng.between(0, n - 1), b = rng.between(0, n - 1);
    if (a != b) add_edge(g, a, b);
  }
  return g;
}

inline Graph line_graph(int n) {
  Graph g;
  for (int i = 0; i < n; ++i) g[i];
  for (int i = 0; i + 1 < n; ++i) add_edge(g, i, i + 1);
  return g;
}

// Scenarios -------------------------------------------------------------------

/// Synchronous lossless rounds over an explicit edge list.
inline ScenarioConfig edges_scenario(const Graph& g, std::uint64_t seed, int rounds) {
  ScenarioConfig c;
  c.seed = seed;
  c.topology.kind = TopologyKind::Edges;
  for (const auto& [a, adj] : g) {
    DeviceSpec d;
    d.id = a;
    c.devices.push_back(d);
    for (DeviceId b : adj) {
      if (a < b) c.topology.edges.emplace_back(a, b);
    }
  }
  c.rounds = rounds;
  return c;
}

inline ScenarioConfig grid_scenario(int w, int h, std::uint64_t seed, int rounds) {
  ScenarioConfig c;
  c.seed = seed;
  c.topology.kind = TopologyKind::Grid;
  c.topology.width = w;
  c.topology.height = h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      DeviceSpec d;
      d.id = grid_id(x, y, w);
      d.position = {static_cast<double>(x), static_cast<double>(y)};
      c.devices.push_back(d);
    }
  }
  c.rounds = rounds;
  return c;
}

/// A unit-disk scenario over random positions in a square.
inline ScenarioConfig disk_scenario(Rng& rng, int n, double side, double radius, std::uint64_t seed, int rounds) {
  ScenarioConfig c;
  c.seed = seed;
  c.topology.kind = TopologyKind::UnitDisk;
  c.topology.radius = radius;
  for (int i = 0; i < n; ++i) {
    DeviceSpec d;
    d.id = i;
    d.position = {rng.real(0, side), rng.real(0, side)};
    c.devices.push_back(d);
  }
  c.rounds = rounds;
  return c;
}

inline void set_sensor(ScenarioConfig& c, const std::string& name, Value fallback,
                       const std::map<DeviceId, Value>& per_device = {}) {
  SensorSpec s;
  s.fallback = std::move(fallback);
  for (const auto& [d, v] : per_device) s.timelines[d].set(-INFINITY, v);
  c.sensors[name] = std::move(s);
}

inline Program core(std::string_view source, const std::map<std::string, LocalValue, std::less<>>& constants = {}) {
  return compile(source, constants);
}

inline RunResult simulate(ScenarioConfig config, std::string_view source) {
  normalize(config);
  validate(config);
  return run(config, core(source, config.constants));
}

/// Root values of each device's last event.
inline std::map<DeviceId, Value> final_values(const EventStructure& es) {
  std::map<DeviceId, Value> out;
  for (const auto& [d, idx] : es.by_device) {
    const Event& ev = es.events[idx.back()];
    if (ev.value) out.emplace(d, *ev.value);
  }
  return out;
}

inline double num(const Value& v) { return as_local(v).as_number(); }

// Values ----------------------------------------------------------------------

inline LocalValue random_local(Rng& rng, int depth = 2) {
  switch (rng.between(0, depth > 0 ? 6 : 4)) {
    case 0: {
      static const std::vector<double> specials{0.0, -0.0, 1.0, -2.5, 1e300, INFINITY, -INFINITY, 0.1, 42.0};
      return LocalValue::number(rng.coin(0.5) ? rng.pick(specials) : std::round(rng.real(-100, 100)));
    }
    case 1: return LocalValue::boolean(rng.coin());
    case 2: return LocalValue::string(rng.pick(std::vector<std::string>{"", "a", "q\"uote", "x y", "back\\slash"}));
    case 3: return LocalValue::null();
    case 4: return LocalValue::device(rng.between(0, 50));
    case 5: {
      std::vector<LocalValue> elems;
      const int n = rng.between(0, 3);
      for (int i = 0; i < n; ++i) elems.push_back(random_local(rng, depth - 1));
      return LocalValue::tuple(std::move(elems));
    }
    default: {
      std::vector<LocalValue> args;
      const int n = rng.between(0, 2);
      for (int i = 0; i < n; ++i) args.push_back(random_local(rng, depth - 1));
      return LocalValue::constructor(rng.pick(std::vector<std::string>{"HIGH", "Pair", "OK"}), std::move(args));
    }
  }
}

/// Numbers, devices, booleans or same-shape numeric tuples: values that are
/// comparable within their class.
inline LocalValue random_comparable(Rng& rng, int cls) {
  switch (cls) {
    case 0: return rng.coin(0.8) ? LocalValue::number(rng.between(-3, 3)) : LocalValue::device(rng.between(0, 3));
    case 1: return LocalValue::boolean(rng.coin());
    default: return LocalValue::tuple({LocalValue::number(rng.between(0, 2)), LocalValue::number(rng.between(0, 2))});
  }
}

inline NeighbouringValue random_field(Rng& rng, DeviceId self, int max_entries,
                                      const std::function<LocalValue(Rng&)>& entry) {
  NeighbouringValue f;
  f.self = self;
  f.entries[self] = entry(rng);
  const int n = rng.between(0, max_entries);
  for (int i = 0; i < n; ++i) f.entries[rng.between(0, 20)] = entry(rng);
  return f;
}

inline ValueTree random_tree(Rng& rng, int depth) {
  ValueTree t;
  if (rng.coin(0.2)) {
    t.value = random_field(rng, rng.between(0, 5), 3, [](Rng& r) { return random_local(r, 1); });
  } else {
    t.value = random_local(rng, 1);
  }
  switch (rng.between(0, 5)) {
    case 0: t.tag = NodeTag::Then; break;
    case 1: t.tag = NodeTag::Else; break;
    case 2:
      t.tag = NodeTag::Frame;
      t.frame = rng.pick(std::vector<std::string>{"f", "hopcount", "_let0"});
      t.site = rng.between(0, 4);
      break;
    case 3: t.tag = NodeTag::Skipped; break;
    default: break;
  }
  const int kids = depth > 0 ? rng.between(0, 3) : 0;
  for (int i = 0; i < kids; ++i) t.children.push_back(random_tree(rng, depth - 1));
  return t;
}

/// Builds the smallest tree in which `path` addresses a node holding `v`.
inline ValueTree tree_at(const Path& path, const Value& v) {
  ValueTree root;
  ValueTree* node = &root;
  for (const auto& step : path) {
    switch (step.kind) {
      case PathStep::Kind::Child:
        while (node->children.size() <= static_cast<std::size_t>(step.index)) node->children.emplace_back();
        node = &node->children[static_cast<std::size_t>(step.index)];
        break;
      case PathStep::Kind::Branch: node->tag = step.then_branch ? NodeTag::Then : NodeTag::Else; break;
      case PathStep::Kind::Frame:
        node->tag = NodeTag::Frame;
        node->frame = step.function;
        node->site = step.index;
        break;
    }
  }
  node->value = v;
  return root;
}

// Programs --------------------------------------------------------------------

/// Random surface programs for the parser round trip: user functions,
/// operators, if, nbr variants, rep (possibly multi-valued), let and tuples.
class ProgramGen {
 public:
  explicit ProgramGen(Rng& rng) : rng_(rng) {}

  std::string program() {
    std::string out;
    const int nfun = rng_.between(0, 2);
    std::vector<std::string> vars_base;
    for (int i = 0; i < nfun; ++i) {
      const std::string name = "f" + std::to_string(i);
      const int arity = rng_.between(0, 2);
      std::vector<std::string> params;
      for (int k = 0; k < arity; ++k) params.push_back("p" + std::to_string(k));
      out += "def " + name + "(";
      for (int k = 0; k < arity; ++k) out += (k ? ", " : "") + params[k];
      out += ") {\n  " + expr(3, params) + "\n}\n";
      funs_.emplace_back(name, arity);
    }
    out += expr(4, {}) + "\n";
    return out;
  }

 private:
  std::string expr(int depth, std::vector<std::string> vars) {
    if (depth <= 0) return leaf(vars);
    switch (rng_.between(0, 11)) {
      case 0: return leaf(vars);
      case 1: return expr(depth - 1, vars) + " " + rng_.pick(binops_) + " " + expr(depth - 1, vars);
      case 2: return rng_.pick(std::vector<std::string>{"-", "!"}) + "(" + expr(depth - 1, vars) + ")";
      case 3: return "if (" + expr(depth - 1, vars) + ") {" + expr(depth - 1, vars) + "} {" + expr(depth - 1, vars) + "}";
      case 4: return rng_.pick(std::vector<std::string>{"nbr", "nbrLocal", "nbrRemote"}) + "{" + expr(depth - 1, vars) + "}";
      case 5: {
        const int n = rng_.between(1, 2);
        std::string inits, params, bodies;
        auto inner = vars;
        for (int i = 0; i < n; ++i) {
          const std::string v = "r" + std::to_string(depth) + "_" + std::to_string(i);
          inner.push_back(v);
          inits += (i ? ", " : "") + expr(depth - 1, vars);
          params += (i ? ", " : "") + v;
        }
        for (int i = 0; i < n; ++i) bodies += (i ? ", " : "") + expr(depth - 1, inner);
        return "rep (" + inits + ") { (" + params + ") => " + bodies + " }";
      }
      case 6: {
        const std::string v = "l" + std::to_string(depth);
        auto inner = vars;
        inner.push_back(v);
        return "let " + v + " = " + expr(depth - 1, vars) + " in " + expr(depth - 1, inner);
      }
      case 7: return "[" + expr(depth - 1, vars) + ", " + expr(depth - 1, vars) + "]";
      case 8: return rng_.pick(std::vector<std::string>{"minHood", "sumHood", "anyHoodPlusSelf"}) + "(" +
                     expr(depth - 1, vars) + ")";
      case 9: {
        if (funs_.empty()) return "mux(" + expr(depth - 1, vars) + ", 1, 2)";
        const auto& [name, arity] = rng_.pick(funs_);
        std::string args;
        for (int i = 0; i < arity; ++i) args += (i ? ", " : "") + expr(depth - 1, vars);
        return name + "(" + args + ")";
      }
      case 10: return "Pair(" + expr(depth - 1, vars) + ", " + expr(depth - 1, vars) + ")";
      default: return "(" + expr(depth - 1, vars) + ")";
    }
  }

  std::string leaf(const std::vector<std::string>& vars) {
    if (!vars.empty() && rng_.coin(0.5)) return rng_.pick(vars);
    switch (rng_.between(0, 6)) {
      case 0: return std::to_string(rng_.between(0, 99));
      case 1: return "infinity";
      case 2: return rng_.coin() ? "true" : "false";
      case 3: return "\"s\"";
      case 4: return "OK";
      case 5: return "myID()";
      default: return "2.5";
    }
  }

  Rng& rng_;
  std::vector<std::pair<std::string, int>> funs_;
  const std::vector<std::string> binops_{"+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "&&", "||"};
};

}  // namespace fctest
