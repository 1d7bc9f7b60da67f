#include <doctest.h>

#include "support.hpp"

using namespace fc;
using fctest::Rng;

namespace {

const char* kHopcount = "rep (infinity) { (c) => mux(source(), 0, minHood(nbr{c+1})) }";

ScenarioConfig noisy(Rng& rng, std::uint64_t seed) {
  ScenarioConfig c = fctest::disk_scenario(rng, 12, 8, 3.5, seed, 15);
  for (auto& d : c.devices) {
    d.jitter = 0.4;
    d.offset = rng.real(0, 1);
  }
  c.link.delay = DelaySpec{DelaySpec::Kind::Uniform, 0.05, 0.6};
  c.link.loss = 0.2;
  fctest::set_sensor(c, "source", LocalValue::boolean(false), {{0, LocalValue::boolean(true)}});
  return c;
}

// Ancestor sets by dynamic programming over firing order.
std::vector<std::set<std::size_t>> ancestors(const EventStructure& es) {
  std::vector<std::set<std::size_t>> anc(es.size());
  for (std::size_t e = 0; e < es.size(); ++e) {
    for (std::size_t p : es.preds[e]) {
      REQUIRE(p < e);
      anc[e].insert(p);
      anc[e].insert(anc[p].begin(), anc[p].end());
    }
  }
  return anc;
}

std::vector<double> device_values(const EventStructure& es, DeviceId d) {
  std::vector<double> out;
  for (std::size_t idx : es.by_device.at(d)) out.push_back(fctest::num(*es.events[idx].value));
  return out;
}

}  // namespace

TEST_CASE("identical seeds give byte-identical traces") {
  Rng rng(51);
  for (int i = 0; i < 5; ++i) {
    const ScenarioConfig c = noisy(rng, 900 + static_cast<std::uint64_t>(i));
    const RunResult a = fctest::simulate(c, kHopcount);
    const RunResult b = fctest::simulate(c, kHopcount);
    CHECK(format_trace(a.trace, TraceFormat::Records) == format_trace(b.trace, TraceFormat::Records));
    CHECK(format_events(a.events) == format_events(b.events));

    ScenarioConfig other = c;
    other.seed = *c.seed + 1000;
    CHECK(format_trace(fctest::simulate(other, kHopcount).trace, TraceFormat::Records) !=
          format_trace(a.trace, TraceFormat::Records));
  }
}

TEST_CASE("event structures are acyclic with at most one predecessor per neighbour") {
  Rng rng(52);
  for (int i = 0; i < 10; ++i) {
    const RunResult r = fctest::simulate(noisy(rng, 100 + static_cast<std::uint64_t>(i)), kHopcount);
    const EventStructure& es = r.events;
    CHECK(is_acyclic(es));
    for (std::size_t e = 0; e < es.size(); ++e) {
      std::set<DeviceId> senders;
      for (std::size_t p : es.preds[e]) {
        CHECK(es.events[p].device != es.events[e].device);
        CHECK(senders.insert(es.events[p].device).second);
        CHECK(es.events[p].global_time < es.events[e].global_time);
      }
    }
  }
}

TEST_CASE("past, future and concurrent partition the other events") {
  Rng rng(53);
  const RunResult r = fctest::simulate(noisy(rng, 7), kHopcount);
  const EventStructure& es = r.events;
  const auto anc = ancestors(es);
  for (int k = 0; k < 25; ++k) {
    const auto e = static_cast<std::size_t>(rng.between(0, static_cast<int>(es.size()) - 1));
    const auto past = causal_past(es, e), future = causal_future(es, e), conc = concurrent(es, e);
    CHECK(past == anc[e]);
    std::set<std::size_t> want_future;
    for (std::size_t i = 0; i < es.size(); ++i) {
      if (anc[i].count(e)) want_future.insert(i);
    }
    CHECK(future == want_future);
    CHECK(past.size() + future.size() + conc.size() + 1 == es.size());
    for (std::size_t i : conc) {
      CHECK_FALSE(past.count(i));
      CHECK_FALSE(future.count(i));
    }
  }
}

TEST_CASE("total loss leaves no neighbour edges") {
  ScenarioConfig c = fctest::grid_scenario(3, 3, 5, 6);
  c.link.loss = 1.0;
  const RunResult r = fctest::simulate(c, "sumHood(nbr{1})");
  CHECK(r.events.size() == 9 * 6);
  CHECK(r.events.edge_count() == 0);
  for (const auto& [d, v] : fctest::final_values(r.events)) CHECK(fctest::num(v) == 0);
}

TEST_CASE("messages expire after the ttl") {
  ScenarioConfig c = fctest::edges_scenario(fctest::line_graph(2), 3, 8);
  c.env.push_back(EnvAction{2.5, EnvAction::Kind::Kill, 1, 0, {}});
  const RunResult r = fctest::simulate(c, "sumHood(nbr{1})");
  // Device 1 fires at 0, 1 and 2; its last message lands at 2.1.
  for (std::size_t idx : r.events.by_device.at(0)) {
    const Event& ev = r.events.events[idx];
    CAPTURE(ev.global_time);
    const bool fresh = ev.global_time > 0.1 && ev.global_time - 2.1 <= c.effective_ttl();
    CHECK(r.events.preds[idx].size() == (fresh ? 1u : 0u));
  }
  CHECK(r.events.by_device.at(1).size() == 3);
}

TEST_CASE("periodic devices fire on offset plus multiples of the period") {
  ScenarioConfig c = fctest::edges_scenario(fctest::line_graph(3), 4, 5);
  c.devices[1].period = 2;
  c.devices[2].offset = 0.25;
  c.rounds.reset();
  c.until = 9.9;
  const RunResult r = fctest::simulate(c, "1");
  auto times = [&](DeviceId d) {
    std::vector<double> out;
    for (std::size_t idx : r.events.by_device.at(d)) out.push_back(r.events.events[idx].global_time);
    return out;
  };
  CHECK(times(0) == std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(times(1) == std::vector<double>{0, 2, 4, 6, 8});
  CHECK(times(2).front() == 0.25);
  CHECK(times(2).size() == 10);
}

TEST_CASE("local clock skew shifts sensor reads, not firing") {
  ScenarioConfig c = fctest::edges_scenario(fctest::line_graph(1), 4, 3);
  c.devices[0].skew = 10;
  SensorSpec s;
  s.timelines[0].set(0, LocalValue::number(1));
  s.timelines[0].set(11, LocalValue::number(2));
  c.sensors["x"] = s;
  const RunResult r = fctest::simulate(c, "x()");
  CHECK(device_values(r.events, 0) == std::vector<double>{1, 2, 2});
  CHECK(r.events.events[0].time == 10);
  CHECK(r.events.events[0].global_time == 0);
}

TEST_CASE("reactive devices wake only on changed exports and respect tmin") {
  for (const char* program : {"1", "rep (0) { (x) => x + 1 }"}) {
    ScenarioConfig c = fctest::edges_scenario(fctest::line_graph(2), 6, 12);
    c.devices[1].reactive = true;
    c.devices[1].tmin = 2.5;
    const RunResult r = fctest::simulate(c, program);
    const auto& fires = r.events.by_device.at(1);
    if (std::string(program) == "1") {
      // The initial round, then one wake for the first message from device 0.
      CHECK(fires.size() == 2);
    } else {
      CHECK(fires.size() >= 4);
      for (std::size_t i = 1; i < fires.size(); ++i) {
        CHECK(r.events.events[fires[i]].global_time - r.events.events[fires[i - 1]].global_time >=
              doctest::Approx(2.5));
      }
    }
  }
}

TEST_CASE("a lone counter counts rounds without self edges") {
  const RunResult r = fctest::simulate(fctest::edges_scenario(fctest::line_graph(1), 1, 3), "rep (0) { (x) => x + 1 }");
  CHECK(device_values(r.events, 0) == std::vector<double>{1, 2, 3});
  CHECK(r.events.edge_count() == 0);
  CHECK(oracle_longest_chain(r.events) == std::vector<double>{1, 1, 1});
}

TEST_CASE("hopcount on a line advances one hop per two rounds") {
  ScenarioConfig c = fctest::edges_scenario(fctest::line_graph(4), 2, 6);
  fctest::set_sensor(c, "source", LocalValue::boolean(false), {{0, LocalValue::boolean(true)}});
  const RunResult r = fctest::simulate(c, kHopcount);
  const auto finals = fctest::final_values(r.events);
  CHECK(fctest::num(finals.at(0)) == 0);
  CHECK(fctest::num(finals.at(1)) == 1);
  CHECK(fctest::num(finals.at(2)) == 2);
  CHECK(fctest::num(finals.at(3)) == INFINITY);

  // Each device at distance d settles by its round 2d.
  c.rounds = 8;
  const RunResult longer = fctest::simulate(c, kHopcount);
  for (DeviceId d = 0; d < 4; ++d) {
    const auto vals = device_values(longer.events, d);
    CAPTURE(d);
    CHECK(vals[2 * d] == d);
    if (d > 0) CHECK(vals[2 * d - 1] == INFINITY);
  }
}

TEST_CASE("environment actions change the topology") {
  ScenarioConfig c = fctest::edges_scenario(fctest::line_graph(3), 8, 10);
  c.env.push_back(EnvAction{3.5, EnvAction::Kind::RemoveEdge, 1, 2, {}});
  c.env.push_back(EnvAction{3.5, EnvAction::Kind::AddEdge, 0, 2, {}});
  World w(c, fctest::core("1"));
  while (w.clock() < 3.5 && w.step()) {
  }
  while (w.step() && w.clock() <= 3.5) {
  }
  CHECK(w.neighbours(2) == std::set<DeviceId>{0});
  CHECK(w.neighbours(0) == std::set<DeviceId>{1, 2});
}

TEST_CASE("killed devices stop and revived ones restart their state") {
  ScenarioConfig c = fctest::edges_scenario(fctest::line_graph(1), 8, 10);
  c.env.push_back(EnvAction{2.5, EnvAction::Kind::Kill, 0, 0, {}});
  c.env.push_back(EnvAction{5.5, EnvAction::Kind::Revive, 0, 0, {}});
  const RunResult r = fctest::simulate(c, "rep (0) { (x) => x + 1 }");
  CHECK(device_values(r.events, 0) == std::vector<double>{1, 2, 3, 1, 2, 3, 4, 5});
}

TEST_CASE("unit-disk links follow the radius") {
  ScenarioConfig c;
  c.seed = 1;
  c.rounds = 1;
  c.topology.kind = TopologyKind::UnitDisk;
  c.topology.radius = 1.5;
  for (int i = 0; i < 4; ++i) c.devices.push_back(DeviceSpec{static_cast<DeviceId>(i), {i * 1.0, 0}});
  World w(c, fctest::core("1"));
  CHECK(w.neighbours(0) == std::set<DeviceId>{1});
  CHECK(w.neighbours(1) == std::set<DeviceId>{0, 2});
  CHECK(topology_of(c).at(3) == std::set<DeviceId>{2});
}

TEST_CASE("failed rounds are recorded and do not export") {
  ScenarioConfig c = fctest::edges_scenario(fctest::line_graph(2), 8, 2);
  const RunResult r = fctest::simulate(c, "1 + missing()");
  for (const auto& ev : r.events.events) {
    CHECK_FALSE(ev.value.has_value());
    CHECK_FALSE(ev.error.empty());
    CHECK(ev.exported == nullptr);
  }
  CHECK(format_trace(r.trace, TraceFormat::Records).find("!error:") != std::string::npos);
}

TEST_CASE("trace formats") {
  const RunResult r = fctest::simulate(fctest::edges_scenario(fctest::line_graph(2), 8, 1), "myID()");
  const std::string records = format_trace(r.trace, TraceFormat::Records);
  CHECK(records.rfind("0\tfire\t0\t0\t#0\n", 0) == 0);
  const std::string text = format_trace(r.trace, TraceFormat::Text);
  CHECK(text.rfind("[0] t=0 fire device 0: #0\n", 0) == 0);
  CHECK(format_events(r.events).find("preds=") != std::string::npos);
}
