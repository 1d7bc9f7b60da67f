#include <doctest.h>

#include "support.hpp"

using namespace fc;

namespace {

CheckReport check(const CorpusEntry& entry, bool mutate) {
  const std::string source = mutate ? apply_mutation(entry.source, *entry.mutation) : entry.source;
  const ScenarioConfig config = load_scenario(entry.scenario_path);
  const Program program = compile(source, config.constants);
  World world(config, program);
  world.run();
  return check_stabilized(world.trace(), world.events(), entry, config, program);
}

}  // namespace

TEST_CASE("the corpus loads completely") {
  const auto corpus = load_corpus(fctest::corpus_dir());
  CHECK(corpus.size() == 15);
  const auto oracles = oracle_names();
  for (const auto& e : corpus) {
    CAPTURE(e.name);
    CHECK(std::find(oracles.begin(), oracles.end(), e.oracle) != oracles.end());
    CHECK(e.mutation.has_value());
    CHECK(parse(e.source).ok());
  }
}

TEST_CASE("each entry reaches its recorded verdict and its mutation is caught") {
  for (const auto& entry : load_corpus(fctest::corpus_dir())) {
    CAPTURE(entry.name);
    const CheckReport plain = check(entry, false);
    CHECK(plain.pass == entry.expected_pass);
    CHECK_FALSE(plain.rows.empty());

    const CheckReport mutated = check(entry, true);
    CHECK_FALSE(mutated.pass);
    if (!entry.expected_pass) {
      // Already red: the mutation must still change what the oracle sees.
      auto actuals = [](const CheckReport& r) {
        std::vector<std::string> out;
        for (const auto& row : r.rows) out.push_back(row.actual);
        return out;
      };
      CHECK(actuals(mutated) != actuals(plain));
    }
  }
}

TEST_CASE("mutations replace the chosen occurrence") {
  CHECK(apply_mutation("a < b < c", Mutation{"<", "<=", 2}) == "a < b <= c");
  CHECK(apply_mutation("minHood(x)", Mutation{"minHood", "maxHood", 1}) == "maxHood(x)");
  CHECK_THROWS_AS(apply_mutation("abc", Mutation{"z", "y", 1}), FcError);
  CHECK_THROWS_AS(apply_mutation("a < b", Mutation{"<", ">", 2}), FcError);
}

TEST_CASE("reports name the first divergence") {
  const auto corpus = load_corpus(fctest::corpus_dir());
  const auto hop = std::find_if(corpus.begin(), corpus.end(), [](const CorpusEntry& e) { return e.name == "hopcount"; });
  REQUIRE(hop != corpus.end());
  const CheckReport bad = check(*hop, true);
  REQUIRE(bad.first_divergence.has_value());
  CHECK_FALSE(bad.first_divergence->ok);
  CHECK(bad.first_divergence->expected != bad.first_divergence->actual);
  const CheckReport good = check(*hop, false);
  CHECK_FALSE(good.first_divergence.has_value());
  CHECK(good.mismatches() == 0);
}

TEST_CASE("settled rounds lie within the hopcount horizon") {
  const auto corpus = load_corpus(fctest::corpus_dir());
  const auto hop = std::find_if(corpus.begin(), corpus.end(), [](const CorpusEntry& e) { return e.name == "hopcount"; });
  REQUIRE(hop != corpus.end());
  const ScenarioConfig config = load_scenario(hop->scenario_path);
  const Program program = compile(hop->source, config.constants);
  World world(config, program);
  world.run();
  const auto settled = settled_round(world.trace(), world.events(), *hop, config, program);
  REQUIRE(settled.has_value());
  const int diam = diameter(topology_of(config));
  CHECK(*settled <= hop->horizon->rounds(diam, config));
  // Two rounds per hop: the far corner cannot be right before round 2 * 18.
  CHECK(*settled >= 2 * diam);
}
