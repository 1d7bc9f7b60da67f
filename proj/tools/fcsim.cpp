// fcsim: parse, run and check field calculus programs.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "fc/lang.hpp"
#include "fc/monitors.hpp"
#include "fc/netsim.hpp"
#include "fc/scenario.hpp"

#ifndef FC_CORPUS_DIR
#define FC_CORPUS_DIR "corpus"
#endif

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct Options {
  std::string program;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::string out;
  std::string format = "records";
  bool dump_events = false;
  std::vector<std::string> sets;
  std::string entry;
  std::string corpus = FC_CORPUS_DIR;
  bool mutate = false;
  std::optional<int> horizon;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fc::FcError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opt.out, std::ios::binary);
  if (!out) throw fc::FcError("cannot write " + opt.out);
  out << text;
}

/// Command-line overrides shadow the scenario file.
void apply_overrides(const Options& opt, fc::ScenarioConfig& config) {
  if (opt.seed) config.seed = opt.seed;
  if (opt.rounds) {
    config.rounds = opt.rounds;
    config.until.reset();
  }
  for (const auto& s : opt.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw fc::FcError("--set expects NAME=VALUE, got '" + s + "'");
    config.constants[s.substr(0, eq)] = fc::parse_scalar(s.substr(eq + 1));
  }
  fc::validate(config);
}

int cmd_parse(const Options& opt) {
  const std::string source = read_file(opt.program);
  const fc::ParseResult result = fc::parse(source);
  if (!result.ok()) {
    for (const auto& d : result.diagnostics) std::cerr << opt.program << ':' << fc::to_string(d) << '\n';
    return kUsage;
  }
  emit(opt, fc::pretty_print(fc::desugar(*result.program)) + '\n');
  return kPass;
}

int cmd_run(const Options& opt) {
  if (opt.scenario.empty()) throw fc::FcError("run needs --scenario");
  fc::ScenarioConfig config = fc::load_scenario(opt.scenario);
  apply_overrides(opt, config);
  const std::string program_path = opt.program.empty() ? config.program : opt.program;
  if (program_path.empty()) throw fc::FcError("no program given (use --program or set it in the scenario)");
  const fc::Program program = fc::compile(read_file(program_path), config.constants);

  fc::World world(config, program);
  world.run();
  const auto format = opt.format == "text" ? fc::TraceFormat::Text : fc::TraceFormat::Records;
  std::string text = fc::format_trace(world.trace(), format);
  if (opt.dump_events) text += fc::format_events(world.events());
  emit(opt, text);
  return kPass;
}

std::filesystem::path resolve_entry(const Options& opt) {
  std::filesystem::path p = opt.entry;
  if (p.filename() == "meta.yaml") p = p.parent_path();
  if (std::filesystem::exists(p / "meta.yaml")) return p;
  const auto in_corpus = std::filesystem::path(opt.corpus) / opt.entry;
  if (std::filesystem::exists(in_corpus / "meta.yaml")) return in_corpus;
  throw fc::FcError("unknown corpus entry '" + opt.entry + "'");
}

int cmd_check(const Options& opt) {
  fc::CorpusEntry entry = fc::load_entry(resolve_entry(opt));
  if (opt.horizon) entry.horizon = fc::Horizon{0, *opt.horizon, ""};
  std::string source = entry.source;
  if (opt.mutate) {
    if (!entry.mutation) throw fc::FcError("corpus entry '" + entry.name + "' declares no mutation");
    source = fc::apply_mutation(source, *entry.mutation);
  }
  fc::ScenarioConfig config = fc::load_scenario(opt.scenario.empty() ? entry.scenario_path.string() : opt.scenario);
  apply_overrides(opt, config);
  const fc::Program program = fc::compile(source, config.constants);

  fc::World world(config, program);
  world.run();
  const fc::CheckReport report = fc::check_stabilized(world.trace(), world.events(), entry, config, program);
  emit(opt, report.format(world.events()));
  return report.pass ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Field calculus interpreter, network simulator and monitor checker"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "Override the scenario seed");
    sub->add_option("--rounds", opt.rounds, "Override the stop condition with a round count");
    sub->add_option("--out", opt.out, "Write output to this file instead of stdout");
    sub->add_option("--set", opt.sets, "Override a constant, NAME=VALUE (repeatable)");
  };

  auto* parse = app.add_subcommand("parse", "Print the desugared program or its diagnostics");
  parse->add_option("--program,program", opt.program, "Program source")->required();
  parse->add_option("--out", opt.out, "Write output to this file instead of stdout");

  auto* run = app.add_subcommand("run", "Simulate a program on a scenario and write the trace");
  run->add_option("--program", opt.program, "Program source (defaults to the scenario's)");
  run->add_option("--scenario", opt.scenario, "Scenario file")->required();
  run->add_option("--format", opt.format, "text or records")->check(CLI::IsMember({"text", "records"}));
  run->add_flag("--dump-events", opt.dump_events, "Append events with their neighbour predecessors");
  common(run);

  auto* check = app.add_subcommand("check", "Run a corpus entry and compare against its oracle");
  check->add_option("entry", opt.entry, "Corpus entry name or directory")->required();
  check->add_option("--corpus", opt.corpus, "Corpus root directory");
  check->add_option("--scenario", opt.scenario, "Use this scenario instead of the entry's");
  check->add_flag("--mutate", opt.mutate, "Apply the entry's documented mutation first");
  check->add_option("--horizon", opt.horizon, "Check at this round instead of the entry's horizon");
  common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*parse) return cmd_parse(opt);
    if (*run) return cmd_run(opt);
    return cmd_check(opt);
  } catch (const std::exception& e) {
    std::cerr << "fcsim: " << e.what() << '\n';
    return kUsage;
  }
}
