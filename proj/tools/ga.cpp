// ga: command-line front end for planning, plan validation, goal elicitation
// sessions and benchmark runs.
//
// Exit codes:
//   0   success (plan found / plan valid / report written)
//   2   usage, parse or instance error
//   10  no plan exists
//   11  plan invalid
//   20  resource limit hit (node or time budget, external planner failure)

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "goalalign/alignment.hpp"
#include "goalalign/harness.hpp"
#include "goalalign/pddl.hpp"
#include "goalalign/planner.hpp"

namespace {

using namespace goalalign;
using ordered_json = nlohmann::ordered_json;

enum Exit : int { kOk = 0, kUsage = 2, kNoPlan = 10, kInvalid = 11, kResource = 20 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  std::optional<std::size_t> node_budget;
  std::optional<long> time_budget_ms;
  std::string external_planner;
};

void add_common(CLI::App& cmd, Common& c) {
  cmd.add_option("--seed", c.seed, "Master seed (generated and printed when omitted)")->envname("GA_SEED");
  cmd.add_option("--beta", c.beta, "Rationality parameter of the observer model (default 1.0)")
      ->envname("GA_BETA")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--node-budget", c.node_budget, "Maximum A* expansions per planner call")->envname("GA_NODE_BUDGET");
  cmd.add_option("--time-budget", c.time_budget_ms, "Wall-clock limit per planner call, in milliseconds")
      ->envname("GA_TIME_BUDGET");
  cmd.add_option("--external-planner", c.external_planner,
                 "Shell command template with {domain}, {problem} and {plan} placeholders")
      ->envname("GA_EXTERNAL_PLANNER");
}

search::SearchBudget budget_from(const Common& c, search::SearchBudget base = {}) {
  if (c.node_budget) base.max_expansions = *c.node_budget;
  if (c.time_budget_ms) base.max_time = std::chrono::milliseconds(*c.time_budget_ms);
  return base;
}

std::unique_ptr<search::Planner> make_planner(const Common& c, const search::SearchBudget& budget) {
  if (!c.external_planner.empty()) return std::make_unique<search::ExternalPlanner>(c.external_planner);
  return std::make_unique<search::AStarPlanner>(budget);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

pddl::GroundingResult load_task(const std::string& domain_path, const std::string& problem_path,
                                pddl::GroundingOptions options = {}) {
  auto domain = pddl::parse_domain(read_file(domain_path));
  auto problem = pddl::parse_problem(read_file(problem_path), domain);
  return pddl::ground(domain, problem, options);
}

std::string atom_list(const pddl::GroundingResult& g, const std::vector<FluentId>& ids) {
  std::string out;
  for (FluentId f : ids) out += (out.empty() ? "" : " ") + g.table.name(f);
  return out;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::optional<std::uint64_t> from_file) {
  if (flag) return *flag;
  if (from_file) return *from_file;
  std::random_device rd;
  std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  std::cerr << "seed: " << seed << " (pass --seed " << seed << " to reproduce)\n";
  return seed;
}

void apply_overrides(harness::Manifest& m, const Common& c) {
  auto& cfg = m.config;
  cfg.seed = resolve_seed(c.seed, m.seed_given ? std::optional(cfg.seed) : std::nullopt);
  if (c.beta) cfg.beta = *c.beta;
  cfg.budget = budget_from(c, cfg.budget);
}

// --- plan ---------------------------------------------------------------------

struct PlanArgs {
  std::string domain, problem, output;
};

int cmd_plan(const PlanArgs& a, const Common& c) {
  auto g = load_task(a.domain, a.problem);
  auto planner = make_planner(c, budget_from(c));
  auto result = planner->solve(g.task);
  if (!result.solved()) {
    std::cerr << "unsolvable: no plan reaches the goal\n";
    return kNoPlan;
  }
  write_output(a.output, pddl::format_plan(result.plan, g.task.domain));
  std::cerr << "solved: cost " << result.plan.cost() << ", " << result.expanded << " expansions, " << g.stats.fluents
            << " fluents, " << g.stats.actions << " ground actions\n";
  return kOk;
}

// --- validate -----------------------------------------------------------------

struct ValidateArgs {
  std::string domain, problem, plan;
};

int cmd_validate(const ValidateArgs& a) {
  // no static pruning: a step naming a dead action is reported as inapplicable
  auto g = load_task(a.domain, a.problem, {.prune_static = false});
  Plan plan = pddl::parse_plan(read_file(a.plan), g);
  auto report = validate_plan(g.task, plan);
  if (report.failure) {
    const auto& act = g.task.domain.action(report.failure->action);
    std::cout << "invalid: step " << report.failure->step << " " << act.name
              << " is inapplicable; unmet preconditions: " << atom_list(g, report.failure->unmet) << "\n";
    return kInvalid;
  }
  if (!report.satisfied) {
    std::cout << "invalid: goal not reached; missing: " << atom_list(g, report.missing) << "\n";
    return kInvalid;
  }
  std::cout << "valid: cost " << report.cost << "\n";
  return kOk;
}

// --- elicit -------------------------------------------------------------------

struct ElicitArgs {
  std::string manifest;
  std::string instance;
  bool interactive = false;
  std::string answers;
  std::string transcript;
  std::string plan_out;
};

std::map<FluentId, bool> load_answers(const std::string& path, const pddl::GroundingResult& g) {
  std::string text = read_file(path);
  std::map<FluentId, bool> out;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    // replay of a transcript written by `ga elicit`
    auto j = nlohmann::json::parse(text);
    for (const auto& q : j.at("queries")) out[g.table.require(q.at("atom").get<std::string>())] = q.at("answer").get<bool>();
    return out;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = line.substr(0, line.find('#'));
    auto close = line.rfind(')');
    if (close == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ResolutionError("expected '(atom) y|n'", line_no);
      continue;
    }
    std::string atom = line.substr(0, close + 1);
    std::istringstream rest(line.substr(close + 1));
    std::string word;
    rest >> word;
    for (auto& ch : word) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    bool yes;
    if (word == "y" || word == "yes") yes = true;
    else if (word == "n" || word == "no") yes = false;
    else throw ResolutionError("answer must be y or n, got '" + word + "'", line_no);
    out[g.table.require(atom)] = yes;
  }
  return out;
}

bool prompt(const std::string& atom) {
  for (;;) {
    std::cerr << "Is it part of your goal that " << atom << "? [y/n] " << std::flush;
    std::string reply;
    if (!std::getline(std::cin, reply)) throw Error("input closed before the session finished");
    for (auto& ch : reply) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    auto b = reply.find_first_not_of(" \t\r");
    reply = b == std::string::npos ? "" : reply.substr(b, reply.find_last_not_of(" \t\r") - b + 1);
    if (reply == "y" || reply == "yes") return true;
    if (reply == "n" || reply == "no") return false;
    std::cerr << "please answer y or n\n";
  }
}

std::vector<std::string> names(const pddl::GroundingResult& g, const State& s) {
  std::vector<std::string> out;
  for (FluentId f : s.members()) out.push_back(g.table.name(f));
  return out;
}

std::string verdict_name(align::SessionVerdict v) {
  switch (v) {
    case align::SessionVerdict::PlanFound: return "plan-found";
    case align::SessionVerdict::NoPlanExists: return "no-plan";
    case align::SessionVerdict::Aborted: return "aborted";
  }
  return "unknown";
}

int cmd_elicit(const ElicitArgs& a, const Common& c) {
  auto manifest = harness::load_manifest(a.manifest);
  apply_overrides(manifest, c);
  const harness::InstanceSpec* spec = &manifest.instances.front();
  if (!a.instance.empty()) {
    spec = nullptr;
    for (const auto& s : manifest.instances)
      if (s.id == a.instance) spec = &s;
    if (!spec) throw Error("manifest has no instance '" + a.instance + "'");
  } else if (manifest.instances.size() > 1) {
    throw Error("manifest lists several instances; choose one with --instance");
  }

  auto scenario = harness::load_scenario(*spec, manifest.config);
  auto planner = make_planner(c, manifest.config.budget);
  auto generated = harness::prepare_instance(scenario, manifest.config, 0, *planner);
  const auto& g = scenario.robot;

  std::unique_ptr<align::Oracle> oracle;
  std::string source;
  if (a.interactive) {
    oracle = std::make_unique<align::CallbackOracle>([&](FluentId f) { return prompt(g.table.name(f)); });
    source = "interactive";
  } else if (!a.answers.empty()) {
    oracle = std::make_unique<align::ScriptedOracle>(load_answers(a.answers, g));
    source = "scripted";
  } else {
    align::validate_hidden_goal(generated.instance, generated.hidden);
    oracle = align::make_simulated_oracle(generated.hidden);
    source = "simulated";
  }

  auto outcome = align::run_elicitation(generated.instance, *oracle, *planner);

  ordered_json t;
  t["scenario"] = spec->id;
  t["seed"] = manifest.config.seed;
  t["beta"] = manifest.config.beta;
  t["oracle"] = source;
  t["goal_spec"] = names(g, generated.instance.goal_spec);
  t["queries"] = ordered_json::array();
  for (const auto& q : outcome.transcript) {
    ordered_json r;
    r["atom"] = g.table.name(q.fluent);
    r["answer"] = q.answer;
    r["value"] = q.value;
    r["probability"] = q.probability;
    if (q.termination) {
      r["termination"] = align::to_string(*q.termination);
      r["condition"] = align::condition_number(*q.termination);
    }
    t["queries"].push_back(std::move(r));
  }
  t["verdict"] = verdict_name(outcome.verdict);
  t["termination"] = align::to_string(outcome.termination);
  t["condition"] = align::condition_number(outcome.termination);
  t["confirmed"] = names(g, outcome.confirmed);
  t["query_count"] = outcome.query_count;
  t["planner_calls"] = outcome.planner_calls;
  if (outcome.plan) {
    ordered_json steps = ordered_json::array();
    for (ActionId s : outcome.plan->steps) steps.push_back(generated.instance.robot_domain.action(s).name);
    t["plan"] = std::move(steps);
    if (!a.plan_out.empty()) write_output(a.plan_out, pddl::format_plan(*outcome.plan, generated.instance.robot_domain));
  } else {
    t["plan"] = nullptr;
  }
  if (!outcome.error.empty()) t["error"] = outcome.error;
  write_output(a.transcript, t.dump(2) + "\n");

  switch (outcome.verdict) {
    case align::SessionVerdict::PlanFound: return kOk;
    case align::SessionVerdict::NoPlanExists:
      std::cerr << "no plan: " << align::to_string(outcome.termination) << "\n";
      return kNoPlan;
    case align::SessionVerdict::Aborted:
      std::cerr << "aborted: " << outcome.error << "\n";
      return kResource;
  }
  return kOk;
}

// --- bench --------------------------------------------------------------------

struct BenchArgs {
  std::string manifest;
  std::string format = "csv";
  std::string output;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> workers;
};

int cmd_bench(const BenchArgs& a, const Common& c) {
  auto manifest = harness::load_manifest(a.manifest);
  apply_overrides(manifest, c);
  if (a.trials) manifest.config.trials = *a.trials;
  if (a.workers) manifest.config.workers = *a.workers;
  manifest.config.validate();

  auto planner = make_planner(c, manifest.config.budget);
  auto results = harness::run_manifest(manifest, *planner);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.verdict == harness::TrialVerdict::ResourceError;
  if (failed) std::cerr << failed << " of " << results.size() << " trials hit a resource limit\n";

  auto report = harness::aggregate(results, manifest.config);
  auto fmt = a.format == "json" ? harness::ReportFormat::Json : harness::ReportFormat::Csv;
  write_output(a.output, harness::emit_report(report, fmt));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal alignment planning toolkit"};
  app.require_subcommand(1);

  Common common;
  PlanArgs plan_args;
  ValidateArgs validate_args;
  ElicitArgs elicit_args;
  BenchArgs bench_args;

  auto* plan = app.add_subcommand("plan", "Compute an optimal plan for a PDDL task");
  plan->add_option("domain", plan_args.domain)->required()->check(CLI::ExistingFile);
  plan->add_option("problem", plan_args.problem)->required()->check(CLI::ExistingFile);
  plan->add_option("-o,--output", plan_args.output, "Plan file (stdout when omitted)");
  add_common(*plan, common);

  auto* validate = app.add_subcommand("validate", "Check a plan against a PDDL task");
  validate->add_option("domain", validate_args.domain)->required()->check(CLI::ExistingFile);
  validate->add_option("problem", validate_args.problem)->required()->check(CLI::ExistingFile);
  validate->add_option("plan", validate_args.plan)->required()->check(CLI::ExistingFile);

  auto* elicit = app.add_subcommand("elicit", "Run a goal elicitation session on a scenario manifest");
  elicit->add_option("manifest", elicit_args.manifest)->required()->check(CLI::ExistingFile);
  elicit->add_option("--instance", elicit_args.instance, "Instance id when the manifest lists several");
  auto* interactive = elicit->add_flag("--interactive", elicit_args.interactive, "Answer queries at the terminal");
  elicit->add_option("--answers", elicit_args.answers, "Scripted answers: '(atom) y|n' lines or a transcript JSON")
      ->check(CLI::ExistingFile)
      ->excludes(interactive);
  elicit->add_option("-t,--transcript", elicit_args.transcript, "Transcript JSON output (stdout when omitted)");
  elicit->add_option("--plan-out", elicit_args.plan_out, "Write the resulting plan here");
  add_common(*elicit, common);

  auto* bench = app.add_subcommand("bench", "Run the benchmark harness on a manifest");
  bench->add_option("manifest", bench_args.manifest)->required()->check(CLI::ExistingFile);
  bench->add_option("--format", bench_args.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->envname("GA_FORMAT");
  bench->add_option("-o,--output", bench_args.output, "Report file (stdout when omitted)");
  bench->add_option("--trials", bench_args.trials, "Override the manifest trial count")->check(CLI::PositiveNumber);
  bench->add_option("--workers", bench_args.workers, "Concurrent trials")->envname("GA_WORKERS");
  add_common(*bench, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*plan) return cmd_plan(plan_args, common);
    if (*validate) return cmd_validate(validate_args);
    if (*elicit) return cmd_elicit(elicit_args, common);
    if (*bench) return cmd_bench(bench_args, common);
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResource;
  } catch (const align::InapplicableHumanPlan& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
