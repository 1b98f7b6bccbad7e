#include "goalalign/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "parallel.hpp"

namespace goalalign::harness {

void ScenarioConfig::validate() const {
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(prec_drop_rate)) throw Error("prec_drop_rate must lie in [0, 1]");
  if (!rate_ok(del_drop_rate)) throw Error("del_drop_rate must lie in [0, 1]");
  if (trials < 1) throw Error("trials must be at least 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error("beta must be positive");
  if (resample_attempts < 1) throw Error("resample_attempts must be at least 1");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t Rng::stream_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t attempt) {
  return splitmix64(splitmix64(splitmix64(master) ^ trial) ^ (attempt * 0xd1b54a32d192ed03ULL));
}

Rng Rng::stream(std::uint64_t master, std::uint64_t trial, std::uint64_t attempt) {
  return Rng(stream_seed(master, trial, attempt));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below(0)");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    std::uint64_t x = engine_();
    if (x < limit) return x % bound;
  }
}

DomainModel degrade_domain(const DomainModel& domain, const ScenarioConfig& config, Rng& rng) {
  DomainModel out = domain;
  for (auto& a : out.actions) {
    for (FluentId f : a.pre.members())
      if (rng.bernoulli(config.prec_drop_rate)) a.pre.erase(f);
    for (FluentId f : a.del.members())
      if (rng.bernoulli(config.del_drop_rate)) a.del.erase(f);
  }
  return out;
}

State derive_goal_spec(const State& true_goal, const ScenarioConfig& config, Rng& rng) {
  std::vector<FluentId> atoms = true_goal.members();
  if (config.goal_drop_count > atoms.size()) {
    throw Error("goal_drop_count " + std::to_string(config.goal_drop_count) + " exceeds goal size " +
                std::to_string(atoms.size()));
  }
  // partial Fisher-Yates: the first goal_drop_count slots are dropped
  for (std::size_t i = 0; i < config.goal_drop_count; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(atoms.size() - i));
    std::swap(atoms[i], atoms[j]);
  }
  State spec = true_goal;
  for (std::size_t i = 0; i < config.goal_drop_count; ++i) spec.erase(atoms[i]);
  return spec;
}

Plan synthesize_human_plan(const DomainModel& human_domain, const State& human_init, const State& true_goal,
                           const search::Planner& planner) {
  auto r = planner.solve({human_domain, human_init, true_goal});
  if (!r.solved()) throw HumanPlanUnavailable("hidden goal is unsolvable in the human model");
  return std::move(r.plan);
}

GeneratedInstance generate_instance(const PlanningTask& robot, const ScenarioConfig& config, std::size_t trial,
                                    const search::Planner& planner, const std::optional<State>& goal_spec) {
  for (std::size_t attempt = 0; attempt < config.resample_attempts; ++attempt) {
    std::uint64_t seed = Rng::stream_seed(config.seed, trial, attempt);
    Rng rng(seed);
    GeneratedInstance g;
    g.seed = seed;
    g.attempts = attempt + 1;
    auto& in = g.instance;
    in.robot_domain = robot.domain;
    in.robot_init = robot.init;
    in.human_domain = degrade_domain(robot.domain, config, rng);
    in.human_init = robot.init;
    in.goal_spec = goal_spec ? *goal_spec : derive_goal_spec(robot.goal, config, rng);
    in.beta = config.beta;
    try {
      in.human_plan = synthesize_human_plan(in.human_domain, in.human_init, robot.goal, planner);
    } catch (const HumanPlanUnavailable&) {
      continue;
    }
    g.hidden.g_star = robot.goal;
    return g;
  }
  throw Error("could not generate a human model in which the hidden goal is solvable after " +
              std::to_string(config.resample_attempts) + " attempts");
}

std::string to_string(TrialVerdict v) {
  switch (v) {
    case TrialVerdict::PlanFound: return "plan-found";
    case TrialVerdict::NoPlan: return "no-plan";
    case TrialVerdict::ResourceError: return "resource-error";
  }
  return "unknown";
}

TrialResult run_trial(const std::string& id, std::size_t trial, const GeneratedInstance& generated,
                      const search::Planner& planner, const ScenarioConfig& config) {
  const auto& in = generated.instance;
  align::validate_instance(in);
  align::validate_hidden_goal(in, generated.hidden);

  TrialResult r;
  r.instance_id = id;
  r.trial = trial;
  r.seed = generated.seed;
  r.attempts = generated.attempts;
  r.baseline = (align::expected_state(in) - in.goal_spec).size();

  align::SimulatedOracle oracle(generated.hidden);
  align::SessionOptions options;
  options.belief.workers = 1;
  (void)config;
  auto start = std::chrono::steady_clock::now();
  auto outcome = align::run_elicitation(in, oracle, planner, options);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  r.queries = outcome.query_count;
  r.planner_calls = outcome.planner_calls;
  r.termination = align::to_string(outcome.termination);
  switch (outcome.verdict) {
    case align::SessionVerdict::PlanFound: {
      r.verdict = TrialVerdict::PlanFound;
      auto final_state = simulate(*outcome.plan, in.robot_init, in.robot_domain);
      r.hidden_goal_met = defined(final_state) && satisfies(std::get<State>(final_state), generated.hidden.g_star);
      break;
    }
    case align::SessionVerdict::NoPlanExists: r.verdict = TrialVerdict::NoPlan; break;
    case align::SessionVerdict::Aborted:
      r.verdict = TrialVerdict::ResourceError;
      r.error = outcome.error;
      break;
  }
  return r;
}

namespace {

TrialResult resource_failure(const std::string& id, std::size_t trial, const ScenarioConfig& config, const std::string& what) {
  TrialResult r;
  r.instance_id = id;
  r.trial = trial;
  r.seed = Rng::stream_seed(config.seed, trial, 0);
  r.verdict = TrialVerdict::ResourceError;
  r.termination = align::to_string(align::Termination::Aborted);
  r.error = what;
  return r;
}

}  // namespace

std::vector<TrialResult> run_trials(const std::string& id, const PlanningTask& robot, const ScenarioConfig& config,
                                    const search::Planner& planner) {
  config.validate();
  std::vector<TrialResult> results(config.trials);
  detail::parallel_for(config.trials, config.workers, [&](std::size_t k) {
    try {
      auto generated = generate_instance(robot, config, k, planner);
      results[k] = run_trial(id, k, generated, planner, config);
    } catch (const ResourceError& e) {
      results[k] = resource_failure(id, k, config, e.what());
    }
  });
  return results;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) throw Error("statistics over zero values");
  double sum = 0.0;
  for (double x : xs) sum += x;
  double mean = sum / static_cast<double>(xs.size());
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

AggregateReport aggregate(const std::vector<TrialResult>& results, const ScenarioConfig& config) {
  AggregateReport report;
  report.config = config;
  std::map<std::string, std::size_t> index;
  for (const auto& r : results) {
    auto [it, fresh] = index.emplace(r.instance_id, report.instances.size());
    if (fresh) {
      report.instances.emplace_back();
      report.instances.back().instance = r.instance_id;
    }
    report.instances[it->second].detail.push_back(r);
  }
  if (report.instances.empty()) throw Error("no trial results to aggregate");

  double baseline_sum = 0.0, query_sum = 0.0;
  for (auto& s : report.instances) {
    std::vector<double> baselines, queries, times;
    for (const auto& r : s.detail) {
      if (r.verdict == TrialVerdict::ResourceError) continue;
      baselines.push_back(static_cast<double>(r.baseline));
      queries.push_back(static_cast<double>(r.queries));
      times.push_back(r.wall_seconds);
      baseline_sum += static_cast<double>(r.baseline);
      query_sum += static_cast<double>(r.queries);
    }
    s.trials = s.detail.size();
    s.completed = queries.size();
    if (s.completed == 0) throw Error("instance " + s.instance + " has no completed trials");
    s.baseline = mean_std(baselines).first;
    std::tie(s.queries_mean, s.queries_std) = mean_std(queries);
    std::tie(s.time_mean, s.time_std) = mean_std(times);
    report.total_completed += s.completed;
  }
  report.total_baseline = baseline_sum / static_cast<double>(report.total_completed);
  report.total_queries_mean = query_sum / static_cast<double>(report.total_completed);
  return report;
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::ordered_json config_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["prec_drop_rate"] = c.prec_drop_rate;
  j["del_drop_rate"] = c.del_drop_rate;
  j["goal_drop_count"] = c.goal_drop_count;
  j["beta"] = c.beta;
  j["trials"] = c.trials;
  j["node_budget"] = c.budget.max_expansions;
  if (c.budget.max_time) j["time_budget_ms"] = c.budget.max_time->count();
  j["resample_attempts"] = c.resample_attempts;
  return j;
}

}  // namespace

std::string emit_report(const AggregateReport& report, ReportFormat format) {
  const auto& c = report.config;
  if (format == ReportFormat::Csv) {
    std::ostringstream o;
    o << "# seed=" << c.seed << " prec_drop_rate=" << fixed(c.prec_drop_rate) << " del_drop_rate=" << fixed(c.del_drop_rate)
      << " goal_drop_count=" << c.goal_drop_count << " beta=" << fixed(c.beta) << " trials=" << c.trials << '\n';
    o << "instance,baseline,queries_mean,queries_std,time_mean,time_std,completed\n";
    for (const auto& s : report.instances) {
      o << s.instance << ',' << fixed(s.baseline) << ',' << fixed(s.queries_mean) << ',' << fixed(s.queries_std) << ','
        << fixed(s.time_mean) << ',' << fixed(s.time_std) << ',' << s.completed << '\n';
    }
    o << "# total baseline_mean=" << fixed(report.total_baseline) << " queries_mean=" << fixed(report.total_queries_mean)
      << " completed=" << report.total_completed << '\n';
    return o.str();
  }

  nlohmann::ordered_json j;
  j["config"] = config_json(c);
  j["instances"] = nlohmann::ordered_json::array();
  for (const auto& s : report.instances) {
    nlohmann::ordered_json row;
    row["instance"] = s.instance;
    row["baseline"] = s.baseline;
    row["queries_mean"] = s.queries_mean;
    row["queries_std"] = s.queries_std;
    row["time_mean"] = s.time_mean;
    row["time_std"] = s.time_std;
    row["trials"] = s.trials;
    row["completed"] = s.completed;
    row["detail"] = nlohmann::ordered_json::array();
    for (const auto& r : s.detail) {
      nlohmann::ordered_json t;
      t["trial"] = r.trial;
      t["seed"] = r.seed;
      t["attempts"] = r.attempts;
      t["baseline"] = r.baseline;
      t["queries"] = r.queries;
      t["verdict"] = to_string(r.verdict);
      t["termination"] = r.termination;
      t["hidden_goal_met"] = r.hidden_goal_met;
      t["planner_calls"] = r.planner_calls;
      t["wall_seconds"] = r.wall_seconds;
      if (!r.error.empty()) t["error"] = r.error;
      row["detail"].push_back(std::move(t));
    }
    j["instances"].push_back(std::move(row));
  }
  j["totals"] = {{"baseline_mean", report.total_baseline},
                 {"queries_mean", report.total_queries_mean},
                 {"completed", report.total_completed}};
  return j.dump(2) + "\n";
}

// --- manifests ----------------------------------------------------------------

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  if (!j.is_array()) throw Error(std::string("manifest field '") + key + "' must be a list of atoms");
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(e.get<std::string>());
  return out;
}

InstanceSpec parse_instance(const nlohmann::json& j, const std::filesystem::path& base, std::size_t index) {
  InstanceSpec s;
  if (!j.contains("domain") || !j.contains("problem")) throw Error("manifest instance needs 'domain' and 'problem'");
  s.domain = resolve(base, j.at("domain").get<std::string>());
  s.problem = resolve(base, j.at("problem").get<std::string>());
  s.id = j.contains("id") ? j.at("id").get<std::string>() : s.problem.stem().string() + "#" + std::to_string(index);
  if (j.contains("human_domain")) s.human_domain = resolve(base, j.at("human_domain").get<std::string>());
  if (j.contains("human_problem")) s.human_problem = resolve(base, j.at("human_problem").get<std::string>());
  if (j.contains("human_plan")) s.human_plan = resolve(base, j.at("human_plan").get<std::string>());
  if (j.contains("hidden_goal")) s.hidden_goal = string_list(j.at("hidden_goal"), "hidden_goal");
  if (j.contains("goal_spec")) s.goal_spec = string_list(j.at("goal_spec"), "goal_spec");
  if (j.contains("complements")) s.complements = string_list(j.at("complements"), "complements");
  return s;
}

}  // namespace

Manifest parse_manifest(const std::string& text, const std::filesystem::path& base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid manifest JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("manifest must be a JSON object");
  Manifest m;
  try {
    m.name = j.value("name", std::string("scenario"));
    if (j.contains("config")) {
      const auto& c = j.at("config");
      auto& cfg = m.config;
      if (c.contains("seed")) {
        cfg.seed = c.at("seed").get<std::uint64_t>();
        m.seed_given = true;
      }
      cfg.prec_drop_rate = c.value("prec_drop_rate", cfg.prec_drop_rate);
      cfg.del_drop_rate = c.value("del_drop_rate", cfg.del_drop_rate);
      cfg.goal_drop_count = c.value("goal_drop_count", cfg.goal_drop_count);
      cfg.beta = c.value("beta", cfg.beta);
      cfg.trials = c.value("trials", cfg.trials);
      cfg.budget.max_expansions = c.value("node_budget", cfg.budget.max_expansions);
      if (c.contains("time_budget_ms")) cfg.budget.max_time = std::chrono::milliseconds(c.at("time_budget_ms").get<long>());
      cfg.resample_attempts = c.value("resample_attempts", cfg.resample_attempts);
      cfg.workers = c.value("workers", cfg.workers);
    }
    if (j.contains("instances")) {
      std::size_t i = 0;
      for (const auto& e : j.at("instances")) m.instances.push_back(parse_instance(e, base, i++));
    } else {
      m.instances.push_back(parse_instance(j, base, 0));
      if (!j.contains("id")) m.instances.back().id = m.name;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid manifest: ") + e.what());
  }
  if (m.instances.empty()) throw Error("manifest lists no instances");
  m.config.validate();
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

namespace {

pddl::GroundingResult ground_files(const std::filesystem::path& domain_path, const std::filesystem::path& problem_path,
                                   const std::vector<std::string>& complements) {
  auto domain = pddl::parse_domain(read_file(domain_path));
  auto problem = pddl::parse_problem(read_file(problem_path), domain);
  auto g = pddl::ground(domain, problem);
  if (!complements.empty()) {
    std::vector<FluentId> targets;
    for (const auto& a : complements) targets.push_back(g.table.require(a));
    g = pddl::compile_complements(g, targets);
  }
  return g;
}

State atoms_to_state(const pddl::GroundingResult& g, const std::vector<std::string>& atoms) {
  State s(g.table.size());
  for (const auto& a : atoms) s.insert(g.table.require(a));
  return s;
}

}  // namespace

Scenario load_scenario(const InstanceSpec& spec, const ScenarioConfig& config) {
  Scenario sc;
  sc.id = spec.id;
  sc.robot = ground_files(spec.domain, spec.problem, spec.complements);
  sc.true_goal = spec.hidden_goal ? atoms_to_state(sc.robot, *spec.hidden_goal) : sc.robot.task.goal;
  if (spec.goal_spec) sc.goal_spec = atoms_to_state(sc.robot, *spec.goal_spec);
  if (spec.hidden_goal) sc.hidden = align::HiddenGoal{sc.true_goal};

  if (!spec.explicit_human()) return sc;

  auto human = ground_files(spec.human_domain.value_or(spec.domain), spec.human_problem.value_or(spec.problem),
                            spec.complements);
  if (!(human.table == sc.robot.table))
    throw InstanceError("human and robot models must declare the same predicates and objects");

  align::HaglInstance in;
  in.robot_domain = sc.robot.task.domain;
  in.robot_init = sc.robot.task.init;
  in.goal_spec = sc.goal_spec.value_or(sc.robot.task.goal);
  in.human_domain = human.task.domain;
  in.human_init = human.task.init;
  in.beta = config.beta;
  if (spec.human_plan) {
    in.human_plan = pddl::parse_plan(read_file(*spec.human_plan), human);
  } else {
    search::AStarPlanner planner(config.budget);
    in.human_plan = synthesize_human_plan(in.human_domain, in.human_init, sc.true_goal, planner);
  }
  sc.instance = std::move(in);
  return sc;
}

GeneratedInstance prepare_instance(const Scenario& scenario, const ScenarioConfig& config, std::size_t trial,
                                   const search::Planner& planner) {
  if (scenario.instance) {
    if (!scenario.hidden) throw Error("scenario " + scenario.id + " has an explicit human model but no hidden_goal");
    GeneratedInstance g;
    g.instance = *scenario.instance;
    g.instance.beta = config.beta;
    g.hidden = *scenario.hidden;
    g.seed = config.seed;
    return g;
  }
  PlanningTask robot = scenario.robot.task.with_goal(scenario.true_goal);
  return generate_instance(robot, config, trial, planner, scenario.goal_spec);
}

std::vector<TrialResult> run_manifest(const Manifest& manifest, const search::Planner& planner) {
  const auto& config = manifest.config;
  config.validate();
  std::vector<TrialResult> all;
  for (const auto& spec : manifest.instances) {
    Scenario sc = load_scenario(spec, config);
    std::vector<TrialResult> results(config.trials);
    detail::parallel_for(config.trials, config.workers, [&](std::size_t k) {
      try {
        auto generated = prepare_instance(sc, config, k, planner);
        results[k] = run_trial(spec.id, k, generated, planner, config);
      } catch (const ResourceError& e) {
        results[k] = resource_failure(spec.id, k, config, e.what());
      }
    });
    all.insert(all.end(), results.begin(), results.end());
  }
  return all;
}

}  // namespace goalalign::harness
