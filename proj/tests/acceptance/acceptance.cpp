// Acceptance suite: one PASS/FAIL line per criterion.
//
//   usage: acceptance <path-to-ga> <data-dir> [criterion ...]
//
// Exit status is non-zero when a criterion fails, unless that criterion is in
// kKnownRed: those still print FAIL, with the reason, but do not break the
// build. A known-red criterion that starts passing is reported as PASS.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "generators.hpp"
#include "goalalign/alignment.hpp"
#include "goalalign/harness.hpp"
#include "goalalign/pddl.hpp"
#include "goalalign/planner.hpp"

namespace {

using namespace goalalign;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and limits.
constexpr double kProbabilityTolerance = 1e-9;
constexpr double kValueTolerance = 1e-12;
constexpr double kPlannerSuiteSeconds = 60.0;
constexpr double kBenchSuiteSeconds = 300.0;
constexpr std::size_t kPlannerTasks = 150;
constexpr std::size_t kApplyCases = 10'000;
constexpr std::size_t kBoundInstances = 60;
constexpr std::size_t kCompletenessInstances = 30;
constexpr std::size_t kFastPathInstances = 60;
constexpr std::uint64_t kSeed = 0x5eed2024;

// Criterion 3 cannot pass as specified: with an empty unachievable set the
// approximation is the empty product 1, while the exhaustive value is the
// probability that a sampled goal is unsolvable, which is below 1 whenever
// some goal in the enumeration is solvable. The suite reports the violations
// and, separately, checks the bound on the cases where the product is nonempty.
constexpr std::array kKnownRed{3};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- 1 ------------------------------------------------------------------------

Outcome planner_optimality() {
  auto start = Clock::now();
  std::size_t solved = 0, unsolvable = 0, mismatches = 0, invalid = 0;
  for (std::size_t i = 0; i < kPlannerTasks; ++i) {
    harness::Rng rng(harness::Rng::stream_seed(kSeed, i, 1));
    testgen::TaskParams p;
    p.fluents = 4 + static_cast<std::size_t>(rng.below(9));   // 4..12
    p.actions = 5 + static_cast<std::size_t>(rng.below(21));  // 5..25
    p.goal_size = 1 + static_cast<std::size_t>(rng.below(3));
    auto task = testgen::random_task(p, rng);
    auto astar = search::optimal_plan(task);
    auto bfs = search::bfs_oracle(task);
    if (astar.verdict != bfs.verdict || (astar.solved() && astar.plan.cost() != bfs.plan.cost())) ++mismatches;
    if (astar.solved()) {
      ++solved;
      if (!validate_plan(task, astar.plan).valid()) ++invalid;
    } else {
      ++unsolvable;
    }
  }
  double secs = seconds_since(start);
  Outcome o;
  o.pass = mismatches == 0 && invalid == 0 && secs < kPlannerSuiteSeconds;
  o.detail = std::to_string(kPlannerTasks) + " tasks (" + std::to_string(solved) + " solvable, " +
             std::to_string(unsolvable) + " unsolvable), " + std::to_string(mismatches) + " disagreements, " +
             std::to_string(invalid) + " invalid plans, " + fmt(secs) + " s (limit " + fmt(kPlannerSuiteSeconds, 0) + " s)";
  return o;
}

// --- 2 ------------------------------------------------------------------------

std::optional<std::set<FluentId>> naive_apply(const std::set<FluentId>& pre, const std::set<FluentId>& add,
                                              const std::set<FluentId>& del, const std::set<FluentId>& s) {
  for (FluentId f : pre)
    if (!s.count(f)) return std::nullopt;
  std::set<FluentId> out;
  for (FluentId f : s)
    if (!del.count(f)) out.insert(f);
  out.insert(add.begin(), add.end());
  return out;
}

std::set<FluentId> as_set(const State& s) {
  auto m = s.members();
  return {m.begin(), m.end()};
}

Outcome transition_semantics() {
  std::size_t mismatches = 0, applicable = 0;
  harness::Rng rng(harness::Rng::stream_seed(kSeed, 2, 0));
  for (std::size_t i = 0; i < kApplyCases; ++i) {
    std::size_t n = 1 + static_cast<std::size_t>(rng.below(150));
    auto draw = [&](double density) {
      State s(n);
      for (std::size_t f = 0; f < n; ++f)
        if (rng.bernoulli(density)) s.insert(static_cast<FluentId>(f));
      return s;
    };
    GroundAction a;
    a.pre = draw(rng.uniform() * 0.2);
    a.add = draw(rng.uniform() * 0.3);
    a.del = draw(rng.uniform() * 0.3);
    State s = draw(0.3 + rng.uniform() * 0.7);
    auto got = apply(a, s);
    auto want = naive_apply(as_set(a.pre), as_set(a.add), as_set(a.del), as_set(s));
    if (defined(got) != want.has_value()) {
      ++mismatches;
    } else if (want) {
      ++applicable;
      if (as_set(std::get<State>(got)) != *want) ++mismatches;
    } else {
      const auto& unmet = std::get<Inapplicable>(got).unmet;
      std::set<FluentId> expect;
      for (FluentId f : as_set(a.pre))
        if (!s.contains(f)) expect.insert(f);
      if (std::set<FluentId>(unmet.begin(), unmet.end()) != expect) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(kApplyCases) + " cases (" + std::to_string(applicable) + " applicable), " +
                               std::to_string(mismatches) + " mismatches"};
}

// --- 3 ------------------------------------------------------------------------

Outcome approximation_bound() {
  search::AStarPlanner planner;
  std::size_t instances = 0, checks = 0, violations = 0, empty_product = 0, nonempty_checks = 0, nonempty_violations = 0;
  std::size_t with_unachievable = 0;
  for (std::uint64_t i = 0; instances < kBoundInstances && i < 10 * kBoundInstances; ++i) {
    testgen::InstanceParams params;
    if (i % 2 == 1) params.locked_actions = 3;
    auto m = testgen::random_instance(harness::Rng::stream_seed(kSeed, i, 3), params);
    if (!m) continue;
    ++instances;
    auto belief = align::compute_belief(m->instance, planner);
    if (!belief.unachievable.empty()) ++with_unachievable;
    align::BruteForceValuer valuer(m->instance, belief, planner);
    for (FluentId f : belief.candidates) {
      for (auto dir : {align::Direction::In, align::Direction::Out}) {
        double approx = dir == align::Direction::In ? align::approx_value_in(f, belief) : align::approx_value_out(f, belief);
        double exact = valuer.value(f, dir);
        bool ok = approx <= exact + kValueTolerance;
        ++checks;
        violations += !ok;
        // the product ranges over the unachievable set (minus f when going out)
        State rest = belief.unachievable;
        if (dir == align::Direction::Out && rest.contains(f)) rest.erase(f);
        bool trivially_one = dir == align::Direction::In && belief.unachievable.contains(f);
        if (rest.empty() && !trivially_one) {
          empty_product += !ok;
        } else {
          ++nonempty_checks;
          nonempty_violations += !ok;
        }
      }
    }
  }
  Outcome o;
  o.pass = instances >= 50 && violations == 0;
  o.detail = std::to_string(instances) + " instances (" + std::to_string(with_unachievable) +
             " with unachievable fluents), " + std::to_string(checks) + " checks, " + std::to_string(violations) +
             " violations; " + std::to_string(empty_product) + " of them have an empty product (approximation = 1); " +
             "nonempty-product cases: " + std::to_string(nonempty_violations) + " violations in " +
             std::to_string(nonempty_checks) + " checks";
  return o;
}

// --- 4 ------------------------------------------------------------------------

Outcome completeness() {
  search::AStarPlanner planner;
  std::size_t instances = 0, sessions = 0, violations = 0, plans = 0;
  std::string first_failure;
  for (std::uint64_t i = 0; instances < kCompletenessInstances && i < 10 * kCompletenessInstances; ++i) {
    testgen::InstanceParams params;
    params.max_candidates = 8;
    if (i % 2 == 1) params.locked_actions = 3;
    auto m = testgen::random_instance(harness::Rng::stream_seed(kSeed, i, 4), params);
    if (!m) continue;
    ++instances;
    const auto& in = m->instance;
    State expected = align::expected_state(in);
    std::vector<FluentId> cands = (expected - in.goal_spec).members();
    for (std::size_t mask = 0; mask < (std::size_t{1} << cands.size()); ++mask) {
      align::HiddenGoal hidden{in.goal_spec};
      for (std::size_t k = 0; k < cands.size(); ++k)
        if (mask >> k & 1U) hidden.g_star.insert(cands[k]);
      align::validate_hidden_goal(in, hidden);
      align::SimulatedOracle oracle(hidden);
      auto out = align::run_elicitation(in, oracle, planner);
      ++sessions;
      bool solvable = search::bfs_oracle(in.robot_task(hidden.g_star)).solved();
      bool got_plan = out.verdict == align::SessionVerdict::PlanFound;
      bool ok = got_plan == solvable && out.query_count <= cands.size() && out.verdict != align::SessionVerdict::Aborted;
      if (got_plan) {
        ++plans;
        auto end = simulate(*out.plan, in.robot_init, in.robot_domain);
        ok = ok && defined(end) && satisfies(std::get<State>(end), hidden.g_star);
      }
      if (!ok) {
        ++violations;
        if (first_failure.empty())
          first_failure = "; first failure: instance seed " + std::to_string(m->seed) + " mask " + std::to_string(mask);
      }
    }
  }
  return {instances >= 25 && violations == 0,
          std::to_string(instances) + " instances, " + std::to_string(sessions) + " hidden goals (" +
              std::to_string(plans) + " with plans), " + std::to_string(violations) + " violations" + first_failure};
}

// --- 5 ------------------------------------------------------------------------

Outcome desk_scale_hypothesis(const fs::path& data) {
  auto start = Clock::now();
  auto manifest = harness::load_manifest(data / "suite.json");
  std::set<fs::path> domains;
  for (const auto& s : manifest.instances) domains.insert(fs::weakly_canonical(s.domain));
  search::AStarPlanner planner(manifest.config.budget);
  auto report = harness::aggregate(harness::run_manifest(manifest, planner), manifest.config);
  double secs = seconds_since(start);
  std::size_t zero_rows = 0;
  for (const auto& s : report.instances) zero_rows += s.queries_mean == 0.0;
  bool shape = manifest.instances.size() >= 5 && domains.size() >= 3 && manifest.config.trials == 10 && manifest.seed_given &&
               report.total_completed == manifest.instances.size() * manifest.config.trials;
  return {shape && report.total_queries_mean < report.total_baseline && zero_rows >= 1 && secs < kBenchSuiteSeconds,
          std::to_string(manifest.instances.size()) + " instances, " + std::to_string(domains.size()) + " domains, " +
              std::to_string(report.total_completed) + " completed trials; mean queries " +
              fmt(report.total_queries_mean) + " vs baseline " + fmt(report.total_baseline) + "; " +
              std::to_string(zero_rows) + " zero-query instances; " + fmt(secs) + " s (limit " +
              fmt(kBenchSuiteSeconds, 0) + " s)"};
}

// --- 6 ------------------------------------------------------------------------

Outcome probability_formula(const fs::path& data) {
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  check(align::probability_from_costs(4, 4, 1.0) == 1.0, "delta 0 gives exactly 1");
  check(std::abs(align::probability_from_costs(5, 4, 1.0) - std::exp(-1.0)) <= kProbabilityTolerance, "delta +1");
  check(std::abs(align::probability_from_costs(3, 4, 1.0) - std::exp(-1.0)) <= kProbabilityTolerance, "delta -1");
  check(align::probability_from_costs(4, std::nullopt, 1.0) == 0.0, "unsolvable hypothesis gives 0");
  double prev = 2.0;
  for (std::size_t d = 0; d <= 5; ++d) {
    double p = align::probability_from_costs(10 + d, 10, 1.0);
    double q = align::probability_from_costs(10 - d, 10, 1.0);
    check(p < prev && p == q, "monotone decrease at delta " + std::to_string(d));
    prev = p;
  }

  // the same formula end to end on the tea scenario
  auto manifest = harness::load_manifest(data / "tea" / "demo.json");
  auto sc = harness::load_scenario(manifest.instances.front(), manifest.config);
  search::AStarPlanner planner;
  const auto& in = *sc.instance;
  double ladder = align::fluent_probability(in, sc.robot.table.require("(ladder-used)"), planner);
  double floor = align::fluent_probability(in, sc.robot.table.require("(on-floor)"), planner);
  double climb = align::fluent_probability(in, sc.robot.table.require("(can-climb)"), planner);
  check(std::abs(ladder - std::exp(-1.0)) <= kProbabilityTolerance, "tea: ladder-used at delta 1");
  check(floor == 1.0, "tea: on-floor at delta 0");
  check(climb == 0.0, "tea: human-unreachable fluent gives 0");

  std::string detail = "tolerance " + std::string("1e-9") + ", " + std::to_string(14 - failures.size()) + "/14 checks";
  for (const auto& f : failures) detail += "; failed: " + f;
  return {failures.empty(), detail};
}

// --- 7 ------------------------------------------------------------------------

Outcome fast_path(const fs::path& data) {
  search::AStarPlanner planner;
  std::size_t instances = 0, violations = 0, max_calls = 0;
  auto check = [&](const align::HaglInstance& in) {
    State expected = align::expected_state(in);
    if (!search::check_solvable(in.robot_task(expected))) return;
    ++instances;
    align::SimulatedOracle oracle(align::HiddenGoal{expected});
    auto out = align::run_elicitation(in, oracle, planner);
    max_calls = std::max(max_calls, out.planner_calls);
    if (out.query_count != 0 || out.planner_calls > 2 || out.verdict != align::SessionVerdict::PlanFound) ++violations;
  };
  // undegraded and degraded micro instances, keeping those whose expected state the robot reaches
  for (std::uint64_t i = 0; instances < kFastPathInstances && i < 20 * kFastPathInstances; ++i) {
    testgen::InstanceParams p;
    if (i % 2 == 0) p.prec_drop_rate = p.del_drop_rate = 0.0;
    if (auto m = testgen::random_instance(harness::Rng::stream_seed(kSeed, i, 7), p)) check(m->instance);
  }
  // and the structurally zero-query satellite instance from the suite
  auto manifest = harness::load_manifest(data / "suite.json");
  for (const auto& spec : manifest.instances) {
    if (spec.id != "satellite-p02") continue;
    auto sc = harness::load_scenario(spec, manifest.config);
    for (std::size_t t = 0; t < manifest.config.trials; ++t)
      check(harness::prepare_instance(sc, manifest.config, t, planner).instance);
  }
  return {instances >= kFastPathInstances && violations == 0,
          std::to_string(instances) + " instances with a reachable expected state, " + std::to_string(violations) +
              " violations, at most " + std::to_string(max_calls) + " planner calls"};
}

// --- 8 ------------------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string strip_csv_times(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  std::vector<bool> keep;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      out << line << '\n';
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (keep.empty())
      for (const auto& c : cells) keep.push_back(c.rfind("time_", 0) != 0);
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (i >= keep.size() || keep[i]) out << cells[i] << ',';
    out << '\n';
  }
  return out.str();
}

void strip_json_times(nlohmann::json& j) {
  if (j.is_object()) {
    for (const char* key : {"time_mean", "time_std", "wall_seconds"}) j.erase(key);
    for (auto& [k, v] : j.items()) strip_json_times(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_json_times(v);
  }
}

Outcome determinism(const fs::path& ga, const fs::path& data) {
  auto dir = fs::temp_directory_path() / ("ga-accept-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto run = [&](const std::string& format, const std::string& extra, const std::string& name) {
    auto out = dir / name;
    std::string cmd = "\"" + ga.string() + "\" bench \"" + (data / "suite.json").string() + "\" --format " + format +
                      " " + extra + " -o \"" + out.string() + "\" 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) throw std::runtime_error("ga bench failed: " + cmd);
    return read_file(out);
  };
  auto csv_a = run("csv", "", "a.csv");
  auto csv_b = run("csv", "--workers 4", "b.csv");
  auto json_a = nlohmann::json::parse(run("json", "", "a.json"));
  auto json_b = nlohmann::json::parse(run("json", "--workers 3", "b.json"));
  fs::remove_all(dir);
  strip_json_times(json_a);
  strip_json_times(json_b);
  bool csv_same = strip_csv_times(csv_a) == strip_csv_times(csv_b);
  bool json_same = json_a.dump() == json_b.dump();
  return {csv_same && json_same && !csv_a.empty(),
          std::string("csv ") + (csv_same ? "identical" : "differs") + ", json " + (json_same ? "identical" : "differs") +
              " modulo time columns (second runs used 4 and 3 workers)"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <path-to-ga> <data-dir> [criterion ...]\n";
    return 2;
  }
  const fs::path ga = argv[1];
  const fs::path data = argv[2];
  std::set<int> only;
  for (int i = 3; i < argc; ++i) only.insert(std::atoi(argv[i]));

  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> criteria = {
      {1, "planner optimality vs breadth-first oracle", planner_optimality},
      {2, "transition semantics vs set-based reference", transition_semantics},
      {3, "value approximation lower bound", approximation_bound},
      {4, "elicitation completeness over all hidden goals", completeness},
      {5, "fewer queries than the naive bound on the suite", [&] { return desk_scale_hypothesis(data); }},
      {6, "probability formula", [&] { return probability_formula(data); }},
      {7, "zero-query fast path", [&] { return fast_path(data); }},
      {8, "bench reports are deterministic", [&] { return determinism(ga, data); }},
  };

  int hard_failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    auto start = Clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    bool known = std::find(kKnownRed.begin(), kKnownRed.end(), c.id) != kKnownRed.end();
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt(seconds_since(start), 2) << " s)" << (!o.pass && known ? " [known red, see README]" : "") << std::endl;
    if (!o.pass && !known) ++hard_failures;
  }
  return hard_failures == 0 ? 0 : 1;
}
