#pragma once

// Benchmark synthesis and trial running: degrade a robot model into a human
// belief model, drop goal atoms, plan for the human, run elicitation against
// a simulated oracle, and aggregate per-instance statistics.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "goalalign/alignment.hpp"
#include "goalalign/pddl.hpp"
#include "goalalign/planner.hpp"

namespace goalalign::harness {

struct ScenarioConfig {
  std::uint64_t seed = 1;
  double prec_drop_rate = 0.15;
  double del_drop_rate = 0.15;
  std::size_t goal_drop_count = 1;
  double beta = 1.0;
  std::size_t trials = 10;
  search::SearchBudget budget;
  std::size_t resample_attempts = 20;
  std::size_t workers = 1;

  /// Throws Error on out-of-range values.
  void validate() const;
};

/// Portable random stream: mt19937_64 plus hand-rolled distributions, so the
/// same seed gives the same draws with every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Independent stream for (master seed, trial, attempt).
  static Rng stream(std::uint64_t master, std::uint64_t trial, std::uint64_t attempt);
  static std::uint64_t stream_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t attempt);

  double uniform();                           // [0, 1)
  std::uint64_t below(std::uint64_t bound);   // [0, bound), unbiased
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Drops each precondition fluent with prec_drop_rate and each delete fluent
/// with del_drop_rate, independently. Action set and add lists are untouched.
DomainModel degrade_domain(const DomainModel& domain, const ScenarioConfig& config, Rng& rng);

/// true_goal minus goal_drop_count uniformly chosen atoms.
State derive_goal_spec(const State& true_goal, const ScenarioConfig& config, Rng& rng);

/// Raised when the hidden goal has no plan in the degraded model.
class HumanPlanUnavailable : public Error {
 public:
  using Error::Error;
};

/// Optimal plan for true_goal in the human model.
Plan synthesize_human_plan(const DomainModel& human_domain, const State& human_init, const State& true_goal,
                           const search::Planner& planner);

struct GeneratedInstance {
  align::HaglInstance instance;
  align::HiddenGoal hidden;
  std::uint64_t seed = 0;      // seed of the stream that produced the instance
  std::size_t attempts = 1;
};

/// degrade -> derive goal spec -> synthesize human plan, resampling the
/// degradation with a fresh stream while the hidden goal is unsolvable in
/// the human model. Throws Error after config.resample_attempts failures.
/// A fixed `goal_spec` replaces the random goal-atom drop.
GeneratedInstance generate_instance(const PlanningTask& robot, const ScenarioConfig& config, std::size_t trial,
                                    const search::Planner& planner, const std::optional<State>& goal_spec = std::nullopt);

enum class TrialVerdict { PlanFound, NoPlan, ResourceError };
std::string to_string(TrialVerdict v);

struct TrialResult {
  std::string instance_id;
  std::size_t trial = 0;
  std::size_t baseline = 0;  // |expected state \ goal spec|
  std::size_t queries = 0;
  double wall_seconds = 0.0;
  TrialVerdict verdict = TrialVerdict::NoPlan;
  std::uint64_t seed = 0;
  std::size_t attempts = 1;
  std::size_t planner_calls = 0;
  bool hidden_goal_met = false;  // plan reaches a superset of the hidden goal
  std::string termination;
  std::string error;
};

/// Runs one trial on a prepared instance.
TrialResult run_trial(const std::string& id, std::size_t trial, const GeneratedInstance& generated,
                      const search::Planner& planner, const ScenarioConfig& config);

/// config.trials synthesized trials on one robot task; results ordered by trial.
std::vector<TrialResult> run_trials(const std::string& id, const PlanningTask& robot, const ScenarioConfig& config,
                                    const search::Planner& planner);

struct InstanceStats {
  std::string instance;
  double baseline = 0.0;  // mean over completed trials
  double queries_mean = 0.0;
  double queries_std = 0.0;
  double time_mean = 0.0;
  double time_std = 0.0;
  std::size_t trials = 0;     // attempted
  std::size_t completed = 0;  // not resource errors
  std::vector<TrialResult> detail;
};

struct AggregateReport {
  ScenarioConfig config;
  std::vector<InstanceStats> instances;
  double total_baseline = 0.0;      // mean baseline over all completed trials
  double total_queries_mean = 0.0;  // mean queries over all completed trials
  std::size_t total_completed = 0;
};

/// Sample mean and (n-1) standard deviation; 0 for a single value.
std::pair<double, double> mean_std(const std::vector<double>& xs);

/// Groups results by instance id in first-seen order. Throws Error when an
/// instance has no completed trial.
AggregateReport aggregate(const std::vector<TrialResult>& results, const ScenarioConfig& config);

enum class ReportFormat { Csv, Json };
std::string emit_report(const AggregateReport& report, ReportFormat format);

// --- scenario manifests -----------------------------------------------------

struct InstanceSpec {
  std::string id;
  std::filesystem::path domain;
  std::filesystem::path problem;
  std::optional<std::filesystem::path> human_domain;
  std::optional<std::filesystem::path> human_problem;
  std::optional<std::filesystem::path> human_plan;
  std::optional<std::vector<std::string>> hidden_goal;
  std::optional<std::vector<std::string>> goal_spec;
  std::vector<std::string> complements;

  bool explicit_human() const { return human_domain || human_problem || human_plan; }
};

struct Manifest {
  std::string name;
  ScenarioConfig config;
  bool seed_given = false;
  std::vector<InstanceSpec> instances;
};

/// JSON manifest; either a single scenario object or {"instances": [...]}.
/// Relative paths resolve against the manifest's directory.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);

/// A scenario ready for elicitation, with the fluent table for naming.
struct Scenario {
  std::string id;
  pddl::GroundingResult robot;
  std::optional<align::HaglInstance> instance;  // present for explicit human models
  std::optional<align::HiddenGoal> hidden;
  State true_goal;                               // problem goal (or hidden goal) used for synthesis
  std::optional<State> goal_spec;                // explicit goal spec, if the manifest gives one
};

/// Grounds the robot problem (and human files when given), compiles
/// complements, and resolves atom lists.
Scenario load_scenario(const InstanceSpec& spec, const ScenarioConfig& config);

/// Explicit instance when the manifest carries one, synthesized otherwise.
GeneratedInstance prepare_instance(const Scenario& scenario, const ScenarioConfig& config, std::size_t trial,
                                   const search::Planner& planner);

/// Runs every manifest instance for config.trials trials.
std::vector<TrialResult> run_manifest(const Manifest& manifest, const search::Planner& planner);

}  // namespace goalalign::harness
