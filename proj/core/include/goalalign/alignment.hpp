#pragma once

// Goal elicitation for human-aware goal alignment: given the robot model, the
// human's belief about it, a partial goal and a human plan, query the human
// about individual fluents until a plan satisfying their hidden goal is found
// or shown not to exist.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "goalalign/errors.hpp"
#include "goalalign/planner.hpp"
#include "goalalign/task.hpp"

namespace goalalign::align {

struct HaglInstance {
  DomainModel robot_domain;
  State robot_init;
  State goal_spec;  // what the human asked for
  DomainModel human_domain;
  State human_init;
  Plan human_plan;
  double beta = 1.0;

  PlanningTask robot_task(State goal) const { return {robot_domain, robot_init, std::move(goal)}; }
  PlanningTask human_task(State goal) const { return {human_domain, human_init, std::move(goal)}; }
  std::size_t fluent_count() const { return robot_domain.fluent_count; }
};

class InapplicableHumanPlan : public InstanceError {
 public:
  InapplicableHumanPlan(const std::string& msg, std::size_t step, ActionId action)
      : InstanceError(msg), step_(step), action_(action) {}
  std::size_t step() const { return step_; }
  ActionId action() const { return action_; }

 private:
  std::size_t step_;
  ActionId action_;
};

/// Throws InstanceError unless both models share a universe, beta > 0, the
/// human plan is applicable in the human model, and it reaches the goal spec.
void validate_instance(const HaglInstance& instance);

struct HiddenGoal {
  State g_star;
};

/// Throws InstanceError unless goal_spec ⊆ g_star ⊆ expected_state.
void validate_hidden_goal(const HaglInstance& instance, const HiddenGoal& hidden);

/// Membership oracle for the hidden goal. Answers are memoized: repeated
/// questions about a fluent are answered from memory and counted once.
class Oracle {
 public:
  virtual ~Oracle() = default;
  bool answer(FluentId f);
  std::size_t query_count() const { return memo_.size(); }

 protected:
  virtual bool decide(FluentId f) = 0;

 private:
  std::map<FluentId, bool> memo_;
};

class SimulatedOracle : public Oracle {
 public:
  explicit SimulatedOracle(HiddenGoal hidden) : hidden_(std::move(hidden)) {}

 protected:
  bool decide(FluentId f) override { return hidden_.g_star.contains(f); }

 private:
  HiddenGoal hidden_;
};

/// Replays fixed answers; asking about an unscripted fluent throws Error.
class ScriptedOracle : public Oracle {
 public:
  explicit ScriptedOracle(std::map<FluentId, bool> answers) : answers_(std::move(answers)) {}

 protected:
  bool decide(FluentId f) override;

 private:
  std::map<FluentId, bool> answers_;
};

/// Delegates each question to a callback (e.g. a terminal prompt).
class CallbackOracle : public Oracle {
 public:
  explicit CallbackOracle(std::function<bool(FluentId)> ask) : ask_(std::move(ask)) {}

 protected:
  bool decide(FluentId f) override { return ask_(f); }

 private:
  std::function<bool(FluentId)> ask_;
};

std::unique_ptr<Oracle> make_simulated_oracle(const HiddenGoal& hidden);

struct BeliefState {
  State expected_state;
  std::vector<FluentId> candidates;  // expected_state \ goal_spec, ascending
  std::map<FluentId, double> prob;
  State unachievable;                // fluents the robot cannot reach even alone
  std::map<FluentId, double> qvalue;
  std::size_t human_plan_cost = 0;
  std::map<FluentId, std::optional<std::size_t>> hypothesis_cost;  // cost of the human-optimal plan per candidate
};

/// Final state of the human plan in the human model. Throws
/// InapplicableHumanPlan naming the failing step.
State expected_state(const HaglInstance& instance);

/// {f ∈ expected : ⟨robot domain, robot init, {f}⟩ unsolvable}.
State unachievable_fluents(const HaglInstance& instance, const State& expected, const search::Planner& planner);

/// exp(-beta * |human_cost - optimal_cost|); 0 when the hypothesis has no plan.
/// No normalization across fluents: each fluent is its own Bernoulli hypothesis.
double probability_from_costs(std::size_t human_cost, std::optional<std::size_t> optimal_cost, double beta);

/// Probability that f belongs to the hidden goal, from the cost of the
/// human-model optimal plan for goal_spec ∪ {f}.
double fluent_probability(const HaglInstance& instance, FluentId f, const search::Planner& planner);

/// 1 if f is unachievable; otherwise the product of p over the unachievable set.
double approx_value_in(FluentId f, const BeliefState& belief);
/// Product of p over the unachievable set without f.
double approx_value_out(FluentId f, const BeliefState& belief);
double query_value(FluentId f, const BeliefState& belief);

struct BeliefOptions {
  std::size_t workers = 1;  // threads for the per-candidate planner calls
};

/// Expected state, candidates, probabilities, unachievable set and query values.
BeliefState compute_belief(const HaglInstance& instance, const search::Planner& planner, const BeliefOptions& options = {});

/// Candidates by descending query value, then descending probability, then ascending id.
std::vector<FluentId> build_queue(const BeliefState& belief);

enum class Termination {
  GoalSpecUnsolvable,     // the stated goal is already out of reach
  ExpectedStateSolvable,  // robot reaches everything the human expects; no queries
  UnachievableConfirmed,  // condition 1: "yes" to a fluent the robot cannot reach
  JointConflict,          // condition 2: confirmed fluents cannot be reached together
  SupersetPlan,           // condition 3: a plan covers confirmed + unqueried fluents
  QueueExhausted,         // every candidate asked
  Aborted,                // planner resource error
};

/// 1, 2 or 3 for the three query-loop stopping conditions; 0 otherwise.
int condition_number(Termination t);
std::string to_string(Termination t);

struct QueryRecord {
  FluentId fluent = 0;
  bool answer = false;
  double value = 0.0;
  double probability = 0.0;
  std::optional<Termination> termination;
};

enum class SessionVerdict { PlanFound, NoPlanExists, Aborted };

struct SessionOutcome {
  SessionVerdict verdict = SessionVerdict::NoPlanExists;
  std::optional<Plan> plan;
  Termination termination = Termination::GoalSpecUnsolvable;
  std::vector<QueryRecord> transcript;
  State confirmed;
  std::size_t query_count = 0;
  std::size_t planner_calls = 0;
  std::optional<State> planned_goal;  // goal the returned plan was computed for
  std::optional<BeliefState> belief;  // absent when the session ended before querying
  std::string error;                  // set when aborted
};

struct SessionOptions {
  BeliefOptions belief;
};

/// The ordered query loop. The queue is computed once and never re-scored.
SessionOutcome run_elicitation(const HaglInstance& instance, Oracle& oracle, const search::Planner& planner,
                               const SessionOptions& options = {});

enum class Direction { In, Out };

/// Exhaustive value: sum over goals Ḡ with goal_spec ⊆ Ḡ ⊆ expected (and f in
/// or out of Ḡ per `direction`) of P(Ḡ | direction) · [Ḡ unsolvable], where
/// P is the independence product of the belief's probabilities.
/// Solvability results are cached across calls on the same instance.
class BruteForceValuer {
 public:
  BruteForceValuer(const HaglInstance& instance, const BeliefState& belief, const search::Planner& planner,
                   std::size_t max_candidates = 12);
  double value(FluentId f, Direction direction);

 private:
  bool unsolvable(const State& goal);

  const HaglInstance* instance_;
  const BeliefState* belief_;
  const search::Planner* planner_;
  std::map<State, bool> unsolvable_cache_;
};

double brute_force_value(const HaglInstance& instance, const BeliefState& belief, FluentId f, Direction direction,
                         const search::Planner& planner, std::size_t max_candidates = 12);

}  // namespace goalalign::align
