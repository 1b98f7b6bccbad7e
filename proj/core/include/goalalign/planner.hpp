#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "goalalign/task.hpp"

namespace goalalign::search {

/// Non-negative integer or infinity.
class HeuristicValue {
 public:
  static constexpr int kInfinite = std::numeric_limits<int>::max();

  constexpr HeuristicValue() = default;
  constexpr explicit HeuristicValue(int v) : value_(v) {}
  static constexpr HeuristicValue infinite() { return HeuristicValue(kInfinite); }

  constexpr bool is_infinite() const { return value_ == kInfinite; }
  constexpr int value() const { return value_; }
  friend constexpr auto operator<=>(HeuristicValue, HeuristicValue) = default;

 private:
  int value_ = 0;
};

/// h-max of the delete relaxation with unit costs. Infinite iff some goal
/// fluent is unreachable even when deletes are ignored.
HeuristicValue hmax(const PlanningTask& task, const State& state);

/// Reusable h-max evaluator; precomputes precondition indices once per domain.
class HmaxEvaluator {
 public:
  explicit HmaxEvaluator(const DomainModel& domain);
  HeuristicValue operator()(const State& state, const State& goal) const;

 private:
  const DomainModel* domain_;
  std::vector<std::vector<ActionId>> consumers_;  // fluent -> actions with it as precondition
  std::vector<int> pre_count_;
};

struct SearchBudget {
  std::size_t max_expansions = 2'000'000;
  std::optional<std::chrono::milliseconds> max_time;
};

enum class Verdict { Solved, Unsolvable };

struct PlannerResult {
  Verdict verdict = Verdict::Unsolvable;
  Plan plan;  // meaningful when solved
  std::size_t expanded = 0;
  std::size_t generated = 0;
  std::chrono::nanoseconds wall_time{0};

  bool solved() const { return verdict == Verdict::Solved; }
};

/// A* with h-max and a closed set. Optimal for unit costs. Ties: lower h,
/// then lower generating action id, then FIFO. Throws ResourceError when the
/// budget runs out; Unsolvable only after h-max = inf or open-list exhaustion.
PlannerResult optimal_plan(const PlanningTask& task, const SearchBudget& budget = {});

/// Same search with a goal test on generation and an early exit.
bool check_solvable(const PlanningTask& task, const SearchBudget& budget = {});

/// Uninformed breadth-first search; test oracle. Throws Error when the task
/// has more than `max_fluents` fluents.
PlannerResult bfs_oracle(const PlanningTask& task, std::size_t max_fluents = 20);

/// Interface consumed by the alignment engine. Implementations must be safe to
/// call concurrently on distinct tasks.
class Planner {
 public:
  virtual ~Planner() = default;
  virtual PlannerResult solve(const PlanningTask& task) const = 0;
  virtual bool solvable(const PlanningTask& task) const { return solve(task).solved(); }
};

class AStarPlanner : public Planner {
 public:
  explicit AStarPlanner(SearchBudget budget = {}) : budget_(budget) {}
  PlannerResult solve(const PlanningTask& task) const override { return optimal_plan(task, budget_); }
  bool solvable(const PlanningTask& task) const override { return check_solvable(task, budget_); }
  const SearchBudget& budget() const { return budget_; }

 private:
  SearchBudget budget_;
};

/// Runs an external solver on a propositional PDDL rendering of the task.
///
/// `command` is a shell command template; `{domain}`, `{problem}` and `{plan}`
/// are replaced by temporary file paths. The solver is expected to write a
/// plan of `(aN)` steps to `{plan}`. Exit codes 10 and 11 without a plan
/// mean unsolvable; any other failure is a ResourceError. The returned plan
/// is validated and its cost is trusted to be optimal only if the solver is.
class ExternalPlanner : public Planner {
 public:
  explicit ExternalPlanner(std::string command) : command_(std::move(command)) {}
  PlannerResult solve(const PlanningTask& task) const override;

 private:
  std::string command_;
};

/// Wraps another planner and counts invocations.
class CountingPlanner : public Planner {
 public:
  explicit CountingPlanner(const Planner& inner) : inner_(&inner) {}
  PlannerResult solve(const PlanningTask& task) const override {
    ++calls_;
    return inner_->solve(task);
  }
  bool solvable(const PlanningTask& task) const override {
    ++calls_;
    return inner_->solvable(task);
  }
  std::size_t calls() const { return calls_.load(); }

 private:
  const Planner* inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace goalalign::search
