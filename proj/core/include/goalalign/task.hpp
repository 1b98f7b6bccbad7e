#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "goalalign/state.hpp"

namespace goalalign {

using ActionId = std::uint32_t;

/// STRIPS action with positive preconditions and unit cost.
struct GroundAction {
  ActionId id = 0;
  std::string name;  // "(move a b)"; informational only
  State pre;
  State add;
  State del;

  static constexpr int cost = 1;
};

struct DomainModel {
  std::size_t fluent_count = 0;
  std::vector<GroundAction> actions;

  const GroundAction& action(ActionId id) const { return actions.at(id); }
  /// Checks contiguous ids and that every set lives in the fluent universe.
  bool well_formed() const;
};

struct PlanningTask {
  DomainModel domain;
  State init;
  State goal;

  /// Same domain and initial state, different goal.
  PlanningTask with_goal(State g) const { return {domain, init, std::move(g)}; }
};

struct Plan {
  std::vector<ActionId> steps;

  std::size_t cost() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Why a transition is undefined. `step` is the 1-based plan index, 0 for a
/// single application.
struct Inapplicable {
  ActionId action = 0;
  std::size_t step = 0;
  std::vector<FluentId> unmet;
};

using Transition = std::variant<State, Inapplicable>;

inline bool defined(const Transition& t) { return std::holds_alternative<State>(t); }

/// (s \ del) ∪ add when pre ⊆ s; Inapplicable otherwise.
Transition apply(const GroundAction& action, const State& state);
Transition apply(ActionId action, const State& state, const DomainModel& domain);

/// Left fold of apply; stops at the first inapplicable step.
Transition simulate(const Plan& plan, const State& state, const DomainModel& domain);

inline bool satisfies(const State& state, const State& goal) { return goal.subset_of(state); }

struct ValidationReport {
  std::optional<State> final_state;
  std::optional<Inapplicable> failure;
  bool satisfied = false;
  std::vector<FluentId> missing;
  std::size_t cost = 0;

  bool valid() const { return final_state && satisfied; }
};

ValidationReport validate_plan(const PlanningTask& task, const Plan& plan);

}  // namespace goalalign
