#include "goalalign/task.hpp"

namespace goalalign {

bool DomainModel::well_formed() const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto& a = actions[i];
    if (a.id != i) return false;
    for (const State* s : {&a.pre, &a.add, &a.del}) {
      if (s->universe() != fluent_count) return false;
    }
  }
  return true;
}

Transition apply(const GroundAction& action, const State& state) {
  if (!action.pre.subset_of(state)) {
    return Inapplicable{action.id, 0, (action.pre - state).members()};
  }
  State next = state;
  next -= action.del;
  next |= action.add;
  return next;
}

Transition apply(ActionId action, const State& state, const DomainModel& domain) {
  return apply(domain.action(action), state);
}

Transition simulate(const Plan& plan, const State& state, const DomainModel& domain) {
  State current = state;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    auto next = apply(plan.steps[i], current, domain);
    if (auto* fail = std::get_if<Inapplicable>(&next)) {
      fail->step = i + 1;
      return *fail;
    }
    current = std::move(std::get<State>(next));
  }
  return current;
}

ValidationReport validate_plan(const PlanningTask& task, const Plan& plan) {
  ValidationReport report;
  report.cost = plan.cost();
  auto result = simulate(plan, task.init, task.domain);
  if (auto* fail = std::get_if<Inapplicable>(&result)) {
    report.failure = *fail;
    return report;
  }
  report.final_state = std::get<State>(result);
  report.missing = (task.goal - *report.final_state).members();
  report.satisfied = report.missing.empty();
  return report;
}

}  // namespace goalalign
