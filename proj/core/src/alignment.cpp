#include "goalalign/alignment.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace goalalign::align {

void validate_instance(const HaglInstance& in) {
  const std::size_t n = in.robot_domain.fluent_count;
  if (in.human_domain.fluent_count != n) throw InstanceError("robot and human models use different fluent universes");
  for (const State* s : {&in.robot_init, &in.goal_spec, &in.human_init}) {
    if (s->universe() != n) throw InstanceError("state does not match the fluent universe");
  }
  if (!(in.beta > 0.0) || !std::isfinite(in.beta)) throw InstanceError("beta must be a positive finite number");
  for (ActionId a : in.human_plan.steps) {
    if (a >= in.human_domain.actions.size()) throw InstanceError("human plan refers to unknown action " + std::to_string(a));
  }
  State s = expected_state(in);
  if (!satisfies(s, in.goal_spec)) throw InstanceError("human plan does not reach the goal specification in the human model");
}

void validate_hidden_goal(const HaglInstance& in, const HiddenGoal& hidden) {
  if (hidden.g_star.universe() != in.fluent_count()) throw InstanceError("hidden goal does not match the fluent universe");
  if (!in.goal_spec.subset_of(hidden.g_star)) throw InstanceError("hidden goal must contain the goal specification");
  if (!hidden.g_star.subset_of(expected_state(in)))
    throw InstanceError("hidden goal must be contained in the state the human plan produces");
}

bool Oracle::answer(FluentId f) {
  if (auto it = memo_.find(f); it != memo_.end()) return it->second;
  bool a = decide(f);
  memo_.emplace(f, a);
  return a;
}

bool ScriptedOracle::decide(FluentId f) {
  auto it = answers_.find(f);
  if (it == answers_.end()) throw Error("no scripted answer for fluent " + std::to_string(f));
  return it->second;
}

std::unique_ptr<Oracle> make_simulated_oracle(const HiddenGoal& hidden) { return std::make_unique<SimulatedOracle>(hidden); }

State expected_state(const HaglInstance& in) {
  auto result = simulate(in.human_plan, in.human_init, in.human_domain);
  if (auto* fail = std::get_if<Inapplicable>(&result)) {
    const auto& a = in.human_domain.action(fail->action);
    std::string msg = "human plan is inapplicable in the human model at step " + std::to_string(fail->step) + " (" +
                      a.name + "): unmet preconditions";
    for (FluentId f : fail->unmet) msg += " #" + std::to_string(f);
    throw InapplicableHumanPlan(msg, fail->step, fail->action);
  }
  return std::get<State>(std::move(result));
}

namespace {

State singleton(std::size_t n, FluentId f) {
  State s(n);
  s.insert(f);
  return s;
}

}  // namespace

State unachievable_fluents(const HaglInstance& in, const State& expected, const search::Planner& planner) {
  const std::size_t n = in.fluent_count();
  std::vector<FluentId> todo = (expected - in.robot_init).members();
  std::vector<char> bad(todo.size(), 0);
  for (std::size_t i = 0; i < todo.size(); ++i) {
    try {
      bad[i] = !planner.solvable(in.robot_task(singleton(n, todo[i])));
    } catch (const ResourceError& e) {
      throw ResourceError(std::string(e.what()) + " (while checking robot achievability of fluent #" +
                          std::to_string(todo[i]) + ")");
    }
  }
  State out(n);
  for (std::size_t i = 0; i < todo.size(); ++i)
    if (bad[i]) out.insert(todo[i]);
  return out;
}

double probability_from_costs(std::size_t human_cost, std::optional<std::size_t> optimal_cost, double beta) {
  if (!optimal_cost) return 0.0;
  double delta = std::abs(static_cast<double>(human_cost) - static_cast<double>(*optimal_cost));
  return std::exp(-beta * delta);
}

namespace {

std::optional<std::size_t> hypothesis_cost(const HaglInstance& in, FluentId f, const search::Planner& planner) {
  State goal = in.goal_spec;
  goal.insert(f);
  auto r = planner.solve(in.human_task(std::move(goal)));
  if (!r.solved()) return std::nullopt;
  return r.plan.cost();
}

}  // namespace

double fluent_probability(const HaglInstance& in, FluentId f, const search::Planner& planner) {
  return probability_from_costs(in.human_plan.cost(), hypothesis_cost(in, f, planner), in.beta);
}

namespace {

double product_over(const BeliefState& b, std::optional<FluentId> skip) {
  double v = 1.0;
  for (FluentId g : b.unachievable.members()) {
    if (skip && g == *skip) continue;
    v *= b.prob.at(g);
  }
  return v;
}

}  // namespace

double approx_value_in(FluentId f, const BeliefState& b) {
  if (b.unachievable.contains(f)) return 1.0;
  return product_over(b, std::nullopt);
}

double approx_value_out(FluentId f, const BeliefState& b) { return product_over(b, f); }

double query_value(FluentId f, const BeliefState& b) {
  double p = b.prob.at(f);
  double v_in = approx_value_in(f, b);
  double v_out = approx_value_out(f, b);
  // Written as v_out + p (v_in - v_out) so that equal branches give back
  // exactly that value.
  return v_out + p * (v_in - v_out);
}

BeliefState compute_belief(const HaglInstance& in, const search::Planner& planner, const BeliefOptions& options) {
  BeliefState b;
  b.expected_state = expected_state(in);
  b.candidates = (b.expected_state - in.goal_spec).members();
  b.human_plan_cost = in.human_plan.cost();

  std::vector<std::optional<std::size_t>> costs(b.candidates.size());
  detail::parallel_for(b.candidates.size(), options.workers,
               [&](std::size_t i) { costs[i] = hypothesis_cost(in, b.candidates[i], planner); });
  for (std::size_t i = 0; i < b.candidates.size(); ++i) {
    b.hypothesis_cost[b.candidates[i]] = costs[i];
    b.prob[b.candidates[i]] = probability_from_costs(b.human_plan_cost, costs[i], in.beta);
  }
  // F̂ only needs the fluents the robot does not start with; the goal spec is
  // covered by the session's own solvability check.
  b.unachievable = unachievable_fluents(in, b.expected_state - in.goal_spec, planner);
  for (FluentId f : b.candidates) b.qvalue[f] = query_value(f, b);
  return b;
}

std::vector<FluentId> build_queue(const BeliefState& b) {
  std::vector<FluentId> q = b.candidates;
  std::stable_sort(q.begin(), q.end(), [&](FluentId x, FluentId y) {
    double vx = b.qvalue.at(x), vy = b.qvalue.at(y);
    if (vx != vy) return vx > vy;
    double px = b.prob.at(x), py = b.prob.at(y);
    if (px != py) return px > py;
    return x < y;
  });
  return q;
}

int condition_number(Termination t) {
  switch (t) {
    case Termination::UnachievableConfirmed: return 1;
    case Termination::JointConflict: return 2;
    case Termination::SupersetPlan: return 3;
    default: return 0;
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::GoalSpecUnsolvable: return "goal-spec-unsolvable";
    case Termination::ExpectedStateSolvable: return "expected-state-solvable";
    case Termination::UnachievableConfirmed: return "unachievable-confirmed";
    case Termination::JointConflict: return "joint-conflict";
    case Termination::SupersetPlan: return "superset-plan";
    case Termination::QueueExhausted: return "queue-exhausted";
    case Termination::Aborted: return "aborted";
  }
  return "unknown";
}

SessionOutcome run_elicitation(const HaglInstance& in, Oracle& oracle, const search::Planner& planner,
                               const SessionOptions& options) {
  validate_instance(in);
  search::CountingPlanner counted(planner);
  SessionOutcome out;
  out.confirmed = State(in.fluent_count());

  auto finish_plan = [&](Plan plan, State goal, Termination t) {
    out.verdict = SessionVerdict::PlanFound;
    out.plan = std::move(plan);
    out.planned_goal = std::move(goal);
    out.termination = t;
  };
  auto finish_none = [&](Termination t) {
    out.verdict = SessionVerdict::NoPlanExists;
    out.termination = t;
  };
  auto close = [&]() -> SessionOutcome {
    out.query_count = out.transcript.size();
    out.planner_calls = counted.calls();
    if (!out.transcript.empty() && out.verdict != SessionVerdict::Aborted) out.transcript.back().termination = out.termination;
    return std::move(out);
  };

  try {
    const State expected = expected_state(in);
    if (!counted.solvable(in.robot_task(in.goal_spec))) {
      finish_none(Termination::GoalSpecUnsolvable);
      return close();
    }
    if (auto r = counted.solve(in.robot_task(expected)); r.solved()) {
      finish_plan(std::move(r.plan), expected, Termination::ExpectedStateSolvable);
      return close();
    }

    out.belief = compute_belief(in, counted, options.belief);
    const BeliefState& belief = *out.belief;
    std::vector<FluentId> queue = build_queue(belief);

    for (std::size_t head = 0; head < queue.size(); ++head) {
      FluentId f = queue[head];
      QueryRecord rec;
      rec.fluent = f;
      rec.value = belief.qvalue.at(f);
      rec.probability = belief.prob.at(f);
      rec.answer = oracle.answer(f);
      out.transcript.push_back(rec);

      if (rec.answer) {
        out.confirmed.insert(f);
        if (!counted.solvable(in.robot_task(in.goal_spec | out.confirmed))) {
          finish_none(belief.unachievable.contains(f) ? Termination::UnachievableConfirmed : Termination::JointConflict);
          return close();
        }
      } else {
        State candidate_goal = in.goal_spec | out.confirmed;
        for (std::size_t k = head + 1; k < queue.size(); ++k) candidate_goal.insert(queue[k]);
        if (auto r = counted.solve(in.robot_task(candidate_goal)); r.solved()) {
          finish_plan(std::move(r.plan), std::move(candidate_goal), Termination::SupersetPlan);
          return close();
        }
      }
    }

    State final_goal = in.goal_spec | out.confirmed;
    if (auto r = counted.solve(in.robot_task(final_goal)); r.solved()) {
      finish_plan(std::move(r.plan), std::move(final_goal), Termination::QueueExhausted);
    } else {
      finish_none(Termination::QueueExhausted);
    }
    return close();
  } catch (const ResourceError& e) {
    out.verdict = SessionVerdict::Aborted;
    out.termination = Termination::Aborted;
    out.error = e.what();
    out.plan.reset();
    return close();
  }
}

BruteForceValuer::BruteForceValuer(const HaglInstance& instance, const BeliefState& belief,
                                   const search::Planner& planner, std::size_t max_candidates)
    : instance_(&instance), belief_(&belief), planner_(&planner) {
  if (belief.candidates.size() > max_candidates) {
    throw Error("brute-force value limited to " + std::to_string(max_candidates) + " candidates, instance has " +
                std::to_string(belief.candidates.size()));
  }
}

bool BruteForceValuer::unsolvable(const State& goal) {
  auto it = unsolvable_cache_.find(goal);
  if (it != unsolvable_cache_.end()) return it->second;
  bool u = !planner_->solvable(instance_->robot_task(goal));
  unsolvable_cache_.emplace(goal, u);
  return u;
}

double BruteForceValuer::value(FluentId f, Direction direction) {
  const auto& cands = belief_->candidates;
  if (std::find(cands.begin(), cands.end(), f) == cands.end())
    throw std::invalid_argument("fluent #" + std::to_string(f) + " is not a candidate");
  std::vector<FluentId> others;
  for (FluentId g : cands)
    if (g != f) others.push_back(g);

  double total = 0.0;
  const std::size_t subsets = std::size_t{1} << others.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    State goal = instance_->goal_spec;
    if (direction == Direction::In) goal.insert(f);
    double weight = 1.0;
    for (std::size_t i = 0; i < others.size(); ++i) {
      double p = belief_->prob.at(others[i]);
      if (mask >> i & 1U) {
        goal.insert(others[i]);
        weight *= p;
      } else {
        weight *= 1.0 - p;
      }
    }
    if (weight == 0.0) continue;
    if (unsolvable(goal)) total += weight;
  }
  return total;
}

double brute_force_value(const HaglInstance& instance, const BeliefState& belief, FluentId f, Direction direction,
                         const search::Planner& planner, std::size_t max_candidates) {
  BruteForceValuer valuer(instance, belief, planner, max_candidates);
  return valuer.value(f, direction);
}

}  // namespace goalalign::align
