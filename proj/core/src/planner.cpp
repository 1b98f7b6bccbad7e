#include "goalalign/planner.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_map>

#include "goalalign/errors.hpp"
#include "goalalign/pddl.hpp"

namespace goalalign::search {

HmaxEvaluator::HmaxEvaluator(const DomainModel& domain)
    : domain_(&domain), consumers_(domain.fluent_count), pre_count_(domain.actions.size(), 0) {
  for (const auto& a : domain.actions) {
    for (FluentId f : a.pre.members()) consumers_[f].push_back(a.id);
    pre_count_[a.id] = static_cast<int>(a.pre.size());
  }
}

HeuristicValue HmaxEvaluator::operator()(const State& state, const State& goal) const {
  std::size_t remaining = (goal - state).size();
  if (remaining == 0) return HeuristicValue(0);

  std::vector<int> count = pre_count_;
  std::vector<bool> reached(domain_->fluent_count, false);
  std::vector<FluentId> current = state.members();
  for (FluentId f : current) reached[f] = true;
  std::vector<ActionId> ready;
  for (const auto& a : domain_->actions)
    if (count[a.id] == 0) ready.push_back(a.id);

  for (int level = 0;; ++level) {
    for (FluentId f : current)
      for (ActionId a : consumers_[f])
        if (--count[a] == 0) ready.push_back(a);
    std::vector<FluentId> next;
    for (ActionId a : ready) {
      for (FluentId f : domain_->actions[a].add.members()) {
        if (reached[f]) continue;
        reached[f] = true;
        next.push_back(f);
        if (goal.contains(f) && --remaining == 0) return HeuristicValue(level + 1);
      }
    }
    if (next.empty()) return HeuristicValue::infinite();
    ready.clear();
    current = std::move(next);
  }
}

HeuristicValue hmax(const PlanningTask& task, const State& state) { return HmaxEvaluator(task.domain)(state, task.goal); }

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  State state;
  int g = 0;
  int parent = -1;
  ActionId action = 0;
};

struct OpenEntry {
  int f;
  int h;
  ActionId action;
  std::size_t seq;
  std::size_t node;
};

struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    if (a.action != b.action) return a.action > b.action;
    return a.seq > b.seq;
  }
};

Plan extract(const std::vector<Node>& nodes, std::size_t idx) {
  Plan plan;
  for (int i = static_cast<int>(idx); nodes[static_cast<std::size_t>(i)].parent >= 0; i = nodes[static_cast<std::size_t>(i)].parent)
    plan.steps.push_back(nodes[static_cast<std::size_t>(i)].action);
  std::reverse(plan.steps.begin(), plan.steps.end());
  return plan;
}

class BudgetGuard {
 public:
  explicit BudgetGuard(const SearchBudget& b) : budget_(b), start_(Clock::now()) {}
  void on_expand(std::size_t expanded) const {
    if (expanded > budget_.max_expansions)
      throw ResourceError("search exceeded node budget of " + std::to_string(budget_.max_expansions) + " expansions");
    if (budget_.max_time && (expanded & 255) == 0 && Clock::now() - start_ > *budget_.max_time)
      throw ResourceError("search exceeded time budget of " + std::to_string(budget_.max_time->count()) + " ms");
  }
  std::chrono::nanoseconds elapsed() const { return Clock::now() - start_; }

 private:
  SearchBudget budget_;
  Clock::time_point start_;
};

PlannerResult astar(const PlanningTask& task, const SearchBudget& budget, bool stop_on_generation) {
  BudgetGuard guard(budget);
  PlannerResult result;
  HmaxEvaluator h(task.domain);

  auto finish = [&](Verdict v, Plan plan) {
    result.verdict = v;
    result.plan = std::move(plan);
    result.wall_time = guard.elapsed();
    return result;
  };

  HeuristicValue h0 = h(task.init, task.goal);
  if (h0.is_infinite()) return finish(Verdict::Unsolvable, {});

  std::vector<Node> nodes;
  std::unordered_map<State, int> best_g;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  std::size_t seq = 0;

  nodes.push_back({task.init, 0, -1, 0});
  best_g.emplace(task.init, 0);
  open.push({h0.value(), h0.value(), 0, seq++, 0});
  if (stop_on_generation && satisfies(task.init, task.goal)) return finish(Verdict::Solved, {});

  while (!open.empty()) {
    OpenEntry top = open.top();
    open.pop();
    const int g = nodes[top.node].g;
    if (best_g[nodes[top.node].state] < g) continue;
    if (satisfies(nodes[top.node].state, task.goal)) return finish(Verdict::Solved, extract(nodes, top.node));

    ++result.expanded;
    guard.on_expand(result.expanded);
    const State current = nodes[top.node].state;
    for (const auto& a : task.domain.actions) {
      if (!a.pre.subset_of(current)) continue;
      State next = current;
      next -= a.del;
      next |= a.add;
      ++result.generated;
      const int ng = g + GroundAction::cost;
      auto it = best_g.find(next);
      if (it != best_g.end() && it->second <= ng) continue;
      HeuristicValue hv = h(next, task.goal);
      if (hv.is_infinite()) continue;
      if (it != best_g.end()) {
        it->second = ng;
      } else {
        best_g.emplace(next, ng);
      }
      nodes.push_back({std::move(next), ng, static_cast<int>(top.node), a.id});
      std::size_t idx = nodes.size() - 1;
      if (stop_on_generation && satisfies(nodes[idx].state, task.goal)) return finish(Verdict::Solved, extract(nodes, idx));
      open.push({ng + hv.value(), hv.value(), a.id, seq++, idx});
    }
  }
  return finish(Verdict::Unsolvable, {});
}

}  // namespace

PlannerResult optimal_plan(const PlanningTask& task, const SearchBudget& budget) { return astar(task, budget, false); }

bool check_solvable(const PlanningTask& task, const SearchBudget& budget) { return astar(task, budget, true).solved(); }

PlannerResult bfs_oracle(const PlanningTask& task, std::size_t max_fluents) {
  if (task.domain.fluent_count > max_fluents) {
    throw Error("bfs oracle limited to " + std::to_string(max_fluents) + " fluents, task has " +
                std::to_string(task.domain.fluent_count));
  }
  auto start = Clock::now();
  PlannerResult result;
  std::vector<Node> nodes{{task.init, 0, -1, 0}};
  std::unordered_map<State, bool> seen{{task.init, true}};
  std::deque<std::size_t> frontier{0};
  auto done = [&](Verdict v, Plan p) {
    result.verdict = v;
    result.plan = std::move(p);
    result.wall_time = Clock::now() - start;
    return result;
  };
  if (satisfies(task.init, task.goal)) return done(Verdict::Solved, {});
  while (!frontier.empty()) {
    std::size_t idx = frontier.front();
    frontier.pop_front();
    ++result.expanded;
    for (const auto& a : task.domain.actions) {
      auto next = apply(a, nodes[idx].state);
      if (!defined(next)) continue;
      ++result.generated;
      State s = std::get<State>(std::move(next));
      if (!seen.emplace(s, true).second) continue;
      nodes.push_back({std::move(s), nodes[idx].g + 1, static_cast<int>(idx), a.id});
      if (satisfies(nodes.back().state, task.goal)) return done(Verdict::Solved, extract(nodes, nodes.size() - 1));
      frontier.push_back(nodes.size() - 1);
    }
  }
  return done(Verdict::Unsolvable, {});
}

namespace {

std::string replace_all(std::string s, const std::string& key, const std::string& value) {
  for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size()))
    s.replace(pos, key.size(), value);
  return s;
}

std::string shell_quote(const std::string& s) { return "'" + replace_all(s, "'", "'\\''") + "'"; }

std::filesystem::path make_workdir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() /
             ("goalalign-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

PlannerResult ExternalPlanner::solve(const PlanningTask& task) const {
  auto start = Clock::now();
  PlannerResult result;
  if (hmax(task, task.init).is_infinite()) {
    result.verdict = Verdict::Unsolvable;
    return result;
  }

  auto dir = make_workdir();
  struct Cleanup {
    std::filesystem::path p;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(p, ec);
    }
  } cleanup{dir};
  auto domain = dir / "domain.pddl";
  auto problem = dir / "problem.pddl";
  auto plan_path = dir / "plan.txt";
  std::ofstream(domain) << pddl::to_pddl_domain(task.domain);
  std::ofstream(problem) << pddl::to_pddl_problem(task);

  std::string cmd = replace_all(command_, "{domain}", shell_quote(domain.string()));
  cmd = replace_all(cmd, "{problem}", shell_quote(problem.string()));
  cmd = replace_all(cmd, "{plan}", shell_quote(plan_path.string()));
  cmd = "( " + cmd + " ) > " + shell_quote((dir / "stdout.txt").string()) + " 2>&1";

  int status = std::system(cmd.c_str());
  int code = status == -1 ? -1 : (WIFEXITED(status) ? WEXITSTATUS(status) : -1);
  bool have_plan = std::filesystem::exists(plan_path);
  result.wall_time = Clock::now() - start;
  if (!have_plan) {
    if (code == 10 || code == 11) {
      result.verdict = Verdict::Unsolvable;
      return result;
    }
    throw ResourceError("external planner failed (exit " + std::to_string(code) + ") without a plan");
  }

  std::ifstream in(plan_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = line.substr(0, line.find(';'));
    auto open = line.find('(');
    if (open == std::string::npos) continue;
    auto close = line.find(')', open);
    std::string name = line.substr(open + 1, close == std::string::npos ? std::string::npos : close - open - 1);
    std::istringstream tokens(name);
    std::string tok;
    tokens >> tok;
    if (tok.size() < 2 || (tok[0] != 'a' && tok[0] != 'A')) throw ResolutionError("unexpected step '" + name + "'", line_no);
    ActionId id = static_cast<ActionId>(std::stoul(tok.substr(1)));
    if (id >= task.domain.actions.size()) throw ResolutionError("action id out of range: " + tok, line_no);
    result.plan.steps.push_back(id);
  }
  if (!validate_plan(task, result.plan).valid()) throw ResourceError("external planner returned an invalid plan");
  result.verdict = Verdict::Solved;
  return result;
}

}  // namespace goalalign::search
