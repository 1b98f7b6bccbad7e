#pragma once

// STRIPS + typing subset of PDDL: parsing, grounding, plan files and
// complement-fluent compilation.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "goalalign/task.hpp"

namespace goalalign::pddl {

struct TypedName {
  std::string name;
  std::string type = "object";
};

struct AtomAst {
  std::string predicate;
  std::vector<std::string> args;  // "?x" variables or object names
  std::size_t line = 0;
  std::size_t column = 0;
};

struct PredicateSchema {
  std::string name;
  std::vector<TypedName> params;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  std::vector<AtomAst> pre;
  std::vector<AtomAst> add;
  std::vector<AtomAst> del;
};

struct DomainAst {
  std::string name;
  std::vector<std::string> requirements;
  std::map<std::string, std::string> types;  // type -> parent; "object" is the root and maps to ""
  std::vector<TypedName> constants;
  std::vector<PredicateSchema> predicates;
  std::vector<ActionSchema> actions;

  const PredicateSchema* predicate(std::string_view name) const;
  const ActionSchema* action(std::string_view name) const;
  /// True if `type` equals `ancestor` or descends from it.
  bool is_subtype(std::string_view type, std::string_view ancestor) const;
};

struct ProblemAst {
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  std::vector<AtomAst> init;
  std::vector<AtomAst> goal;
};

/// Throws ParseError / UnsupportedConstruct.
DomainAst parse_domain(std::string_view text);
/// Throws ParseError on syntax, typing or arity problems.
ProblemAst parse_problem(std::string_view text, const DomainAst& domain);

/// Canonical atom text, e.g. "(on a b)" or "(handempty)".
std::string atom_text(std::string_view predicate, const std::vector<std::string>& args);
/// Normalizes user-written atom text ("( ON A  b )" -> "(on a b)"). Throws ParseError.
std::string canonical_atom(std::string_view text);

/// Bijection between ground atom text and dense fluent ids.
class FluentTable {
 public:
  FluentTable() = default;
  /// Ids follow the order of `atoms`; callers pass them sorted.
  explicit FluentTable(std::vector<std::string> atoms);

  std::size_t size() const { return names_.size(); }
  const std::string& name(FluentId id) const { return names_.at(id); }
  std::optional<FluentId> find(std::string_view atom) const;
  /// Like find, but throws Error on unknown atoms.
  FluentId require(std::string_view atom) const;
  FluentId append(std::string atom);
  const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const FluentTable& a, const FluentTable& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, FluentId> ids_;
};

struct GroundingStats {
  std::size_t fluents = 0;
  std::size_t actions_enumerated = 0;
  std::size_t actions = 0;  // after static pruning
};

struct GroundingOptions {
  std::size_t max_ground_actions = 5'000'000;
  bool prune_static = true;
};

struct GroundingResult {
  PlanningTask task;
  FluentTable table;
  GroundingStats stats;
  std::map<std::string, std::size_t> schema_arity;
  std::unordered_map<std::string, ActionId> action_index;  // canonical "(name args)" -> id

  std::string describe(const State& s) const;
};

/// Enumerates all type-consistent bindings; throws ResourceError past the cap.
GroundingResult ground(const DomainAst& domain, const ProblemAst& problem, const GroundingOptions& options = {});

/// Parses newline-separated "(action obj ...)" steps; ';' starts a comment.
/// Tolerates "k:" prefixes and "[d]" suffixes emitted by common planners.
Plan parse_plan(std::string_view text, const GroundingResult& result);
std::string format_plan(const Plan& plan, const DomainModel& domain);

/// Adds one fluent "(not <atom>)" per target, appended after the existing
/// universe in ascending target order. Actions adding a target delete its
/// complement and actions deleting it (without re-adding) add the complement.
DomainModel complement_domain(const DomainModel& domain, const std::vector<FluentId>& targets);
/// Extends `s` to the compiled universe: complement set iff target absent.
State complement_state(const State& s, const std::vector<FluentId>& targets, std::size_t base_count);
/// Throws Error when a target id is outside the universe.
GroundingResult compile_complements(const GroundingResult& result, const std::vector<FluentId>& targets);

/// Propositional PDDL rendering of a grounded task, for external planners.
/// Fluent i becomes predicate "f<i>" and action j becomes "a<j>".
std::string to_pddl_domain(const DomainModel& domain);
std::string to_pddl_problem(const PlanningTask& task);

}  // namespace goalalign::pddl
