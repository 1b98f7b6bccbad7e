#include "goalalign/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "goalalign/errors.hpp"

namespace goalalign::pddl {
namespace {

struct Sexpr {
  bool list = false;
  std::string atom;
  std::vector<Sexpr> items;
  std::size_t line = 0;
  std::size_t column = 0;

  bool is_atom(std::string_view s) const { return !list && atom == s; }
  std::string head() const { return list && !items.empty() && !items[0].list ? items[0].atom : std::string{}; }
};

[[noreturn]] void fail(const Sexpr& at, const std::string& msg) { throw ParseError(msg, at.line, at.column); }
[[noreturn]] void unsupported(const Sexpr& at, const std::string& msg) {
  throw UnsupportedConstruct("unsupported construct: " + msg, at.line, at.column);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<Sexpr> read_all() {
    std::vector<Sexpr> out;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) return out;
      out.push_back(read());
    }
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Sexpr read() {
    Sexpr e;
    e.line = line_;
    e.column = col_;
    char c = text_[pos_];
    if (c == ')') throw ParseError("unexpected ')'", line_, col_);
    if (c == '(') {
      e.list = true;
      advance();
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("unterminated list opened here", e.line, e.column);
        if (text_[pos_] == ')') {
          advance();
          return e;
        }
        e.items.push_back(read());
      }
    }
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
      advance();
    }
    e.atom = lower(text_.substr(start, pos_ - start));
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

Sexpr single_define(std::string_view text, std::string_view kind) {
  std::vector<Sexpr> holder = Reader(text).read_all();
  if (holder.size() != 1) {
    std::size_t line = holder.size() > 1 ? holder[1].line : 1;
    std::size_t col = holder.size() > 1 ? holder[1].column : 1;
    throw ParseError("expected exactly one (define ...) form", line, col);
  }
  Sexpr top = std::move(holder[0]);
  if (!top.list || top.head() != "define") fail(top, "expected (define ...)");
  if (top.items.size() < 2 || !top.items[1].list || top.items[1].items.size() != 2 ||
      !top.items[1].items[0].is_atom(kind) || top.items[1].items[1].list) {
    fail(top.items.size() > 1 ? top.items[1] : top, "expected (" + std::string(kind) + " <name>)");
  }
  return top;
}

const std::set<std::string, std::less<>> kUnsupportedRequirements = {
    ":negative-preconditions", ":disjunctive-preconditions", ":equality", ":existential-preconditions",
    ":universal-preconditions", ":quantified-preconditions", ":conditional-effects", ":fluents",
    ":numeric-fluents", ":object-fluents", ":adl", ":durative-actions", ":duration-inequalities",
    ":continuous-effects", ":derived-predicates", ":timed-initial-literals", ":preferences",
    ":constraints", ":action-costs"};

std::vector<std::string> parse_requirements(const Sexpr& section) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < section.items.size(); ++i) {
    const Sexpr& r = section.items[i];
    if (r.list) fail(r, "requirement flag expected");
    if (r.atom == ":strips" || r.atom == ":typing") {
      out.push_back(r.atom);
    } else if (kUnsupportedRequirements.count(r.atom)) {
      unsupported(r, "requirement " + r.atom + " (only :strips and :typing are supported)");
    } else {
      fail(r, "unknown requirement flag " + r.atom);
    }
  }
  return out;
}

/// "a b - t c" -> {a:t, b:t, c:object}.
std::vector<std::pair<TypedName, const Sexpr*>> parse_typed_list(const std::vector<Sexpr>& items, std::size_t from) {
  std::vector<std::pair<TypedName, const Sexpr*>> out;
  std::size_t pending = 0;
  for (std::size_t i = from; i < items.size(); ++i) {
    const Sexpr& it = items[i];
    if (it.list) fail(it, "name expected in typed list");
    if (it.atom == "-") {
      if (i + 1 >= items.size()) fail(it, "type name expected after '-'");
      const Sexpr& type = items[++i];
      if (type.list) {
        if (type.head() == "either") unsupported(type, "(either ...) types");
        fail(type, "type name expected after '-'");
      }
      if (pending == 0) fail(it, "'-' without preceding names");
      for (std::size_t k = out.size() - pending; k < out.size(); ++k) out[k].first.type = type.atom;
      pending = 0;
      continue;
    }
    out.push_back({TypedName{it.atom, "object"}, &it});
    ++pending;
  }
  return out;
}

void require_type(const DomainAst& d, const std::string& type, const Sexpr& at) {
  if (!d.types.count(type)) fail(at, "undeclared type '" + type + "'");
}

bool compatible(const DomainAst& d, const std::string& a, const std::string& b) {
  return d.is_subtype(a, b) || d.is_subtype(b, a);
}

AtomAst parse_atom(const Sexpr& e, const DomainAst& d) {
  if (!e.list || e.items.empty() || e.items[0].list) fail(e, "atom expected");
  AtomAst atom;
  atom.predicate = e.items[0].atom;
  atom.line = e.line;
  atom.column = e.column;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    if (e.items[i].list) fail(e.items[i], "atom arguments must be names");
    atom.args.push_back(e.items[i].atom);
  }
  if (atom.predicate == "=") unsupported(e, "equality atoms");
  const PredicateSchema* p = d.predicate(atom.predicate);
  if (!p) fail(e, "undeclared predicate '" + atom.predicate + "'");
  if (p->params.size() != atom.args.size()) {
    fail(e, "arity mismatch for '" + atom.predicate + "': expected " + std::to_string(p->params.size()) + ", got " +
                std::to_string(atom.args.size()));
  }
  return atom;
}

/// Checks argument binding and type compatibility inside a schema.
void check_schema_atom(const AtomAst& atom, const Sexpr& at, const DomainAst& d, const std::vector<TypedName>& params) {
  const PredicateSchema* p = d.predicate(atom.predicate);
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    const std::string& arg = atom.args[i];
    std::string type;
    if (!arg.empty() && arg[0] == '?') {
      auto it = std::find_if(params.begin(), params.end(), [&](const TypedName& t) { return t.name == arg; });
      if (it == params.end()) fail(at, "unbound variable " + arg);
      type = it->type;
    } else {
      auto it = std::find_if(d.constants.begin(), d.constants.end(), [&](const TypedName& t) { return t.name == arg; });
      if (it == d.constants.end()) fail(at, "unknown constant '" + arg + "'");
      type = it->type;
    }
    if (!compatible(d, type, p->params[i].type)) {
      fail(at, "argument " + arg + " of type " + type + " does not fit parameter of type " + p->params[i].type +
                   " in '" + atom.predicate + "'");
    }
  }
}

void parse_precondition(const Sexpr& e, const DomainAst& d, std::vector<AtomAst>& out) {
  if (!e.list) fail(e, "precondition must be a list");
  if (e.items.empty()) return;
  std::string head = e.head();
  if (head == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) parse_precondition(e.items[i], d, out);
    return;
  }
  if (head == "not") unsupported(e, "negative precondition");
  if (head == "or" || head == "imply" || head == "exists" || head == "forall")
    unsupported(e, "'" + head + "' in precondition");
  out.push_back(parse_atom(e, d));
}

void parse_effect(const Sexpr& e, const DomainAst& d, ActionSchema& a) {
  if (!e.list) fail(e, "effect must be a list");
  if (e.items.empty()) return;
  std::string head = e.head();
  if (head == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) parse_effect(e.items[i], d, a);
    return;
  }
  if (head == "not") {
    if (e.items.size() != 2) fail(e, "(not <atom>) expected");
    a.del.push_back(parse_atom(e.items[1], d));
    return;
  }
  if (head == "when") unsupported(e, "conditional effect");
  if (head == "forall") unsupported(e, "universal effect");
  if (head == "increase" || head == "decrease" || head == "assign" || head == "scale-up" || head == "scale-down")
    unsupported(e, "numeric effect");
  a.add.push_back(parse_atom(e, d));
}

std::vector<TypedName> parse_parameters(const Sexpr& list, const DomainAst& d) {
  if (!list.list) fail(list, "parameter list expected");
  std::vector<TypedName> params;
  for (auto& [tn, at] : parse_typed_list(list.items, 0)) {
    if (tn.name.empty() || tn.name[0] != '?') fail(*at, "parameter names must start with '?'");
    require_type(d, tn.type, *at);
    for (const auto& p : params)
      if (p.name == tn.name) fail(*at, "duplicate parameter " + tn.name);
    params.push_back(tn);
  }
  return params;
}

ActionSchema parse_action(const Sexpr& sec, const DomainAst& d) {
  if (sec.items.size() < 2 || sec.items[1].list) fail(sec, "action name expected");
  ActionSchema a;
  a.name = sec.items[1].atom;
  const Sexpr* pre = nullptr;
  const Sexpr* eff = nullptr;
  for (std::size_t i = 2; i < sec.items.size(); i += 2) {
    const Sexpr& key = sec.items[i];
    if (key.list) fail(key, "action keyword expected");
    if (i + 1 >= sec.items.size()) fail(key, "value expected after " + key.atom);
    const Sexpr& val = sec.items[i + 1];
    if (key.atom == ":parameters") {
      a.params = parse_parameters(val, d);
    } else if (key.atom == ":precondition") {
      pre = &val;
    } else if (key.atom == ":effect") {
      eff = &val;
    } else {
      unsupported(key, "action field " + key.atom);
    }
  }
  if (pre) {
    parse_precondition(*pre, d, a.pre);
    for (const auto& atom : a.pre) check_schema_atom(atom, *pre, d, a.params);
  }
  if (eff) {
    parse_effect(*eff, d, a);
    for (const auto& atom : a.add) check_schema_atom(atom, *eff, d, a.params);
    for (const auto& atom : a.del) check_schema_atom(atom, *eff, d, a.params);
  }
  return a;
}

std::vector<std::string> objects_of(const std::vector<TypedName>& objects, const DomainAst& d, const std::string& type) {
  std::vector<std::string> out;
  for (const auto& o : objects)
    if (d.is_subtype(o.type, type)) out.push_back(o.name);
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

const PredicateSchema* DomainAst::predicate(std::string_view n) const {
  for (const auto& p : predicates)
    if (p.name == n) return &p;
  return nullptr;
}

const ActionSchema* DomainAst::action(std::string_view n) const {
  for (const auto& a : actions)
    if (a.name == n) return &a;
  return nullptr;
}

bool DomainAst::is_subtype(std::string_view type, std::string_view ancestor) const {
  std::string cur(type);
  for (std::size_t guard = 0; guard <= types.size() + 1; ++guard) {
    if (cur == ancestor) return true;
    auto it = types.find(cur);
    if (it == types.end() || it->second.empty()) return false;
    cur = it->second;
  }
  return false;
}

DomainAst parse_domain(std::string_view text) {
  const Sexpr top = single_define(text, "domain");
  DomainAst d;
  d.name = top.items[1].items[1].atom;
  d.types["object"] = "";
  for (std::size_t i = 2; i < top.items.size(); ++i) {
    const Sexpr& sec = top.items[i];
    std::string head = sec.head();
    if (head.empty()) fail(sec, "domain section expected");
    if (head == ":requirements") {
      d.requirements = parse_requirements(sec);
    } else if (head == ":types") {
      for (auto& [tn, at] : parse_typed_list(sec.items, 1)) {
        if (tn.name == "object") continue;
        d.types[tn.name] = tn.type;
        if (!d.types.count(tn.type)) d.types[tn.type] = "object";
      }
      for (const auto& [t, parent] : d.types) {
        std::string cur = t;
        for (std::size_t steps = 0; !cur.empty(); ++steps) {
          if (steps > d.types.size()) fail(sec, "cyclic type hierarchy involving '" + t + "'");
          cur = d.types.at(cur);
        }
      }
    } else if (head == ":constants") {
      for (auto& [tn, at] : parse_typed_list(sec.items, 1)) {
        require_type(d, tn.type, *at);
        d.constants.push_back(tn);
      }
    } else if (head == ":predicates") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) {
        const Sexpr& p = sec.items[k];
        if (!p.list || p.items.empty() || p.items[0].list) fail(p, "predicate declaration expected");
        PredicateSchema ps;
        ps.name = p.items[0].atom;
        if (d.predicate(ps.name)) fail(p, "duplicate predicate '" + ps.name + "'");
        for (auto& [tn, at] : parse_typed_list(p.items, 1)) {
          require_type(d, tn.type, *at);
          ps.params.push_back(tn);
        }
        d.predicates.push_back(std::move(ps));
      }
    } else if (head == ":action") {
      ActionSchema a = parse_action(sec, d);
      if (d.action(a.name)) fail(sec, "duplicate action '" + a.name + "'");
      d.actions.push_back(std::move(a));
    } else if (head == ":functions" || head == ":derived" || head == ":durative-action" || head == ":axiom" ||
               head == ":constraints") {
      unsupported(sec, head + " section");
    } else {
      fail(sec, "unknown domain section " + head);
    }
  }
  return d;
}

ProblemAst parse_problem(std::string_view text, const DomainAst& d) {
  const Sexpr top = single_define(text, "problem");
  ProblemAst p;
  p.name = top.items[1].items[1].atom;

  auto resolve_object = [&](const std::string& name) -> const TypedName* {
    for (const auto& o : p.objects)
      if (o.name == name) return &o;
    for (const auto& c : d.constants)
      if (c.name == name) return &c;
    return nullptr;
  };
  auto ground_atom = [&](const Sexpr& e) {
    if (e.head() == "not") unsupported(e, "negative literal");
    AtomAst atom = parse_atom(e, d);
    const PredicateSchema* ps = d.predicate(atom.predicate);
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      const std::string& arg = atom.args[i];
      if (!arg.empty() && arg[0] == '?') fail(e, "variable " + arg + " in ground atom");
      const TypedName* obj = resolve_object(arg);
      if (!obj) fail(e, "unknown object '" + arg + "'");
      if (!d.is_subtype(obj->type, ps->params[i].type)) {
        fail(e, "object " + arg + " of type " + obj->type + " does not fit parameter of type " + ps->params[i].type +
                    " in '" + atom.predicate + "'");
      }
    }
    return atom;
  };

  for (std::size_t i = 2; i < top.items.size(); ++i) {
    const Sexpr& sec = top.items[i];
    std::string head = sec.head();
    if (head.empty()) fail(sec, "problem section expected");
    if (head == ":domain") {
      if (sec.items.size() != 2 || sec.items[1].list) fail(sec, "(:domain <name>) expected");
      p.domain_name = sec.items[1].atom;
      if (p.domain_name != d.name) fail(sec, "problem refers to domain '" + p.domain_name + "', not '" + d.name + "'");
    } else if (head == ":requirements") {
      parse_requirements(sec);
    } else if (head == ":objects") {
      for (auto& [tn, at] : parse_typed_list(sec.items, 1)) {
        if (!d.types.count(tn.type)) fail(*at, "unknown object type '" + tn.type + "'");
        if (resolve_object(tn.name)) fail(*at, "duplicate object '" + tn.name + "'");
        p.objects.push_back(tn);
      }
    } else if (head == ":init") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) {
        const Sexpr& e = sec.items[k];
        if (e.head() == "=") unsupported(e, "numeric initial value");
        p.init.push_back(ground_atom(e));
      }
    } else if (head == ":goal") {
      if (sec.items.size() != 2) fail(sec, "(:goal <formula>) expected");
      std::vector<const Sexpr*> stack{&sec.items[1]};
      while (!stack.empty()) {
        const Sexpr* e = stack.back();
        stack.pop_back();
        if (!e->list) fail(*e, "goal formula expected");
        if (e->items.empty()) continue;
        std::string h = e->head();
        if (h == "and") {
          for (auto it = e->items.rbegin(); it + 1 != e->items.rend(); ++it) stack.push_back(&*it);
          continue;
        }
        if (h == "or" || h == "imply" || h == "exists" || h == "forall") unsupported(*e, "'" + h + "' in goal");
        p.goal.push_back(ground_atom(*e));
      }
    } else if (head == ":metric") {
      unsupported(sec, ":metric");
    } else {
      fail(sec, "unknown problem section " + head);
    }
  }
  return p;
}

std::string atom_text(std::string_view predicate, const std::vector<std::string>& args) {
  std::string s = "(";
  s += predicate;
  for (const auto& a : args) {
    s += ' ';
    s += a;
  }
  s += ')';
  return s;
}

std::string canonical_atom(std::string_view text) {
  auto items = Reader(text).read_all();
  if (items.size() != 1 || !items[0].list || items[0].items.empty()) throw ParseError("atom expected: '" + std::string(text) + "'", 0, 0);
  const Sexpr& e = items[0];
  // complement fluents: (not (p a))
  if (e.head() == "not" && e.items.size() == 2 && e.items[1].list) {
    std::string inner;
    std::vector<std::string> args;
    for (const auto& it : e.items[1].items) {
      if (it.list) throw ParseError("atom expected: '" + std::string(text) + "'", 0, 0);
      args.push_back(it.atom);
    }
    if (args.empty()) throw ParseError("atom expected: '" + std::string(text) + "'", 0, 0);
    std::string pred = args.front();
    args.erase(args.begin());
    return "(not " + atom_text(pred, args) + ")";
  }
  std::vector<std::string> args;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    if (e.items[i].list) throw ParseError("atom expected: '" + std::string(text) + "'", 0, 0);
    args.push_back(e.items[i].atom);
  }
  if (e.items[0].list) throw ParseError("atom expected: '" + std::string(text) + "'", 0, 0);
  return atom_text(e.items[0].atom, args);
}

FluentTable::FluentTable(std::vector<std::string> atoms) {
  for (auto& a : atoms) append(std::move(a));
}

std::optional<FluentId> FluentTable::find(std::string_view atom) const {
  auto it = ids_.find(std::string(atom));
  if (it != ids_.end()) return it->second;
  try {
    it = ids_.find(canonical_atom(atom));
  } catch (const ParseError&) {
    return std::nullopt;
  }
  if (it != ids_.end()) return it->second;
  return std::nullopt;
}

FluentId FluentTable::require(std::string_view atom) const {
  if (auto id = find(atom)) return *id;
  throw Error("unknown fluent " + std::string(atom));
}

FluentId FluentTable::append(std::string atom) {
  auto id = static_cast<FluentId>(names_.size());
  auto [it, inserted] = ids_.emplace(atom, id);
  if (!inserted) throw Error("duplicate fluent " + atom);
  names_.push_back(std::move(atom));
  return id;
}

std::string GroundingResult::describe(const State& s) const {
  std::string out = "{";
  bool first = true;
  for (FluentId f : s.members()) {
    if (!first) out += ", ";
    first = false;
    out += f < table.size() ? table.name(f) : "#" + std::to_string(f);
  }
  return out + "}";
}

GroundingResult ground(const DomainAst& d, const ProblemAst& p, const GroundingOptions& options) {
  std::vector<TypedName> objects = d.constants;
  objects.insert(objects.end(), p.objects.begin(), p.objects.end());
  std::sort(objects.begin(), objects.end(), [](const TypedName& a, const TypedName& b) { return a.name < b.name; });

  auto product_size = [&](const std::vector<TypedName>& params) {
    std::size_t n = 1;
    for (const auto& t : params) {
      std::size_t k = objects_of(objects, d, t.type).size();
      if (k == 0) return std::size_t{0};
      if (n > options.max_ground_actions / k + 1) return options.max_ground_actions + 1;
      n *= k;
    }
    return n;
  };

  std::size_t atom_total = 0;
  for (const auto& ps : d.predicates) atom_total += product_size(ps.params);
  if (atom_total > options.max_ground_actions)
    throw ResourceError("grounding would produce more than " + std::to_string(options.max_ground_actions) + " fluents");
  std::size_t action_total = 0;
  for (const auto& as : d.actions) {
    action_total += product_size(as.params);
    if (action_total > options.max_ground_actions)
      throw ResourceError("grounding would produce more than " + std::to_string(options.max_ground_actions) +
                          " ground actions");
  }

  // Enumerate bindings of `params` in odometer order over name-sorted objects.
  auto for_each_binding = [&](const std::vector<TypedName>& params, auto&& fn) {
    std::vector<std::vector<std::string>> domains;
    for (const auto& t : params) {
      domains.push_back(objects_of(objects, d, t.type));
      if (domains.back().empty()) return;
    }
    std::vector<std::size_t> idx(params.size(), 0);
    std::vector<std::string> binding(params.size());
    for (;;) {
      for (std::size_t i = 0; i < params.size(); ++i) binding[i] = domains[i][idx[i]];
      fn(binding);
      std::size_t k = params.size();
      while (k > 0) {
        --k;
        if (++idx[k] < domains[k].size()) break;
        idx[k] = 0;
        if (k == 0) return;
      }
      if (params.empty()) return;
    }
  };

  std::vector<std::string> atoms;
  atoms.reserve(atom_total);
  for (const auto& ps : d.predicates)
    for_each_binding(ps.params, [&](const std::vector<std::string>& b) { atoms.push_back(atom_text(ps.name, b)); });
  std::sort(atoms.begin(), atoms.end());

  GroundingResult r;
  r.table = FluentTable(std::move(atoms));
  const std::size_t n = r.table.size();
  r.stats.fluents = n;

  auto to_state = [&](const std::vector<AtomAst>& list) {
    State s(n);
    for (const auto& a : list) s.insert(r.table.require(atom_text(a.predicate, a.args)));
    return s;
  };
  r.task.init = to_state(p.init);
  r.task.goal = to_state(p.goal);
  r.task.domain.fluent_count = n;

  std::vector<GroundAction> enumerated;
  for (const auto& as : d.actions) {
    r.schema_arity[as.name] = as.params.size();
    for_each_binding(as.params, [&](const std::vector<std::string>& b) {
      ++r.stats.actions_enumerated;
      auto subst = [&](const AtomAst& a) {
        std::vector<std::string> args;
        for (const auto& x : a.args) {
          if (!x.empty() && x[0] == '?') {
            auto it = std::find_if(as.params.begin(), as.params.end(), [&](const TypedName& t) { return t.name == x; });
            args.push_back(b[static_cast<std::size_t>(it - as.params.begin())]);
          } else {
            args.push_back(x);
          }
        }
        return atom_text(a.predicate, args);
      };
      GroundAction ga;
      ga.name = atom_text(as.name, b);
      ga.pre = State(n);
      ga.add = State(n);
      ga.del = State(n);
      for (const auto& a : as.pre) {
        auto id = r.table.find(subst(a));
        if (!id) return;  // type-inconsistent precondition never holds
        ga.pre.insert(*id);
      }
      for (const auto& a : as.add) {
        std::string t = subst(a);
        auto id = r.table.find(t);
        if (!id) throw Error("action " + ga.name + " adds type-inconsistent atom " + t);
        ga.add.insert(*id);
      }
      for (const auto& a : as.del)
        if (auto id = r.table.find(subst(a))) ga.del.insert(*id);
      enumerated.push_back(std::move(ga));
    });
  }

  State possible = r.task.init;
  if (options.prune_static)
    for (const auto& a : enumerated) possible |= a.add;
  for (auto& a : enumerated) {
    if (options.prune_static && !a.pre.subset_of(possible)) continue;
    a.id = static_cast<ActionId>(r.task.domain.actions.size());
    r.action_index.emplace(a.name, a.id);
    r.task.domain.actions.push_back(std::move(a));
  }
  r.stats.actions = r.task.domain.actions.size();
  return r;
}

Plan parse_plan(std::string_view text, const GroundingResult& result) {
  Plan plan;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find(';'));
    line = trim(line);
    if (line.empty()) continue;
    auto open = line.find('(');
    auto close = line.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw ResolutionError("expected (action obj ...), got '" + line + "'", line_no);
    std::istringstream tokens(line.substr(open + 1, close - open - 1));
    std::vector<std::string> parts;
    for (std::string tok; tokens >> tok;) parts.push_back(lower(tok));
    if (parts.empty()) throw ResolutionError("empty action", line_no);
    std::string name = parts.front();
    parts.erase(parts.begin());
    auto arity = result.schema_arity.find(name);
    if (arity == result.schema_arity.end()) throw ResolutionError("unknown action '" + name + "'", line_no);
    if (arity->second != parts.size()) {
      throw ResolutionError("action '" + name + "' expects " + std::to_string(arity->second) + " arguments, got " +
                                std::to_string(parts.size()),
                            line_no);
    }
    std::string key = atom_text(name, parts);
    auto it = result.action_index.find(key);
    if (it == result.action_index.end())
      throw ResolutionError("no ground action " + key + " (unknown objects or statically unreachable)", line_no);
    plan.steps.push_back(it->second);
  }
  return plan;
}

std::string format_plan(const Plan& plan, const DomainModel& domain) {
  std::string out;
  for (ActionId a : plan.steps) {
    out += domain.action(a).name;
    out += '\n';
  }
  out += "; cost = " + std::to_string(plan.cost()) + " (unit cost)\n";
  return out;
}

DomainModel complement_domain(const DomainModel& domain, const std::vector<FluentId>& targets) {
  const std::size_t base = domain.fluent_count;
  DomainModel out;
  out.fluent_count = base + targets.size();
  for (const auto& a : domain.actions) {
    GroundAction c = a;
    c.pre = a.pre.resized(out.fluent_count);
    c.add = a.add.resized(out.fluent_count);
    c.del = a.del.resized(out.fluent_count);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      auto neg = static_cast<FluentId>(base + i);
      if (a.add.contains(targets[i])) {
        c.del.insert(neg);
      } else if (a.del.contains(targets[i])) {
        c.add.insert(neg);
      }
    }
    out.actions.push_back(std::move(c));
  }
  return out;
}

State complement_state(const State& s, const std::vector<FluentId>& targets, std::size_t base_count) {
  State out = s.resized(base_count + targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    if (!s.contains(targets[i])) out.insert(static_cast<FluentId>(base_count + i));
  return out;
}

GroundingResult compile_complements(const GroundingResult& result, const std::vector<FluentId>& targets) {
  const std::size_t base = result.table.size();
  std::vector<FluentId> sorted = targets;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (FluentId t : sorted)
    if (t >= base) throw Error("complement target id " + std::to_string(t) + " out of range");
  if (sorted.empty()) return result;

  GroundingResult out = result;
  for (FluentId t : sorted) out.table.append("(not " + result.table.name(t) + ")");
  out.task.domain = complement_domain(result.task.domain, sorted);
  out.task.init = complement_state(result.task.init, sorted, base);
  out.task.goal = result.task.goal.resized(out.table.size());
  out.stats.fluents = out.table.size();
  return out;
}

std::string to_pddl_domain(const DomainModel& domain) {
  std::ostringstream o;
  o << "(define (domain grounded)\n  (:requirements :strips)\n  (:predicates";
  for (std::size_t f = 0; f < domain.fluent_count; ++f) o << " (f" << f << ")";
  o << ")\n";
  for (const auto& a : domain.actions) {
    o << "  (:action a" << a.id << "\n   :parameters ()\n   :precondition (and";
    for (FluentId f : a.pre.members()) o << " (f" << f << ")";
    o << ")\n   :effect (and";
    for (FluentId f : a.add.members()) o << " (f" << f << ")";
    for (FluentId f : a.del.members()) o << " (not (f" << f << "))";
    o << "))\n";
  }
  o << ")\n";
  return o.str();
}

std::string to_pddl_problem(const PlanningTask& task) {
  std::ostringstream o;
  o << "(define (problem grounded-task)\n  (:domain grounded)\n  (:init";
  for (FluentId f : task.init.members()) o << " (f" << f << ")";
  o << ")\n  (:goal (and";
  for (FluentId f : task.goal.members()) o << " (f" << f << ")";
  o << ")))\n";
  return o.str();
}

}  // namespace goalalign::pddl
