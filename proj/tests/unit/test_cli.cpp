#ifdef GOALALIGN_GA_PATH

#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kData(GOALALIGN_DATA_DIR);

struct Run {
  int code = -1;
  std::string out, err;
};

class Sandbox {
 public:
  Sandbox() : dir_(fs::temp_directory_path() / ("ga-cli-" + std::to_string(::getpid()))) { fs::create_directories(dir_); }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  fs::path path(const std::string& name) const { return dir_ / name; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

 private:
  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// `args` is spliced into a shell command line; `env` and `input` are optional prefixes.
Run ga(const Sandbox& box, const std::string& args, const std::string& env = "", const std::string& input = "") {
  auto out = box.path("stdout"), err = box.path("stderr"), in = box.write("stdin", input);
  std::string cmd = "env -u GA_SEED -u GA_BETA -u GA_WORKERS -u GA_FORMAT " + env + " " + q(GOALALIGN_GA_PATH) +
                    " " + args + " < " + q(in) + " > " + q(out) + " 2> " + q(err);
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

const fs::path bw_domain = kData / "blocksworld" / "domain.pddl";
const fs::path bw_p01 = kData / "blocksworld" / "p01.pddl";
const fs::path tea_dir = kData / "tea";

const char* kDeadDomain = R"((define (domain dead) (:predicates (a) (b))
  (:action make-b :parameters () :precondition (and (a)) :effect (and (b)))))";
const char* kDeadProblem = R"((define (problem dead-1) (:domain dead) (:init) (:goal (and (b)))))";

}  // namespace

TEST_CASE("cli: usage errors") {
  Sandbox box;
  CHECK(ga(box, "--help").code == 0);
  CHECK(ga(box, "").code == 2);
  CHECK(ga(box, "plan " + q(box.path("missing.pddl")) + " " + q(bw_p01)).code == 2);
  CHECK(ga(box, "frobnicate").code == 2);
  auto bad = box.write("bad.pddl", "(define (domain x) (:requirements :fluents))");
  auto r = ga(box, "plan " + q(bad) + " " + q(bw_p01));
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("cli: plan") {
  Sandbox box;
  auto r = ga(box, "plan " + q(bw_domain) + " " + q(bw_p01));
  CHECK(r.code == 0);
  CHECK(r.out.find("; cost = 6") != std::string::npos);

  auto file = box.path("p01.plan");
  CHECK(ga(box, "plan " + q(bw_domain) + " " + q(bw_p01) + " -o " + q(file)).code == 0);
  CHECK(ga(box, "validate " + q(bw_domain) + " " + q(bw_p01) + " " + q(file)).code == 0);

  auto d = box.write("dead-domain.pddl", kDeadDomain), p = box.write("dead-problem.pddl", kDeadProblem);
  CHECK(ga(box, "plan " + q(d) + " " + q(p)).code == 10);

  CHECK(ga(box, "plan --node-budget 1 " + q(bw_domain) + " " + q(kData / "blocksworld" / "p02.pddl")).code == 20);
  CHECK(ga(box, "plan " + q(bw_domain) + " " + q(kData / "blocksworld" / "p02.pddl"), "GA_NODE_BUDGET=1").code == 20);

  SUBCASE("the tool itself works as an external planner") {
    std::string ext = std::string(GOALALIGN_GA_PATH) + " plan {domain} {problem} -o {plan}";
    auto e = ga(box, "plan --external-planner \"" + ext + "\" " + q(bw_domain) + " " + q(bw_p01));
    CHECK(e.code == 0);
    CHECK(e.out.find("; cost = 6") != std::string::npos);
    CHECK(ga(box, "plan --external-planner \"" + ext + "\" " + q(d) + " " + q(p)).code == 10);
    CHECK(ga(box, "plan --external-planner false " + q(bw_domain) + " " + q(bw_p01)).code == 20);
  }
}

TEST_CASE("cli: validate") {
  Sandbox box;
  auto robot = tea_dir / "robot-domain.pddl", human = tea_dir / "human-domain.pddl";
  auto problem = tea_dir / "problem.pddl", plan = tea_dir / "human-plan.txt";
  CHECK(ga(box, "validate " + q(human) + " " + q(problem) + " " + q(plan)).code == 0);

  auto r = ga(box, "validate " + q(robot) + " " + q(problem) + " " + q(plan));
  CHECK(r.code == 11);
  CHECK(r.out.find("step 1 (climb-ladder) is inapplicable; unmet preconditions: (can-climb)") != std::string::npos);

  auto short_plan = box.write("short.plan", "(boil)\n");
  r = ga(box, "validate " + q(human) + " " + q(problem) + " " + q(short_plan));
  CHECK(r.code == 11);
  CHECK(r.out.find("goal not reached") != std::string::npos);

  auto garbage = box.write("garbage.plan", "(fly-to-moon)\n");
  CHECK(ga(box, "validate " + q(human) + " " + q(problem) + " " + q(garbage)).code == 2);
}

TEST_CASE("cli: elicit") {
  Sandbox box;
  auto demo = q(tea_dir / "demo.json");
  auto transcript = box.path("session.json");
  auto plan_out = box.path("session.plan");

  auto r = ga(box, "elicit " + demo + " -t " + q(transcript) + " --plan-out " + q(plan_out));
  REQUIRE(r.code == 0);
  auto t = nlohmann::json::parse(slurp(transcript));
  CHECK(t["verdict"] == "plan-found");
  CHECK(t["condition"] == 3);
  CHECK(t["query_count"] == 1);
  CHECK(t["queries"][0]["atom"] == "(ladder-used)");
  CHECK(t["queries"][0]["answer"] == false);
  CHECK(t["plan"] == nlohmann::json::array({"(boil)", "(use-grabber)", "(brew)"}));
  CHECK(slurp(plan_out).find("(use-grabber)") != std::string::npos);

  SUBCASE("replaying a transcript reproduces it") {
    auto again = ga(box, "elicit " + demo + " --answers " + q(transcript));
    CHECK(again.code == 0);
    auto replayed = nlohmann::json::parse(again.out), original = nlohmann::json::parse(slurp(transcript));
    CHECK(replayed["oracle"] == "scripted");
    replayed.erase("oracle");
    original.erase("oracle");
    CHECK(replayed == original);
  }
  SUBCASE("scripted yes to the ladder") {
    auto y = ga(box, "elicit " + demo + " --answers " + q(tea_dir / "answers-ladder-yes.txt"));
    CHECK(y.code == 10);
    auto j = nlohmann::json::parse(y.out);
    CHECK(j["verdict"] == "no-plan");
    CHECK(j["condition"] == 1);
    CHECK(j["plan"].is_null());
  }
  SUBCASE("interactive answers re-ask on bad input") {
    auto i = ga(box, "elicit --interactive " + demo, "", "maybe\nn\n");
    CHECK(i.code == 0);
    CHECK(i.err.find("Is it part of your goal that (ladder-used)? [y/n]") != std::string::npos);
    CHECK(i.err.find("please answer y or n") != std::string::npos);
    CHECK(nlohmann::json::parse(i.out)["verdict"] == "plan-found");
  }
  SUBCASE("interactive input ending early") { CHECK(ga(box, "elicit --interactive " + demo).code == 2); }
  SUBCASE("answers and interactive exclude each other") {
    CHECK(ga(box, "elicit --interactive --answers " + q(transcript) + " " + demo).code == 2);
  }
  SUBCASE("unscripted question") {
    auto empty = box.write("none.txt", "# nothing\n");
    CHECK(ga(box, "elicit " + demo + " --answers " + q(empty)).code == 2);
  }
}

TEST_CASE("cli: bench") {
  Sandbox box;
  auto manifest = box.write("m.json", R"({"instances": [{"id": "bw1", "domain": ")" + bw_domain.string() +
                                          R"(", "problem": ")" + bw_p01.string() + R"("}]})");
  CHECK(ga(box, "bench " + q(box.path("nope.json"))).code == 2);

  auto r = ga(box, "bench --trials 1 " + q(manifest));
  REQUIRE(r.code == 0);
  CHECK(r.err.find("seed: ") != std::string::npos);
  auto row = r.out.substr(r.out.find("\nbw1,") + 1);
  row = row.substr(0, row.find('\n'));
  std::vector<std::string> cells;
  std::stringstream ss(row);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() == 7);
  CHECK(cells[3] == "0.0000");
  CHECK(cells[5] == "0.0000");
  CHECK(cells[6] == "1");

  auto a = ga(box, "bench --trials 3 " + q(manifest), "GA_SEED=42");
  auto b = ga(box, "bench --trials 3 --seed 42 --format json " + q(manifest));
  CHECK(a.err.find("seed: ") == std::string::npos);
  CHECK(a.out.rfind("# seed=42 ", 0) == 0);
  auto j = nlohmann::json::parse(b.out);
  CHECK(j["config"]["seed"] == 42);
  CHECK(j["instances"][0]["trials"] == 3);
  CHECK(ga(box, "bench --format xml " + q(manifest)).code == 2);
  CHECK(ga(box, "bench --trials 0 " + q(manifest)).code == 2);
}

#endif
