// Acceptance suite: one PASS/FAIL line per criterion.
#include "graduator/cli.hpp"
#include "graduator/testkit.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace graduator;
using Json = nlohmann::json;

namespace {

struct Outcome
{
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string & what)
  {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string path(const std::string & rel) { return std::string(GRADUATOR_SOURCE_DIR) + "/" + rel; }

std::string slurp(const std::string & p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<ProgramCfg> load_fixture(const std::string & name, Outcome & o)
{
  ParseResult r = parse(slurp(path("tests/fixtures/" + name)));
  if (!r.ok() || !check_surface(*r.program).empty()) {
    o.require(false, name + " does not load");
    return std::nullopt;
  }
  return lower(*r.program);
}

struct Cli
{
  int code = 0;
  std::string out;
};

Cli cli(const std::vector<std::string> & args)
{
  std::ostringstream out;
  std::ostringstream err;
  int code = run_cli(args, out, err);
  return {code, out.str()};
}

void verdict(Outcome & o, const testkit::Verdict & v)
{
  std::string first = v.failures.empty() ? "" : ": " + v.failures.front();
  o.require(v.pass, v.name + " failed" + first);
  o.detail += (o.detail.empty() ? "" : "; ") + v.name + " " + std::to_string(v.cases) + " cases";
}

Outcome lattice_suite()
{
  Outcome o;
  verdict(o, testkit::oracle_lattice());
  return o;
}

Outcome naive_lifting()
{
  Outcome o;
  using testkit::naive_join;
  testkit::NaiveAbst left = naive_join(Abst::Null, naive_join(Abst::NonNull, std::nullopt));
  testkit::NaiveAbst right = naive_join(naive_join(Abst::Null, Abst::NonNull), std::nullopt);
  o.require(left == std::nullopt, "Null join (NonNull join ?) is not ?");
  o.require(right == testkit::NaiveAbst(Abst::Nullable), "(Null join NonNull) join ? is not Nullable");
  o.require(left != right, "associative");
  return o;
}

Outcome loop_fixpoint()
{
  Outcome o;
  auto cfg = load_fixture("loop.picl", o);
  if (!cfg) return o;
  AnalysisResults r = analyze(*cfg, Mode::Gradual);
  const GradAbst Null = lift(Abst::Null);
  const GradAbst NonNull = lift(Abst::NonNull);
  const GradAbst Nullable = lift(Abst::Nullable);
  // Hand-iterated states before each vertex of foo.
  //   proc: unreached
  //   branch: Nullable (entry) joined with ? (bar's result around the loop) = Nullable
  //   if, else: Nullable; call: Null (else arm); return: NonNull (if arm)
  std::map<InstKind, AbstractState> expected = {
    {InstKind::Proc, {}},
    {InstKind::Branch, {{"x", Nullable}}},
    {InstKind::If, {{"x", Nullable}}},
    {InstKind::Else, {{"x", Nullable}}},
    {InstKind::Call, {{"x", Null}}},
    {InstKind::Return, {{"x", NonNull}}},
  };
  const ProcedureGraph * foo = cfg->find_procedure("foo");
  o.require(foo != nullptr && foo->vertices.size() == 6, "foo is not six vertices");
  if (!o.pass) return o;
  for (VertexId v : foo->vertices) {
    InstKind k = cfg->vertex(v).inst.kind;
    o.require(r.at(v) == expected.at(k), "state before " + std::string(kind_name(k)) + " differs");
  }
  o.require(static_warnings(r, *cfg).empty(), "warnings reported");
  o.require(check_sites(r, *cfg).empty(), "check sites reported");
  return o;
}

Outcome scenario_matrix()
{
  Outcome o;
  auto report = [&](const std::string & name) {
    auto cfg = load_fixture(name, o);
    return cfg ? build_report(*cfg, Mode::Gradual, name) : Report{};
  };

  Report safe = report("safe_reverse.picl");
  o.require(safe.warnings.empty(), "(i) warnings");
  o.require(safe.checks.size() == 1 && safe.checks[0].category == Category::GradualCheck, "(i) not one GRADUAL_CHECK");

  Report nonnull = report("safe_reverse_nonnull.picl");
  o.require(nonnull.warnings.empty() && nonnull.checks.empty(), "(ii) not clean");

  if (auto cfg = load_fixture("null_reverse.picl", o)) {
    RunResult run_result = run(*cfg, RunMode::Gradual);
    const Error * e = std::get_if<Error>(&run_result.outcome);
    o.require(e != nullptr, "(iii) no Error");
    if (e != nullptr) o.require(is_dereference(cfg->vertex(e->vertex).inst.kind), "(iii) Error not at a dereference");
  }

  Report nullable = report("null_reverse_nullable.picl");
  std::size_t gs = 0;
  for (const Warning & w : nullable.warnings) gs += w.category == Category::GradualStatic ? 1 : 0;
  o.require(gs == 1 && nullable.warnings.size() == 1, "(iv) not exactly one GRADUAL_STATIC");

  ParseResult p = parse(slurp(path("tests/fixtures/safe_reverse.picl")));
  if (p.ok()) {
    auto rows = compare_policies(*p.program);
    o.require(rows.size() == 3 && rows[0].policy == "gradual" && rows[0].warnings == 0, "(v) gradual warns");
    o.require(rows.size() == 3 && rows[1].policy == "nonnull-default" && rows[1].warnings >= 1,
              "(v) nonnull-default does not warn");
  }
  return o;
}

Outcome conservative_extension()
{
  Outcome o;
  verdict(o, testkit::conservative_extension(200, 1));
  return o;
}

Outcome gradual_guarantees()
{
  Outcome o;
  verdict(o, testkit::gradual_guarantees(200, 1, 3));
  return o;
}

Outcome soundness()
{
  Outcome o;
  verdict(o, testkit::runtime_checks(500, 1));
  return o;
}

Outcome check_elision()
{
  Outcome o;
  Cli c = cli({"stats", "--ignore-annotations", "--format", "json", path("corpus")});
  o.require(c.code == 0, "stats exit " + std::to_string(c.code));
  if (c.code != 0) return o;
  Json j = Json::parse(c.out);
  o.require(j["programs"].size() == 20, "corpus is not 20 programs");
  bool saw_alloc = false;
  bool saw_calls = false;
  for (const Json & row : j["programs"]) {
    std::string src = row["source"];
    if (src.ends_with("alloc_only.picl")) {
      saw_alloc = true;
      o.require(row["eliminated_pct"] == 100, "alloc_only not 100%");
    }
    if (src.ends_with("unannotated_calls.picl")) {
      saw_calls = true;
      o.require(row["eliminated_pct"] == 0, "unannotated_calls not 0%");
    }
  }
  o.require(saw_alloc && saw_calls, "anchors missing");
  int total = j["total"]["eliminated_pct"];
  o.require(total > 0 && total < 100, "aggregate not strictly between 0% and 100%");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("aggregate ") + std::to_string(total) + "%";
  return o;
}

Outcome determinism()
{
  Outcome o;
  std::vector<std::vector<std::string>> commands = {
    {"check", path("tests/fixtures/safe_reverse.picl"), "--format", "json"},
    {"check", path("tests/fixtures/null_reverse_nullable.picl")},
    {"cfg", path("tests/fixtures/loop.picl"), "--dot"},
    {"selftest", "--seed", "7", "--programs", "30"},
  };
  for (const auto & args : commands) {
    Cli a = cli(args);
    Cli b = cli(args);
    o.require(a.code == b.code && a.out == b.out, args[0] + " output differs between runs");
  }
  return o;
}

}  // namespace

int main()
{
  struct Criterion
  {
    int id;
    std::string name;
    std::function<Outcome()> body;
    double budget_s;
  };
  std::vector<Criterion> criteria = {
    {1, "lattice suite", lattice_suite, 1},
    {2, "naive lifting is not associative", naive_lifting, 1},
    {3, "loop fixpoint", loop_fixpoint, 1},
    {4, "reverse scenario matrix", scenario_matrix, 1},
    {5, "conservative extension", conservative_extension, 30},
    {6, "gradual guarantees", gradual_guarantees, 60},
    {7, "soundness surrogate", soundness, 60},
    {8, "check elision on the corpus", check_elision, 10},
    {9, "determinism", determinism, 60},
  };

  int failed = 0;
  for (const Criterion & c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o = c.body();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.budget_s, "over time budget");
    if (!o.pass) ++failed;
    std::ostringstream line;
    line.precision(2);
    line << std::fixed << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " (" << secs << " s)";
    if (!o.detail.empty()) line << " - " << o.detail;
    std::cout << line.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
