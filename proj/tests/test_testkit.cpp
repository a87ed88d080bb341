#include "graduator/testkit.hpp"

#include <doctest.h>

#include <string>
#include <utility>

using namespace graduator;
using namespace graduator::testkit;

namespace {

GenConfig config(std::uint64_t seed, double density)
{
  GenConfig c;
  c.seed = seed;
  c.density = density;
  return c;
}

bool all_missing(const Program & p)
{
  for (const Procedure & proc : p.procedures) {
    if (proc.param_ann != Ann::Missing || proc.return_ann != Ann::Missing) return false;
  }
  return true;
}

std::vector<CheckSite> without_boundaries(const AnalysisResults & r, const ProgramCfg & cfg)
{
  std::vector<CheckSite> out;
  for (const CheckSite & s : check_sites(r, cfg)) {
    if (s.category != Category::GradualBoundary) out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("generation is deterministic and density only touches annotations")
{
  CHECK(gen_source(config(1, 1.0)) == gen_source(config(1, 1.0)));
  CHECK(gen_source(config(1, 0.5)) == gen_source(config(1, 0.5)));
  CHECK(gen_source(config(1, 1.0)) != gen_source(config(2, 1.0)));

  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Program full = gen_program(config(seed, 1.0));
    Program none = gen_program(config(seed, 0.0));
    CHECK(fully_annotated(full));
    CHECK(all_missing(none));
    CHECK(structurally_equal(full, none, false));
    CHECK(precision_leq_prog(full, none));
    CHECK(precision_leq_prog(full, gen_program(config(seed, 0.5))));
  }
}

TEST_CASE("valid generation")
{
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Program p = gen_valid_program(config(seed, 0.5));
    CHECK(is_valid(p));
    CHECK(structurally_equal(p, gen_valid_program(config(seed, 0.5))));
  }
  CHECK_FALSE(is_valid(*parse("field g; proc f@Nullable(x@Nullable) { return x; } main { var y; var z; y := f(null); z := y.g; return z; }").program));
}

TEST_CASE("instruction coverage")
{
  std::set<InstKind> kinds = instruction_coverage(200, 1);
  CHECK(kinds.size() == kInstKindCount);
}

TEST_CASE("lattice oracle")
{
  Verdict ok = oracle_lattice();
  CHECK(ok.pass);
  CHECK(ok.failures.empty());
  CHECK(ok.cases > 216);

  JoinTable bad = kJoinTable;
  std::size_t n = lift(Abst::Null).index();
  std::size_t nn = lift(Abst::NonNull).index();
  std::swap(bad[n][nn], bad[n][n]);
  Verdict broken = oracle_lattice(bad);
  CHECK_FALSE(broken.pass);
  REQUIRE_FALSE(broken.failures.empty());

  // four-element lifting is not associative on (Null, NonNull, ?)
  NaiveAbst left = naive_join(naive_join(Abst::Null, Abst::NonNull), std::nullopt);
  NaiveAbst right = naive_join(Abst::Null, naive_join(Abst::NonNull, std::nullopt));
  CHECK(left != right);
}

TEST_CASE("local soundness oracle")
{
  Verdict ok = oracle_local_soundness();
  CHECK(ok.pass);
  CHECK(ok.cases >= 9000);

  LocalSoundnessOptions mutated;
  mutated.flow = [](const Instruction & i, const AbstractState & s, std::span<const std::string> u) {
    AbstractState out = lifted_flow(i, s, u);
    if (i.kind == InstKind::If) out[i.target] = lift(Abst::Null);
    return out;
  };
  Verdict broken = oracle_local_soundness(mutated);
  CHECK_FALSE(broken.pass);
  CHECK_FALSE(broken.failures.empty());

  LocalSoundnessOptions assigns = mutated;
  assigns.assignments_only = true;
  CHECK(oracle_local_soundness(assigns).pass);
}

TEST_CASE("properties hold on generated programs")
{
  std::vector<Verdict> vs = oracle_properties(60, 1);
  REQUIRE(vs.size() == 3);
  for (const Verdict & v : vs) {
    INFO(v.name << ": " << (v.failures.empty() ? std::string() : v.failures.front()));
    CHECK(v.pass);
    CHECK(v.cases > 0);
  }
}

TEST_CASE("dropping boundary checks is caught")
{
  Verdict v = runtime_checks(200, 1, 0.5, without_boundaries);
  CHECK_FALSE(v.pass);
  REQUIRE_FALSE(v.failures.empty());
}
