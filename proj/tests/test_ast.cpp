#include "graduator/ast.hpp"
#include "graduator/testkit.hpp"

#include <doctest.h>

#include <stdexcept>
#include <string>

using namespace graduator;

namespace {

const char * kLoop = R"(
proc bar(y) {
  var r;
  r := y;
  return r;
}
proc foo@NonNull(x@Nullable) {
  while (x == null) {
    x := bar(x);
  }
  return x;
}
main {
  var a;
  a := foo(null);
  return a;
}
)";

Program parsed(std::string_view text)
{
  ParseResult r = parse(text);
  REQUIRE(r.ok());
  return *r.program;
}

bool has_message(const std::vector<Diagnostic> & ds, const std::string & needle)
{
  for (const Diagnostic & d : ds) {
    if (d.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("minimal program")
{
  Program p = parsed("main { var x; x := null; return x; }");
  CHECK(p.procedures.empty());
  REQUIRE(p.main.size() == 3);
  CHECK(p.main[0].kind == Stmt::Kind::Decl);
  CHECK(p.main[1].kind == Stmt::Kind::Assign);
  CHECK(p.main[2].kind == Stmt::Kind::Return);
  CHECK(check_surface(p).empty());
}

TEST_CASE("loop example parses into two procedures")
{
  Program p = parsed(kLoop);
  CHECK(p.procedures.size() == 2);
  CHECK(check_surface(p).empty());
  const Procedure * foo = p.find_procedure("foo");
  REQUIRE(foo != nullptr);
  CHECK(foo->return_ann == Ann::NonNull);
  CHECK(foo->param_ann == Ann::Nullable);
}

TEST_CASE("omitted annotations are missing")
{
  Program p = parsed("proc f(x) { return x; } main { var y; y := f(null); return y; }");
  CHECK(p.procedures[0].param_ann == Ann::Missing);
  CHECK(p.procedures[0].return_ann == Ann::Missing);
  Program q = parsed("proc f@?(x@?) { return x; } main { var y; y := f(null); return y; }");
  CHECK(structurally_equal(p, q));
}

TEST_CASE("parse errors")
{
  CHECK_FALSE(parse("main { var x; x := ; return x; }").ok());
  CHECK_FALSE(parse("field f; field f; main { var x; x := null; return x; }").ok());
  CHECK_FALSE(parse("proc f(x) { return x; } proc f(y) { return y; } main { var x; x := null; return x; }").ok());
  CHECK_FALSE(parse("main { var x; x := null; return x; skip; }").ok());
  CHECK_FALSE(parse("proc f@Maybe(x) { return x; } main { var x; x := null; return x; }").ok());
  CHECK_FALSE(parse("main { var x; x := null; }").ok());
  ParseResult bad = parse("main {\n  var x;\n  x := ;\n  return x;\n}");
  REQUIRE_FALSE(bad.diagnostics.empty());
  CHECK(bad.diagnostics[0].loc.line == 3);
  CHECK(render(bad.diagnostics[0], "a.picl").rfind("a.picl:3:", 0) == 0);
}

TEST_CASE("surface checks")
{
  CHECK(has_message(check_surface(parsed("main { var x; x := z; return x; }")), "undeclared variable"));
  CHECK(has_message(check_surface(parsed("main { var x; var y; y := x; return y; }")), "use before initialization"));
  CHECK(has_message(check_surface(parsed("main { var x; x := new{g}; return x; }")), "unknown field"));
  CHECK(has_message(check_surface(parsed("main { var x; x := h(x); return x; }")), "unknown procedure"));
  CHECK(has_message(check_surface(parsed("proc f(x) { if (x == null) { return x; } else { skip; } } main { var y; y := f(null); return y; }")),
                    "may finish without returning"));
  // assigned on only one arm of a conditional
  CHECK(has_message(check_surface(parsed("main { var x; var y; x := null; if (x == null) { y := x; } else { skip; } return y; }")),
                    "use before initialization"));
  // both arms assign
  CHECK(check_surface(parsed("main { var x; var y; x := null; if (x == null) { y := x; } else { y := null; } return y; }")).empty());
}

TEST_CASE("field lint")
{
  Program p = parsed("field f; field g; main { var x; var y; x := new{f}; y := x.g; return y; }");
  CHECK(check_surface(p).empty());
  CHECK(lint_fields(p).size() == 1);
  Program q = parsed("field f; main { var x; var y; x := new{f}; y := x.f; return y; }");
  CHECK(lint_fields(q).empty());
}

TEST_CASE("pretty print round-trips")
{
  Program p = parsed(kLoop);
  CHECK(structurally_equal(parsed(pretty_print(p)), p));
  Program q = parsed("field f; proc g@Nullable(a@NonNull) { var b; b := (a && a) || a.f; return b; } main { var x; x := g(new{f}); return x; }");
  CHECK(structurally_equal(parsed(pretty_print(q)), q));
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    testkit::GenConfig c;
    c.seed = seed;
    c.density = 0.5;
    Program gen = testkit::gen_program(c);
    INFO(pretty_print(gen));
    CHECK(structurally_equal(parsed(pretty_print(gen)), gen));
  }
}

TEST_CASE("annotation erasure")
{
  Program p = parsed(kLoop);
  std::vector<std::string> sites = annotation_sites(p);
  CHECK(sites == std::vector<std::string>{"bar.param", "bar.return", "foo.param", "foo.return"});

  Program all = erase_annotations(p, {sites.begin(), sites.end()});
  CHECK_FALSE(fully_annotated(all));
  for (const Procedure & proc : all.procedures) {
    CHECK(proc.param_ann == Ann::Missing);
    CHECK(proc.return_ann == Ann::Missing);
  }
  CHECK(structurally_equal(erase_annotations(p, {}), p));

  Program one = erase_annotations(p, {"foo.return"});
  CHECK(one.find_procedure("foo")->return_ann == Ann::Missing);
  CHECK(one.find_procedure("foo")->param_ann == Ann::Nullable);
  CHECK(structurally_equal(one, p, false));

  CHECK_THROWS_AS(erase_annotations(p, {"nope.param"}), std::invalid_argument);
}

TEST_CASE("program precision")
{
  Program p = parsed(kLoop);
  Program e = erase_annotations(p, {"foo.return"});
  Program ee = erase_annotations(p, {"foo.return", "foo.param"});
  CHECK(precision_leq_prog(p, p));
  CHECK(precision_leq_prog(p, e));
  CHECK_FALSE(precision_leq_prog(e, p));
  CHECK(precision_leq_prog(e, ee));
  CHECK(precision_leq_prog(p, ee));
  CHECK_FALSE(precision_leq_prog(p, parsed("main { var x; x := null; return x; }")));
}

TEST_CASE("fill missing annotations")
{
  Program p = parsed("proc f(x@Nullable) { return x; } main { var y; y := f(null); return y; }");
  Program q = fill_missing_annotations(p, Ann::NonNull);
  CHECK(q.procedures[0].return_ann == Ann::NonNull);
  CHECK(q.procedures[0].param_ann == Ann::Nullable);
  CHECK(fully_annotated(q));
}
