#include "graduator/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace graduator;
using Json = nlohmann::json;

namespace {

struct Result
{
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args)
{
  std::ostringstream out;
  std::ostringstream err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string & name) { return std::string(GRADUATOR_SOURCE_DIR) + "/tests/fixtures/" + name; }
std::string corpus() { return std::string(GRADUATOR_SOURCE_DIR) + "/corpus"; }

std::string temp_file(const std::string & name, const std::string & text)
{
  auto path = std::filesystem::temp_directory_path() / ("graduator_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

std::vector<std::string> lines(const std::string & text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

/// Columns of the compare row for `policy`.
std::pair<int, int> policy_row(const std::string & table, const std::string & policy)
{
  for (const std::string & l : lines(table)) {
    std::istringstream in(l);
    std::string name;
    int w = -1;
    int c = -1;
    if (in >> name >> w >> c && name == policy) return {w, c};
  }
  FAIL("no row for " << policy);
  return {-1, -1};
}

}  // namespace

TEST_CASE("check")
{
  SUBCASE("unannotated reverse needs one dereference check")
  {
    Result r = cli({"check", fixture("safe_reverse.picl"), "--format", "json"});
    CHECK(r.code == 0);
    Json j = Json::parse(r.out);
    CHECK(j["schema"] == 1);
    CHECK(j["mode"] == "gradual");
    CHECK(j["warnings"].empty());
    REQUIRE(j["check_sites"].size() == 1);
    const Json & s = j["check_sites"][0];
    for (const char * key : {"category", "proc", "vertex", "line", "col", "variable", "required", "found"}) {
      CHECK(s.contains(key));
    }
    CHECK(s["category"] == "GRADUAL_CHECK");
    CHECK(s["variable"] == "reversed");
    CHECK(s["required"] == "NonNull");
    CHECK(s["found"] == "?");
    CHECK(s["line"] == 23);
    CHECK(j["summary"]["dereference_sites"] == 2);
    CHECK(j["summary"]["eliminated"] == 1);
  }
  SUBCASE("fully annotated valid program has no sites")
  {
    Result r = cli({"check", fixture("safe_reverse_nonnull.picl"), "--format", "json"});
    CHECK(r.code == 0);
    Json j = Json::parse(r.out);
    CHECK(j["warnings"].empty());
    CHECK(j["check_sites"].empty());
    CHECK(cli({"check", fixture("loop_annotated.picl"), "--mode", "static"}).code == 0);
    CHECK(cli({"check", fixture("loop.picl"), "--mode", "static"}).code == 2);
  }
  SUBCASE("Nullable return is a static warning")
  {
    Result r = cli({"check", fixture("null_reverse_nullable.picl"), "--format", "json"});
    CHECK(r.code == 1);
    Json j = Json::parse(r.out);
    REQUIRE(j["warnings"].size() == 1);
    CHECK(j["warnings"][0]["category"] == "GRADUAL_STATIC");
    CHECK(j["warnings"][0]["found"] == "Nullable");
  }
  SUBCASE("text output")
  {
    Result r = cli({"check", fixture("safe_reverse.picl")});
    CHECK(r.code == 0);
    CHECK(r.out.find("GRADUAL_CHECK") != std::string::npos);
  }
  SUBCASE("failures")
  {
    CHECK(cli({"check", fixture("does_not_exist.picl")}).code == 2);
    CHECK(cli({"check", temp_file("bad.picl", "main { var x; x := ; }")}).code == 2);
    CHECK(cli({"check", fixture("safe_reverse.picl"), "--mode", "static"}).code == 2);
    CHECK(cli({"check", fixture("safe_reverse.picl"), "--mode", "bogus"}).code != 0);
  }
}

TEST_CASE("run")
{
  SUBCASE("null result dereferenced")
  {
    Result g = cli({"run", fixture("null_reverse.picl"), "--mode", "gradual"});
    CHECK(g.code == 3);
    Json e = Json::parse(g.out);
    CHECK(e["schema"] == 1);
    CHECK(e["category"] == "GRADUAL_CHECK");
    CHECK(e["variable"] == "reversed");
    CHECK(e["required"] == "NonNull");
    CHECK(e["value"] == 0);
    CHECK(e["line"] == 23);
    Result p = cli({"run", fixture("null_reverse.picl"), "--mode", "plain"});
    CHECK(p.code == 4);
    CHECK(p.err.find("null dereference") != std::string::npos);
  }
  SUBCASE("terminating program")
  {
    Result r = cli({"run", fixture("loop.picl"), "--trace"});
    CHECK(r.code == 0);
    auto ls = lines(r.out);
    REQUIRE_FALSE(ls.empty());
    CHECK(ls.front().rfind("1: main/0: main", 0) == 0);
    CHECK(ls.back() == "final after " + std::to_string(ls.size() - 1) + " steps");
  }
  SUBCASE("fuel")
  {
    Result r = cli({"run", fixture("spin.picl"), "--max-steps", "100", "--trace"});
    CHECK(r.code == 5);
    auto ls = lines(r.out);
    REQUIRE(ls.size() >= 100);
    CHECK(ls[99].rfind("100: ", 0) == 0);
    CHECK((ls.size() == 100 || ls[100].rfind("101: ", 0) != 0));

    setenv("GRADUATOR_MAX_STEPS", "50", 1);
    Result env = cli({"run", fixture("spin.picl"), "--trace"});
    unsetenv("GRADUATOR_MAX_STEPS");
    CHECK(env.code == 5);
    auto el = lines(env.out);
    REQUIRE(el.size() >= 50);
    CHECK(el[49].rfind("50: ", 0) == 0);
    CHECK((el.size() == 50 || el[50].rfind("51: ", 0) != 0));
  }
}

TEST_CASE("cfg")
{
  Result r = cli({"cfg", fixture("loop.picl"), "--dot"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("digraph cfg {", 0) == 0);
  CHECK(r.out == cli({"cfg", fixture("loop.picl"), "--dot"}).out);
  CHECK(cli({"cfg", temp_file("bad_cfg.picl", "main { var x; x := ; }"), "--dot"}).code == 2);
  CHECK(cli({"cfg", temp_file("uninit.picl", "main { var x; return x; }"), "--dot"}).code == 0);
}

TEST_CASE("stats")
{
  Result r = cli({"stats", "--format", "json", corpus() + "/alloc_only.picl", corpus() + "/unannotated_calls.picl"});
  CHECK(r.code == 0);
  Json j = Json::parse(r.out);
  REQUIRE(j["programs"].size() == 2);
  CHECK(j["programs"][0]["eliminated_pct"] == 100);
  CHECK(j["programs"][1]["eliminated_pct"] == 0);
  CHECK(j["programs"][1]["dereference_sites"].get<int>() > 0);

  Result all = cli({"stats", "--ignore-annotations", corpus()});
  CHECK(all.code == 0);
  auto ls = lines(all.out);
  REQUIRE(ls.size() >= 3);
  CHECK(ls.front().find("sites") != std::string::npos);
  CHECK(ls.back().rfind("total", 0) == 0);
  CHECK(all.out == cli({"stats", "--ignore-annotations", corpus()}).out);

  CHECK(cli({"stats", corpus(), fixture("does_not_exist.picl")}).code == 2);
}

TEST_CASE("compare")
{
  SUBCASE("unannotated null argument")
  {
    Result r = cli({"compare", fixture("null_reverse.picl")});
    CHECK(r.code == 0);
    CHECK(policy_row(r.out, "gradual").first == 0);
    CHECK(policy_row(r.out, "nonnull-default").first >= 1);
  }
  SUBCASE("fully annotated program")
  {
    Result r = cli({"compare", fixture("loop_annotated.picl")});
    auto g = policy_row(r.out, "gradual");
    CHECK(policy_row(r.out, "nonnull-default") == g);
    CHECK(policy_row(r.out, "nullable-default") == g);
  }
  SUBCASE("everything erased")
  {
    ParseResult p = parse(
        "field f; proc get(x) { var y; y := x.f; return y; } proc mk(x) { var y; y := new{f}; return y; }"
        "main { var a; var b; a := mk(null); b := get(a); a.f := b; return b; }");
    REQUIRE(p.ok());
    auto rows = compare_policies(*p.program);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].policy == "gradual");
    CHECK(rows[0].warnings == 0);
    // both dereferences see a Nullable value under the Nullable default
    CHECK(rows[2].policy == "nullable-default");
    CHECK(rows[2].warnings == 2);
  }
}

TEST_CASE("selftest")
{
  Result a = cli({"selftest", "--programs", "30", "--seed", "3"});
  CHECK(a.code == 0);
  CHECK(a.out == cli({"selftest", "--programs", "30", "--seed", "3"}).out);
  CHECK(a.out.find("seed 3, 30 programs") != std::string::npos);
}

TEST_CASE("usage errors")
{
  CHECK(cli({}).code != 0);
  CHECK(cli({"frobnicate"}).code != 0);
}
