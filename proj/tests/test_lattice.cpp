#include "graduator/lattice.hpp"

#include <doctest.h>

#include <algorithm>
#include <iterator>
#include <map>
#include <set>
#include <string>

using namespace graduator;

namespace {

// Independent model: lifted elements as explicit sets of base names.
using Names = std::set<std::string>;

const std::map<std::string, Names> kGamma = {
  {"Null", {"Null"}},
  {"NonNull", {"NonNull"}},
  {"Nullable", {"Nullable"}},
  {"?", {"Null", "NonNull", "Nullable"}},
  {"?Null", {"Null", "Nullable"}},
  {"?NonNull", {"NonNull", "Nullable"}},
};

std::string oracle_base_join(const std::string & a, const std::string & b) { return a == b ? a : "Nullable"; }

std::string oracle_alpha(const Names & s)
{
  Names meet = kGamma.at("?");
  for (const auto & [name, g] : kGamma) {
    if (std::includes(g.begin(), g.end(), s.begin(), s.end())) {
      Names next;
      std::set_intersection(meet.begin(), meet.end(), g.begin(), g.end(), std::inserter(next, next.begin()));
      meet = next;
    }
  }
  for (const auto & [name, g] : kGamma) {
    if (g == meet) return name;
  }
  return "none";
}

std::string oracle_join(const std::string & a, const std::string & b)
{
  Names out;
  for (const auto & x : kGamma.at(a)) {
    for (const auto & y : kGamma.at(b)) out.insert(oracle_base_join(x, y));
  }
  return oracle_alpha(out);
}

GradAbst g(const std::string & s) { return parse_grad_abst(s).value(); }

}  // namespace

TEST_CASE("conc_contains")
{
  CHECK(conc_contains(Abst::Null, 0));
  CHECK_FALSE(conc_contains(Abst::NonNull, 0));
  CHECK(conc_contains(Abst::Nullable, 7));
  CHECK_FALSE(conc_contains(Abst::Null, 3));
}

TEST_CASE("base join and order")
{
  CHECK(base_join(Abst::Null, Abst::NonNull) == Abst::Nullable);
  CHECK(base_join(Abst::NonNull, Abst::NonNull) == Abst::NonNull);
  CHECK(base_join(Abst::Null, Abst::Nullable) == Abst::Nullable);
  CHECK(base_leq(Abst::Null, Abst::Nullable));
  CHECK_FALSE(base_leq(Abst::Null, Abst::NonNull));
  for (Abst a : kAllAbst) CHECK(base_leq(a, a));
  for (Abst a : kAllAbst) CHECK(base_leq(a, Abst::Nullable));

  // order agrees with concretization on the representatives 0 and 1
  for (Abst a : kAllAbst) {
    for (Abst b : kAllAbst) {
      bool subset = true;
      for (Value v : {Value(0), Value(1)}) {
        if (conc_contains(a, v) && !conc_contains(b, v)) subset = false;
      }
      CHECK(base_leq(a, b) == subset);
    }
  }
}

TEST_CASE("six canonical elements with injective gamma")
{
  std::set<std::uint8_t> images;
  for (GradAbst a : kAllGrad) images.insert(gamma(a).bits());
  CHECK(images.size() == 6);
  CHECK(GradAbst::at_least(Abst::Nullable) == lift(Abst::Nullable));
  for (GradAbst a : kAllGrad) {
    INFO(to_string(a));
    CHECK(parse_grad_abst(to_string(a)) == a);
  }
}

TEST_CASE("gamma")
{
  CHECK(gamma(g("Nullable")) == AbstSet::of(Abst::Nullable));
  CHECK(gamma(g("?")) == AbstSet::all());
  CHECK(gamma(g("?NonNull")) == AbstSet::of(Abst::NonNull).with(Abst::Nullable));
  for (const auto & [name, names] : kGamma) {
    AbstSet expected;
    for (const auto & n : names) expected = expected.with(n == "Null" ? Abst::Null : n == "NonNull" ? Abst::NonNull : Abst::Nullable);
    CHECK(gamma(g(name)) == expected);
  }
}

TEST_CASE("alpha")
{
  CHECK(alpha(AbstSet::of(Abst::NonNull).with(Abst::Nullable)) == g("?NonNull"));
  CHECK(alpha(AbstSet::of(Abst::Null)) == g("Null"));
  CHECK(oracle_alpha({"Null", "NonNull"}) == "?");
  CHECK(alpha(AbstSet::of(Abst::Null).with(Abst::NonNull)) == g("?"));
}

TEST_CASE("lifted join matches the enumeration oracle on all 36 pairs")
{
  CHECK(lifted_join(g("NonNull"), g("?")) == g("?NonNull"));
  CHECK(oracle_join("Null", "?Null") == "?Null");
  CHECK(lifted_join(g("Null"), g("?Null")) == g("?Null"));
  CHECK(lifted_join(g("?"), g("?")) == g("?"));
  CHECK(lifted_join(g("Nullable"), g("?")) == g("Nullable"));
  for (const auto & [a, ga] : kGamma) {
    for (const auto & [b, gb] : kGamma) {
      INFO(a << " join " << b);
      CHECK(to_string(lifted_join(g(a), g(b))) == oracle_join(a, b));
    }
  }
}

TEST_CASE("lifted order and precision")
{
  CHECK(lifted_leq(g("?"), g("NonNull")));
  CHECK_FALSE(lifted_leq(g("Nullable"), g("NonNull")));
  CHECK(lifted_leq(g("NonNull"), g("Nullable")));
  CHECK(precision_leq(g("NonNull"), g("?NonNull")));
  CHECK(precision_leq(g("?NonNull"), g("?")));
  CHECK_FALSE(precision_leq(g("?"), g("Nullable")));
  CHECK(ceil(g("?")) == Abst::Nullable);
  CHECK(ceil(g("?NonNull")) == Abst::Nullable);
  CHECK(ceil(g("NonNull")) == Abst::NonNull);
  CHECK(lifted_conc_contains(g("?"), 3));
  CHECK_FALSE(lifted_conc_contains(g("Null"), 3));
}
