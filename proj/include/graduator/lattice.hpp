// graduator/lattice.hpp - nullness semilattice and its gradual lifting
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace graduator {

/// Base abstract values. Nullable is the top element; there is no bottom.
enum class Abst : std::uint8_t { Null, NonNull, Nullable };

inline constexpr std::array<Abst, 3> kAllAbst = {Abst::Null, Abst::NonNull, Abst::Nullable};

/// Concrete values are heap locations; 0 is the null pointer.
using Value = std::uint64_t;

constexpr bool conc_contains(Abst a, Value v) noexcept
{
  switch (a) {
    case Abst::Null: return v == 0;
    case Abst::NonNull: return v != 0;
    case Abst::Nullable: return true;
  }
  return false;
}

constexpr Abst base_join(Abst a, Abst b) noexcept
{
  if (a == b) return a;
  return Abst::Nullable;
}

constexpr bool base_leq(Abst a, Abst b) noexcept { return base_join(a, b) == b; }

/// A nonempty subset of Abst, one bit per element.
class AbstSet
{
public:
  constexpr AbstSet() = default;
  static constexpr AbstSet of(Abst a) noexcept { return AbstSet(bit(a)); }
  static constexpr AbstSet all() noexcept { return AbstSet(0b111); }
  static constexpr AbstSet from_bits(std::uint8_t bits) noexcept { return AbstSet(bits & 0b111); }

  constexpr AbstSet with(Abst a) const noexcept { return AbstSet(bits_ | bit(a)); }
  constexpr bool contains(Abst a) const noexcept { return (bits_ & bit(a)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr bool subset_of(AbstSet other) const noexcept { return (bits_ & ~other.bits_) == 0; }
  constexpr AbstSet intersect(AbstSet other) const noexcept { return AbstSet(bits_ & other.bits_); }
  constexpr std::uint8_t bits() const noexcept { return bits_; }

  constexpr bool operator==(const AbstSet &) const = default;

  template <typename F> constexpr void for_each(F && f) const
  {
    for (Abst a : kAllAbst) {
      if (contains(a)) f(a);
    }
  }

private:
  constexpr explicit AbstSet(std::uint8_t bits) : bits_(bits) {}
  static constexpr std::uint8_t bit(Abst a) noexcept { return std::uint8_t(1u << unsigned(a)); }
  std::uint8_t bits_ = 0;
};

/// Element of the lifted lattice: an exact value, the unknown `?`, or `?a`
/// ("a or anything more general"). `?Nullable` is stored as `Nullable`, so
/// the six canonical elements compare structurally.
class GradAbst
{
public:
  enum class Kind : std::uint8_t { Exact, Unknown, AtLeast };

  constexpr GradAbst() = default;

  static constexpr GradAbst exact(Abst a) noexcept { return GradAbst(Kind::Exact, a); }
  static constexpr GradAbst unknown() noexcept { return GradAbst(Kind::Unknown, Abst::Nullable); }
  static constexpr GradAbst at_least(Abst a) noexcept
  {
    if (a == Abst::Nullable) return exact(a);
    return GradAbst(Kind::AtLeast, a);
  }

  constexpr Kind kind() const noexcept { return kind_; }
  constexpr bool is_exact() const noexcept { return kind_ == Kind::Exact; }
  /// The carried base value; meaningful for Exact and AtLeast only.
  constexpr Abst base() const noexcept { return base_; }

  /// Dense index in [0, 6), in the order of kAllGrad.
  constexpr std::size_t index() const noexcept
  {
    switch (kind_) {
      case Kind::Exact: return std::size_t(base_);
      case Kind::Unknown: return 3;
      case Kind::AtLeast: return base_ == Abst::Null ? 4 : 5;
    }
    return 0;
  }

  constexpr bool operator==(const GradAbst &) const = default;
  constexpr bool operator<(const GradAbst & o) const noexcept { return index() < o.index(); }

private:
  constexpr GradAbst(Kind k, Abst a) : kind_(k), base_(a) {}
  Kind kind_ = Kind::Exact;
  Abst base_ = Abst::Nullable;
};

inline constexpr std::array<GradAbst, 6> kAllGrad = {
  GradAbst::exact(Abst::Null),     GradAbst::exact(Abst::NonNull),
  GradAbst::exact(Abst::Nullable), GradAbst::unknown(),
  GradAbst::at_least(Abst::Null),  GradAbst::at_least(Abst::NonNull),
};

constexpr GradAbst lift(Abst a) noexcept { return GradAbst::exact(a); }

constexpr AbstSet gamma(GradAbst g) noexcept
{
  switch (g.kind()) {
    case GradAbst::Kind::Exact: return AbstSet::of(g.base());
    case GradAbst::Kind::Unknown: return AbstSet::all();
    case GradAbst::Kind::AtLeast: {
      AbstSet out;
      for (Abst b : kAllAbst) {
        if (base_leq(g.base(), b)) out = out.with(b);
      }
      return out;
    }
  }
  return AbstSet::all();
}

/// Inverse of gamma on its image.
constexpr std::optional<GradAbst> gamma_inverse(AbstSet s) noexcept
{
  for (GradAbst g : kAllGrad) {
    if (gamma(g) == s) return g;
  }
  return std::nullopt;
}

/// Most precise lifted element whose concretization covers `s` (s nonempty).
constexpr GradAbst alpha(AbstSet s) noexcept
{
  AbstSet meet = AbstSet::all();
  for (GradAbst g : kAllGrad) {
    if (s.subset_of(gamma(g))) meet = meet.intersect(gamma(g));
  }
  // The six gamma-sets are closed under intersection, so this always resolves.
  return gamma_inverse(meet).value_or(GradAbst::unknown());
}

/// Lifted join by enumeration: alpha of all pairwise base joins.
constexpr GradAbst lifted_join_enumerated(GradAbst g1, GradAbst g2) noexcept
{
  AbstSet joined;
  gamma(g1).for_each([&](Abst a) { gamma(g2).for_each([&](Abst b) { joined = joined.with(base_join(a, b)); }); });
  return alpha(joined);
}

using JoinTable = std::array<std::array<GradAbst, 6>, 6>;

constexpr JoinTable make_join_table() noexcept
{
  JoinTable t{};
  for (GradAbst a : kAllGrad) {
    for (GradAbst b : kAllGrad) t[a.index()][b.index()] = lifted_join_enumerated(a, b);
  }
  return t;
}

inline constexpr JoinTable kJoinTable = make_join_table();

constexpr GradAbst lifted_join(GradAbst g1, GradAbst g2) noexcept
{
  return kJoinTable[g1.index()][g2.index()];
}

/// Consistent order: some pair of represented base values is ordered.
constexpr bool lifted_leq(GradAbst g1, GradAbst g2) noexcept
{
  bool found = false;
  gamma(g1).for_each([&](Abst a) { gamma(g2).for_each([&](Abst b) { found = found || base_leq(a, b); }); });
  return found;
}

/// Precision: g1 represents no more base values than g2.
constexpr bool precision_leq(GradAbst g1, GradAbst g2) noexcept
{
  return gamma(g1).subset_of(gamma(g2));
}

/// Order induced by the lifted join (the Hasse structure of the lifted lattice).
constexpr bool join_order_leq(GradAbst g1, GradAbst g2) noexcept { return lifted_join(g1, g2) == g2; }

/// Base join of everything g represents.
constexpr Abst ceil(GradAbst g) noexcept
{
  std::optional<Abst> acc;
  gamma(g).for_each([&](Abst a) { acc = acc ? base_join(*acc, a) : a; });
  return acc.value_or(Abst::Nullable);
}

/// Whether a concrete value is described by some element of gamma(g).
constexpr bool lifted_conc_contains(GradAbst g, Value v) noexcept
{
  bool found = false;
  gamma(g).for_each([&](Abst a) { found = found || conc_contains(a, v); });
  return found;
}

std::string_view to_string(Abst a) noexcept;
std::string to_string(GradAbst g);
std::optional<GradAbst> parse_grad_abst(std::string_view text) noexcept;

}  // namespace graduator
