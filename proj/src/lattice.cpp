#include "graduator/lattice.hpp"

namespace graduator {

std::string_view to_string(Abst a) noexcept
{
  switch (a) {
    case Abst::Null: return "Null";
    case Abst::NonNull: return "NonNull";
    case Abst::Nullable: return "Nullable";
  }
  return "?";
}

std::string to_string(GradAbst g)
{
  switch (g.kind()) {
    case GradAbst::Kind::Exact: return std::string(to_string(g.base()));
    case GradAbst::Kind::Unknown: return "?";
    case GradAbst::Kind::AtLeast: return "?" + std::string(to_string(g.base()));
  }
  return "?";
}

std::optional<GradAbst> parse_grad_abst(std::string_view text) noexcept
{
  for (GradAbst g : kAllGrad) {
    if (to_string(g) == text) return g;
  }
  return std::nullopt;
}

}  // namespace graduator
