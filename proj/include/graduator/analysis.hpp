// graduator/analysis.hpp - static and gradual null-pointer dataflow analysis
#pragma once

#include "graduator/cfg.hpp"
#include "graduator/lattice.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace graduator {

/// Partial map from variables to abstract values. Absent keys are undefined;
/// the empty map is the unreached state.
using AbstractState = std::map<std::string, GradAbst>;

enum class Mode : std::uint8_t { Static, Gradual };

std::string_view to_string(Mode m) noexcept;

using ValueJoin = std::function<GradAbst(GradAbst, GradAbst)>;
using FlowFn = std::function<AbstractState(const Instruction &, const AbstractState &,
                                           std::span<const std::string>)>;

/// Pointwise join where both are defined; keeps whichever side is defined otherwise.
AbstractState state_join(const AbstractState & s1, const AbstractState & s2,
                         const ValueJoin & join = lifted_join);

/// s1 below s2 in the join-induced order: joining s1 into s2 changes nothing.
bool state_leq(const AbstractState & s1, const AbstractState & s2,
               const ValueJoin & join = lifted_join);

/// Static transfer function. Requires Exact values and non-? annotations;
/// throws std::logic_error otherwise. `universe` is the procedure's variables
/// (used by the entry instructions).
AbstractState flow(const Instruction & i, const AbstractState & s,
                   std::span<const std::string> universe);

/// Consistent lifting of `flow` to the gradual lattice.
AbstractState lifted_flow(const Instruction & i, const AbstractState & s,
                          std::span<const std::string> universe);

/// Static safety requirement for `x` before `i` executes.
Abst safe(const Instruction & i, const std::string & x);

/// Lifted safety requirement; carries `?` annotations through.
GradAbst lifted_safe(const Instruction & i, const std::string & x);

/// Variables with a nontrivial safety requirement at `i`, and that requirement.
std::vector<std::pair<std::string, GradAbst>> safety_footprint(const Instruction & i);

struct AnalysisResults
{
  Mode mode = Mode::Gradual;
  /// Indexed by vertex id.
  std::vector<AbstractState> states;

  const AbstractState & at(VertexId v) const { return states.at(v); }
  bool operator==(const AnalysisResults &) const = default;
};

struct KildallOptions
{
  /// When set, the worklist is processed in a seeded random order instead of
  /// FIFO over reverse postorder.
  std::optional<std::uint64_t> shuffle_seed;
};

AnalysisResults kildall(const FlowFn & flow_fn, const ValueJoin & join, const ProgramCfg & cfg,
                        Mode mode, const KildallOptions & opts = {});

/// Static mode: `flow` with the base join (requires a fully annotated program).
/// Gradual mode: `lifted_flow` with the lifted join.
AnalysisResults analyze(const ProgramCfg & cfg, Mode mode, const KildallOptions & opts = {});

enum class Category : std::uint8_t { GradualStatic, GradualCheck, GradualBoundary };

std::string_view to_string(Category c) noexcept;

/// A static warning or a run-time check site.
struct Finding
{
  Category category = Category::GradualStatic;
  VertexId vertex = 0;
  std::string proc;
  SourceLoc loc;
  std::string variable;
  Abst required = Abst::Nullable;
  GradAbst found;

  bool operator==(const Finding &) const = default;
};

using Warning = Finding;
using CheckSite = Finding;

std::vector<Warning> static_warnings(const AnalysisResults & results, const ProgramCfg & cfg);
std::vector<CheckSite> check_sites(const AnalysisResults & results, const ProgramCfg & cfg);

/// Field reads and field writes.
bool is_dereference(InstKind k) noexcept;

}  // namespace graduator
