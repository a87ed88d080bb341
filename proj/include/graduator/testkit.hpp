// graduator/testkit.hpp - seeded program generation and property oracles
#pragma once

#include "graduator/analysis.hpp"
#include "graduator/ast.hpp"
#include "graduator/lattice.hpp"
#include "graduator/runtime.hpp"

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace graduator::testkit {

/// Relative weights of generated statement shapes.
struct GenWeights
{
  double assign = 3;        // v := null | w | new{..}
  double logic = 1;         // v := w && u | w || u
  double call = 2;          // v := pj(w)
  double guarded_read = 2;  // if (w != null) { v := w.f } else { .. }
  double guarded_write = 1; // if (w != null) { w.f := v } else { .. }
  double call_read = 1;     // v := pj(w); u := v.f  (unguarded)
  double branch = 2;        // if/else on a variable or a compound condition
  double loop = 1;          // while (x == null) { x := p(x); } and traversals
};

struct GenConfig
{
  std::uint64_t seed = 1;
  int max_procs = 3;
  int max_stmts = 5;
  int max_depth = 2;
  /// Probability that an annotation site carries an annotation.
  double density = 1.0;
  GenWeights weights;
};

/// Pure function of `cfg`. Shape and annotations come from separate random
/// streams, so changing only the density changes only annotations.
std::string gen_source(const GenConfig & cfg);
Program gen_program(const GenConfig & cfg);

/// check_surface and validate pass, and gradual analysis has no static warnings.
bool is_valid(const Program & p);

/// Generates from derived seeds until a valid program appears. Warned call
/// arguments and returns are first repaired by relaxing NonNull to Nullable.
Program gen_valid_program(const GenConfig & cfg);

struct Verdict
{
  std::string name;
  bool pass = true;
  std::uint64_t cases = 0;
  std::vector<std::string> failures;

  void fail(std::string what);
};

/// Four-element lifting {Null, NonNull, Nullable, ?}; nullopt is `?`.
using NaiveAbst = std::optional<Abst>;
NaiveAbst naive_join(NaiveAbst a, NaiveAbst b);

Verdict oracle_lattice(const JoinTable & table = kJoinTable);

struct LocalSoundnessOptions
{
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  FlowFn flow = lifted_flow;
  bool assignments_only = false;
};

Verdict oracle_local_soundness(const LocalSoundnessOptions & opts = {});

using CheckSitesFn = std::function<std::vector<CheckSite>(const AnalysisResults &, const ProgramCfg &)>;

inline constexpr std::uint64_t kPropertyFuel = 10000;

/// Static and gradual fixpoints agree; plain and gradual traces agree.
Verdict conservative_extension(std::uint64_t n_programs, std::uint64_t seed);

/// Erasures stay valid, trace prefixes agree, and the fixpoint grows in precision.
Verdict gradual_guarantees(std::uint64_t n_programs, std::uint64_t seed, int erasures = 3);

/// No Stuck outcomes, state conditions and preservation hold along every
/// gradual trace, and every Error lands on a reported check site.
Verdict runtime_checks(std::uint64_t n_programs, std::uint64_t seed, double density = 0.5,
                       const CheckSitesFn & sites = check_sites);

/// All of the above.
std::vector<Verdict> oracle_properties(std::uint64_t n_programs, std::uint64_t seed,
                                         const CheckSitesFn & sites = check_sites);

/// Instruction kinds appearing in the CFGs of `n_programs` generated programs.
std::set<InstKind> instruction_coverage(std::uint64_t n_programs, std::uint64_t seed);

}  // namespace graduator::testkit
