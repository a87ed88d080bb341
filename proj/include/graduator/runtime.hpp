// graduator/runtime.hpp - small-step interpreter with plain and gradual semantics
#pragma once

#include "graduator/analysis.hpp"
#include "graduator/cfg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace graduator {

/// Partial map from variables to values; 0 is null.
using Env = std::map<std::string, Value>;
using Object = std::map<std::string, Value>;
/// Keys are nonzero locations.
using Heap = std::map<Value, Object>;

struct Frame
{
  Env env;
  VertexId vertex = 0;
  bool operator==(const Frame &) const = default;
};

struct MachineState
{
  /// Bottom frame first; the top frame is back().
  std::vector<Frame> stack;
  Heap heap;

  const Frame & top() const { return stack.back(); }
  Frame & top() { return stack.back(); }
  bool operator==(const MachineState &) const = default;
};

/// Single frame with an empty environment at the main vertex.
MachineState initial_state(const ProgramCfg & cfg);

enum class StuckReason : std::uint8_t {
  AnnotationViolation,
  NullDereference,
  MissingField,
  UndefinedVariable,
  UnknownProcedure,
  MalformedState,
};

std::string_view to_string(StuckReason r) noexcept;

struct Stepped
{
  MachineState state;
};

struct Final
{
  MachineState state;
};

struct Stuck
{
  VertexId vertex = 0;
  StuckReason reason = StuckReason::MalformedState;
  std::string variable;
};

struct Error
{
  VertexId vertex = 0;
  std::string variable;
  Abst required = Abst::Nullable;
  Value found = 0;
};

using StepOutcome = std::variant<Stepped, Final, Stuck, Error>;

/// Plain semantics. Never produces Error.
StepOutcome step(const ProgramCfg & cfg, const MachineState & s);

/// Gradual semantics: traps unsafe states into Error before stepping.
StepOutcome grad_step(const ProgramCfg & cfg, const MachineState & s);

bool desc(const Env & rho, const AbstractState & sigma);
bool lifted_desc(const Env & rho, const AbstractState & sigma);

/// Names of violated state conditions ("1" .. "5"); empty when all hold.
std::vector<std::string> check_state_invariants(const ProgramCfg & cfg, const MachineState & s);

enum class RunMode : std::uint8_t { Plain, Gradual };

struct FuelExhausted
{
  MachineState state;
};

using RunOutcome = std::variant<Final, Stuck, Error, FuelExhausted>;

struct TraceEntry
{
  VertexId vertex = 0;
  std::string proc;
  std::string instruction;
  /// Top frame environment before the step.
  Env env;
};

struct RunResult
{
  RunOutcome outcome;
  std::vector<TraceEntry> trace;
  std::uint64_t step_count = 0;
};

inline constexpr std::uint64_t kDefaultMaxSteps = 100000;

RunResult run(const ProgramCfg & cfg, RunMode mode, std::uint64_t max_steps = kDefaultMaxSteps,
              bool record_trace = true);

}  // namespace graduator
