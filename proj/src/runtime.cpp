#include "graduator/runtime.hpp"

#include <algorithm>

namespace graduator {

std::string_view to_string(StuckReason r) noexcept
{
  switch (r) {
    case StuckReason::AnnotationViolation: return "annotation violation";
    case StuckReason::NullDereference: return "null dereference";
    case StuckReason::MissingField: return "missing field";
    case StuckReason::UndefinedVariable: return "undefined variable";
    case StuckReason::UnknownProcedure: return "unknown procedure";
    case StuckReason::MalformedState: return "malformed state";
  }
  return "malformed state";
}

MachineState initial_state(const ProgramCfg & cfg)
{
  MachineState s;
  s.stack.push_back(Frame{{}, cfg.main().entry});
  return s;
}

namespace {

bool satisfies(Ann a, Value v) { return a == Ann::Missing || conc_contains(to_grad(a).base(), v); }

Env zero_env(const ProcedureGraph & g)
{
  Env env;
  for (const std::string & x : g.variables) env.emplace(x, 0);
  return env;
}

std::optional<Value> read(const Env & env, const std::string & x)
{
  auto it = env.find(x);
  if (it == env.end()) return std::nullopt;
  return it->second;
}

Value fresh_location(const Heap & h) { return h.empty() ? 1 : h.rbegin()->first + 1; }

// One rule per instruction kind.
StepOutcome step_plain(const ProgramCfg & cfg, const MachineState & s)
{
  if (s.stack.empty()) return Stuck{0, StuckReason::MalformedState, {}};
  const VertexId v = s.top().vertex;
  const Vertex & vx = cfg.vertex(v);
  const Instruction & i = vx.inst;
  auto stuck = [&](StuckReason r, const std::string & x = {}) { return Stuck{v, r, x}; };

  if (i.kind == InstKind::Return) {
    auto y = read(s.top().env, i.target);
    if (!y) return stuck(StuckReason::UndefinedVariable, i.target);
    if (!satisfies(i.ret_ann, *y)) return stuck(StuckReason::AnnotationViolation, i.target);
    if (s.stack.size() == 1) return Final{s};
    MachineState out = s;
    out.stack.pop_back();
    Frame & caller = out.top();
    const Vertex & call = cfg.vertex(caller.vertex);
    if (call.inst.kind != InstKind::Call || call.succ.empty()) return stuck(StuckReason::MalformedState);
    caller.env[call.inst.target] = *y;
    caller.vertex = call.succ.front();
    return Stepped{std::move(out)};
  }

  if (vx.succ.empty()) {
    if (s.stack.size() == 1) return Final{s};
    return stuck(StuckReason::MalformedState);
  }

  MachineState out = s;
  Frame & f = out.top();
  const Env & env = s.top().env;
  VertexId next = vx.succ.front();

  switch (i.kind) {
    case InstKind::Main: f.env = zero_env(cfg.owner_of(v)); break;
    case InstKind::Proc: {
      if (s.stack.size() < 2) return stuck(StuckReason::MalformedState);
      const Frame & caller = s.stack[s.stack.size() - 2];
      const Vertex & call = cfg.vertex(caller.vertex);
      if (call.inst.kind != InstKind::Call) return stuck(StuckReason::MalformedState);
      auto arg = read(caller.env, call.inst.operand);
      if (!arg) return stuck(StuckReason::UndefinedVariable, call.inst.operand);
      if (!satisfies(i.param_ann, *arg)) return stuck(StuckReason::AnnotationViolation, i.target);
      f.env = zero_env(cfg.owner_of(v));
      f.env[i.target] = *arg;
      break;
    }
    case InstKind::Copy: {
      auto y = read(env, i.operand);
      if (!y) return stuck(StuckReason::UndefinedVariable, i.operand);
      f.env[i.target] = *y;
      break;
    }
    case InstKind::AssignNull: f.env[i.target] = 0; break;
    case InstKind::New: {
      Value loc = fresh_location(s.heap);
      Object obj;
      for (const std::string & field : i.fields) obj.emplace(field, 0);
      out.heap.emplace(loc, std::move(obj));
      f.env[i.target] = loc;
      break;
    }
    case InstKind::Call: {
      const ProcedureGraph * callee = cfg.find_procedure(i.proc);
      if (callee == nullptr || callee->is_main) return stuck(StuckReason::UnknownProcedure);
      auto y = read(env, i.operand);
      if (!y) return stuck(StuckReason::UndefinedVariable, i.operand);
      if (!satisfies(i.param_ann, *y)) return stuck(StuckReason::AnnotationViolation, i.operand);
      out.stack.push_back(Frame{{}, callee->entry});
      return Stepped{std::move(out)};
    }
    case InstKind::And:
    case InstKind::Or: {
      auto y = read(env, i.operand);
      if (!y) return stuck(StuckReason::UndefinedVariable, i.operand);
      auto z = read(env, i.operand2);
      if (!z) return stuck(StuckReason::UndefinedVariable, i.operand2);
      if (i.kind == InstKind::And) {
        f.env[i.target] = *y > 0 ? *z : *y;
      } else {
        f.env[i.target] = *y > 0 ? *y : *z;
      }
      break;
    }
    case InstKind::FieldRead: {
      auto y = read(env, i.operand);
      if (!y) return stuck(StuckReason::UndefinedVariable, i.operand);
      if (*y == 0) return stuck(StuckReason::NullDereference, i.operand);
      auto obj = s.heap.find(*y);
      if (obj == s.heap.end()) return stuck(StuckReason::MalformedState, i.operand);
      auto fv = obj->second.find(i.field);
      if (fv == obj->second.end()) return stuck(StuckReason::MissingField, i.operand);
      f.env[i.target] = fv->second;
      break;
    }
    case InstKind::FieldWrite: {
      auto x = read(env, i.target);
      if (!x) return stuck(StuckReason::UndefinedVariable, i.target);
      auto y = read(env, i.operand);
      if (!y) return stuck(StuckReason::UndefinedVariable, i.operand);
      if (*x == 0) return stuck(StuckReason::NullDereference, i.target);
      auto obj = out.heap.find(*x);
      if (obj == out.heap.end()) return stuck(StuckReason::MalformedState, i.target);
      auto fv = obj->second.find(i.field);
      if (fv == obj->second.end()) return stuck(StuckReason::MissingField, i.target);
      fv->second = *y;
      break;
    }
    case InstKind::Branch: {
      auto x = read(env, i.target);
      if (!x) return stuck(StuckReason::UndefinedVariable, i.target);
      InstKind want = *x > 0 ? InstKind::If : InstKind::Else;
      auto it = std::find_if(vx.succ.begin(), vx.succ.end(),
                             [&](VertexId u) { return cfg.vertex(u).inst.kind == want; });
      if (it == vx.succ.end()) return stuck(StuckReason::MalformedState);
      next = *it;
      break;
    }
    case InstKind::If:
    case InstKind::Else:
    case InstKind::Return: break;
  }
  f.vertex = next;
  return Stepped{std::move(out)};
}

}  // namespace

StepOutcome step(const ProgramCfg & cfg, const MachineState & s) { return step_plain(cfg, s); }

StepOutcome grad_step(const ProgramCfg & cfg, const MachineState & s)
{
  if (s.stack.empty()) return Stuck{0, StuckReason::MalformedState, {}};
  const Frame & f = s.top();
  auto footprint = safety_footprint(cfg.vertex(f.vertex).inst);
  std::sort(footprint.begin(), footprint.end(),
            [](const auto & a, const auto & b) { return a.first < b.first; });
  for (const auto & [x, required] : footprint) {
    auto val = read(f.env, x);
    if (val && !lifted_conc_contains(required, *val)) return Error{f.vertex, x, ceil(required), *val};
  }
  return step_plain(cfg, s);
}

bool desc(const Env & rho, const AbstractState & sigma)
{
  return std::all_of(sigma.begin(), sigma.end(), [&](const auto & kv) {
    auto v = read(rho, kv.first);
    return v && kv.second.is_exact() && conc_contains(kv.second.base(), *v);
  });
}

bool lifted_desc(const Env & rho, const AbstractState & sigma)
{
  return std::all_of(sigma.begin(), sigma.end(), [&](const auto & kv) {
    auto v = read(rho, kv.first);
    return v && lifted_conc_contains(kv.second, *v);
  });
}

std::vector<std::string> check_state_invariants(const ProgramCfg & cfg, const MachineState & s)
{
  std::vector<std::string> bad;
  auto flag = [&](const char * c) {
    if (std::find(bad.begin(), bad.end(), c) == bad.end()) bad.emplace_back(c);
  };
  if (s.stack.empty() || !cfg.owner_of(s.stack.front().vertex).is_main) flag("1");
  for (std::size_t k = 0; k < s.stack.size(); ++k) {
    const Frame & f = s.stack[k];
    const Instruction & i = cfg.vertex(f.vertex).inst;
    bool entry = i.kind == InstKind::Main || i.kind == InstKind::Proc;
    if (!entry) {
      for (const std::string & x : cfg.owner_of(f.vertex).variables) {
        if (!f.env.contains(x)) flag("2");
      }
    }
    if (i.kind == InstKind::If) {
      auto y = read(f.env, i.target);
      if (!y || *y == 0) flag("3");
    }
    if (i.kind == InstKind::Else) {
      auto y = read(f.env, i.target);
      if (!y || *y != 0) flag("4");
    }
    if (k + 1 < s.stack.size()) {
      auto y = read(f.env, i.operand);
      if (i.kind != InstKind::Call || !y || !satisfies(i.param_ann, *y)) flag("5");
    }
  }
  std::sort(bad.begin(), bad.end());
  return bad;
}

RunResult run(const ProgramCfg & cfg, RunMode mode, std::uint64_t max_steps, bool record_trace)
{
  RunResult res;
  MachineState s = initial_state(cfg);
  while (res.step_count < max_steps) {
    StepOutcome o = mode == RunMode::Plain ? step(cfg, s) : grad_step(cfg, s);
    if (auto * st = std::get_if<Stepped>(&o)) {
      if (record_trace) {
        const VertexId v = s.top().vertex;
        res.trace.push_back(TraceEntry{v, cfg.owner_of(v).name, render(cfg.vertex(v).inst), s.top().env});
      }
      ++res.step_count;
      s = std::move(st->state);
      continue;
    }
    if (auto * fin = std::get_if<Final>(&o)) {
      res.outcome = std::move(*fin);
    } else if (auto * stk = std::get_if<Stuck>(&o)) {
      res.outcome = *stk;
    } else {
      res.outcome = std::get<Error>(o);
    }
    return res;
  }
  res.outcome = FuelExhausted{std::move(s)};
  return res;
}

}  // namespace graduator
