#include "graduator/analysis.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <stdexcept>

namespace graduator {

std::string_view to_string(Mode m) noexcept { return m == Mode::Static ? "static" : "gradual"; }

std::string_view to_string(Category c) noexcept
{
  switch (c) {
    case Category::GradualStatic: return "GRADUAL_STATIC";
    case Category::GradualCheck: return "GRADUAL_CHECK";
    case Category::GradualBoundary: return "GRADUAL_BOUNDARY";
  }
  return "GRADUAL_STATIC";
}

bool is_dereference(InstKind k) noexcept
{
  return k == InstKind::FieldRead || k == InstKind::FieldWrite;
}

AbstractState state_join(const AbstractState & s1, const AbstractState & s2, const ValueJoin & join)
{
  AbstractState out = s1;
  for (const auto & [x, b] : s2) {
    auto [it, inserted] = out.emplace(x, b);
    if (!inserted) it->second = join(it->second, b);
  }
  return out;
}

bool state_leq(const AbstractState & s1, const AbstractState & s2, const ValueJoin & join)
{
  return state_join(s1, s2, join) == s2;
}

namespace {

Abst and_rule(Abst a, Abst b)
{
  if (a == Abst::Null || b == Abst::Null) return Abst::Null;
  if (a == Abst::Nullable || b == Abst::Nullable) return Abst::Nullable;
  return Abst::NonNull;
}

Abst or_rule(Abst a, Abst b)
{
  if (a == Abst::NonNull || b == Abst::NonNull) return Abst::NonNull;
  if (a == Abst::Nullable || b == Abst::Nullable) return Abst::Nullable;
  return Abst::Null;
}

Abst static_ann(Ann a)
{
  switch (a) {
    case Ann::Nullable: return Abst::Nullable;
    case Ann::NonNull: return Abst::NonNull;
    case Ann::Missing: break;
  }
  throw std::logic_error("static analysis applied to a missing annotation");
}

AbstractState entry_state(std::span<const std::string> universe)
{
  AbstractState out;
  for (const std::string & x : universe) out.emplace(x, lift(Abst::Null));
  return out;
}

std::optional<GradAbst> lookup(const AbstractState & s, const std::string & x)
{
  auto it = s.find(x);
  if (it == s.end()) return std::nullopt;
  return it->second;
}

void set_or_erase(AbstractState & s, const std::string & x, std::optional<GradAbst> v)
{
  if (v) {
    s[x] = *v;
  } else {
    s.erase(x);
  }
}

/// Shared skeleton of flow and lifted_flow. Only the binary connectives and
/// the annotation-carrying instructions differ between the two.
template <typename Binary, typename AnnValue>
AbstractState transfer(const Instruction & i, const AbstractState & s,
                       std::span<const std::string> universe, Binary binary, AnnValue ann_value)
{
  switch (i.kind) {
    case InstKind::Main: return entry_state(universe);
    case InstKind::Proc: {
      AbstractState out = entry_state(universe);
      out[i.target] = ann_value(i.param_ann);
      return out;
    }
    case InstKind::Branch:
    case InstKind::Return: return s;
    default: break;
  }

  AbstractState out = s;
  switch (i.kind) {
    case InstKind::Copy: set_or_erase(out, i.target, lookup(s, i.operand)); break;
    case InstKind::If: out[i.target] = lift(Abst::NonNull); break;
    case InstKind::Else: out[i.target] = lift(Abst::Null); break;
    case InstKind::Call: out[i.target] = ann_value(i.ret_ann); break;
    case InstKind::AssignNull: out[i.target] = lift(Abst::Null); break;
    case InstKind::New: out[i.target] = lift(Abst::NonNull); break;
    case InstKind::And:
    case InstKind::Or: {
      auto y = lookup(s, i.operand);
      auto z = lookup(s, i.operand2);
      std::optional<GradAbst> v;
      if (y && z) v = binary(i.kind == InstKind::And, *y, *z);
      set_or_erase(out, i.target, v);
      break;
    }
    case InstKind::FieldRead:
      out[i.target] = lift(Abst::Nullable);
      out[i.operand] = lift(Abst::NonNull);
      break;
    case InstKind::FieldWrite: out[i.target] = lift(Abst::NonNull); break;
    default: break;
  }
  return out;
}

void require_exact(const AbstractState & s)
{
  for (const auto & [x, v] : s) {
    if (!v.is_exact()) throw std::logic_error("static flow applied to non-exact value of " + x);
  }
}

}  // namespace

AbstractState flow(const Instruction & i, const AbstractState & s, std::span<const std::string> universe)
{
  require_exact(s);
  auto binary = [](bool is_and, GradAbst y, GradAbst z) {
    return lift(is_and ? and_rule(y.base(), z.base()) : or_rule(y.base(), z.base()));
  };
  auto ann_value = [](Ann a) { return lift(static_ann(a)); };
  return transfer(i, s, universe, binary, ann_value);
}

AbstractState lifted_flow(const Instruction & i, const AbstractState & s,
                          std::span<const std::string> universe)
{
  auto binary = [](bool is_and, GradAbst y, GradAbst z) {
    AbstSet outcomes;
    gamma(y).for_each([&](Abst a) {
      gamma(z).for_each([&](Abst b) { outcomes = outcomes.with(is_and ? and_rule(a, b) : or_rule(a, b)); });
    });
    return alpha(outcomes);
  };
  return transfer(i, s, universe, binary, to_grad);
}

std::vector<std::pair<std::string, GradAbst>> safety_footprint(const Instruction & i)
{
  switch (i.kind) {
    case InstKind::Call: return {{i.operand, to_grad(i.param_ann)}};
    case InstKind::Return: return {{i.target, to_grad(i.ret_ann)}};
    case InstKind::FieldRead: return {{i.operand, lift(Abst::NonNull)}};
    case InstKind::FieldWrite: return {{i.target, lift(Abst::NonNull)}};
    default: return {};
  }
}

GradAbst lifted_safe(const Instruction & i, const std::string & x)
{
  for (const auto & [var, req] : safety_footprint(i)) {
    if (var == x) return req;
  }
  return lift(Abst::Nullable);
}

Abst safe(const Instruction & i, const std::string & x)
{
  GradAbst g = lifted_safe(i, x);
  if (!g.is_exact()) throw std::logic_error("static safety applied to a missing annotation");
  return g.base();
}

AnalysisResults kildall(const FlowFn & flow_fn, const ValueJoin & join, const ProgramCfg & cfg,
                        Mode mode, const KildallOptions & opts)
{
  const auto n = cfg.vertices.size();
  AnalysisResults res;
  res.mode = mode;
  res.states.assign(n, AbstractState{});

  std::vector<VertexId> initial;
  std::vector<bool> placed(n, false);
  for (const ProcedureGraph & g : cfg.procedures) {
    for (VertexId v : reverse_postorder(cfg, g.entry)) {
      if (!placed[v]) {
        placed[v] = true;
        initial.push_back(v);
      }
    }
  }
  for (VertexId v = 0; v < n; ++v) {
    if (!placed[v]) initial.push_back(v);
  }

  std::vector<bool> queued(n, true);
  std::deque<VertexId> fifo;
  std::vector<VertexId> pool;
  std::mt19937_64 rng(opts.shuffle_seed.value_or(0));
  if (opts.shuffle_seed) {
    pool = initial;
  } else {
    fifo.assign(initial.begin(), initial.end());
  }

  auto take = [&]() -> VertexId {
    if (!opts.shuffle_seed) {
      VertexId v = fifo.front();
      fifo.pop_front();
      return v;
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::size_t k = pick(rng);
    VertexId v = pool[k];
    pool[k] = pool.back();
    pool.pop_back();
    return v;
  };
  auto put = [&](VertexId v) {
    if (opts.shuffle_seed) {
      pool.push_back(v);
    } else {
      fifo.push_back(v);
    }
  };
  auto empty = [&] { return opts.shuffle_seed ? pool.empty() : fifo.empty(); };

  while (!empty()) {
    VertexId v = take();
    queued[v] = false;
    const Vertex & vx = cfg.vertex(v);
    AbstractState out = flow_fn(vx.inst, res.states[v], cfg.owner_of(v).variables);
    for (VertexId u : vx.succ) {
      AbstractState joined = state_join(res.states[u], out, join);
      if (joined != res.states[u]) {
        res.states[u] = std::move(joined);
        if (!queued[u]) {
          queued[u] = true;
          put(u);
        }
      }
    }
  }
  return res;
}

AnalysisResults analyze(const ProgramCfg & cfg, Mode mode, const KildallOptions & opts)
{
  if (mode == Mode::Static) {
    auto base = [](GradAbst a, GradAbst b) { return lift(base_join(a.base(), b.base())); };
    return kildall(flow, base, cfg, mode, opts);
  }
  return kildall(lifted_flow, lifted_join, cfg, mode, opts);
}

namespace {

Finding make_finding(const ProgramCfg & cfg, const Vertex & v, Category c, const std::string & x,
                     GradAbst required, GradAbst found)
{
  Finding f;
  f.category = c;
  f.vertex = v.id;
  f.proc = cfg.owner_of(v.id).name;
  f.loc = v.loc;
  f.variable = x;
  f.required = ceil(required);
  f.found = found;
  return f;
}

void sort_findings(std::vector<Finding> & fs)
{
  std::stable_sort(fs.begin(), fs.end(), [](const Finding & a, const Finding & b) {
    if (a.vertex != b.vertex) return a.vertex < b.vertex;
    return a.variable < b.variable;
  });
}

}  // namespace

std::vector<Warning> static_warnings(const AnalysisResults & results, const ProgramCfg & cfg)
{
  std::vector<Warning> out;
  for (const Vertex & v : cfg.vertices) {
    const AbstractState & s = results.at(v.id);
    for (const auto & [x, required] : safety_footprint(v.inst)) {
      auto found = lookup(s, x);
      if (!found) continue;
      bool ok = results.mode == Mode::Static ? base_leq(found->base(), required.base())
                                             : lifted_leq(*found, required);
      if (!ok) out.push_back(make_finding(cfg, v, Category::GradualStatic, x, required, *found));
    }
  }
  sort_findings(out);
  return out;
}

std::vector<CheckSite> check_sites(const AnalysisResults & results, const ProgramCfg & cfg)
{
  std::vector<CheckSite> out;
  for (const Vertex & v : cfg.vertices) {
    const AbstractState & s = results.at(v.id);
    for (const auto & [x, required] : safety_footprint(v.inst)) {
      auto found = lookup(s, x);
      if (!found || !lifted_leq(*found, required)) continue;
      if (base_leq(ceil(*found), ceil(required))) continue;
      Category c = is_dereference(v.inst.kind) ? Category::GradualCheck : Category::GradualBoundary;
      out.push_back(make_finding(cfg, v, c, x, required, *found));
    }
  }
  sort_findings(out);
  return out;
}

}  // namespace graduator
