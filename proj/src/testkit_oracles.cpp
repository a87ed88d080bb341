#include "graduator/testkit.hpp"

#include "graduator/cfg.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace graduator::testkit {

void Verdict::fail(std::string what)
{
  pass = false;
  if (failures.size() < 20) failures.push_back(std::move(what));
}

NaiveAbst naive_join(NaiveAbst a, NaiveAbst b)
{
  auto spread = [](NaiveAbst x) {
    return x ? std::vector<Abst>{*x} : std::vector<Abst>(kAllAbst.begin(), kAllAbst.end());
  };
  AbstSet joined;
  for (Abst x : spread(a)) {
    for (Abst y : spread(b)) joined = joined.with(base_join(x, y));
  }
  // With only four elements, anything but a singleton abstracts to `?`.
  for (Abst x : kAllAbst) {
    if (joined == AbstSet::of(x)) return x;
  }
  return std::nullopt;
}

namespace {

std::string str(GradAbst g) { return to_string(g); }

std::string str(NaiveAbst a) { return a ? std::string(to_string(*a)) : std::string("?"); }

}  // namespace

Verdict oracle_lattice(const JoinTable & table)
{
  Verdict v{"lattice", true, 0, {}};
  auto join = [&](GradAbst a, GradAbst b) { return table[a.index()][b.index()]; };

  for (GradAbst a : kAllGrad) {
    ++v.cases;
    if (join(a, a) != a) v.fail("idempotency " + str(a));
    for (GradAbst b : kAllGrad) {
      ++v.cases;
      if (join(a, b) != join(b, a)) v.fail("commutativity " + str(a) + " " + str(b));
      if (join(a, b) != lifted_join_enumerated(a, b)) v.fail("definition " + str(a) + " " + str(b));
      for (GradAbst c : kAllGrad) {
        ++v.cases;
        GradAbst l = join(a, join(b, c));
        GradAbst r = join(join(a, b), c);
        if (l != r) v.fail("associativity (" + str(a) + ", " + str(b) + ", " + str(c) + "): " + str(l) + " vs " + str(r));
      }
    }
  }

  for (Abst a : kAllAbst) {
    for (Abst b : kAllAbst) {
      ++v.cases;
      if (join(lift(a), lift(b)) != lift(base_join(a, b))) v.fail("join extension " + str(lift(a)) + " " + str(lift(b)));
      if (lifted_leq(lift(a), lift(b)) != base_leq(a, b)) v.fail("order extension " + str(lift(a)) + " " + str(lift(b)));
    }
  }

  for (std::uint8_t bits = 1; bits < 8; ++bits) {
    AbstSet s = AbstSet::from_bits(bits);
    GradAbst a = alpha(s);
    ++v.cases;
    if (!s.subset_of(gamma(a))) v.fail("galois soundness " + std::to_string(bits));
    for (GradAbst b : kAllGrad) {
      if (s.subset_of(gamma(b)) && !precision_leq(a, b)) {
        v.fail("galois optimality " + std::to_string(bits) + " " + str(b));
      }
    }
  }

  // Hasse diagram of the join-induced order against the expected edges.
  auto leq = [&](GradAbst a, GradAbst b) { return join(a, b) == b; };
  using Edge = std::pair<std::string, std::string>;
  std::set<Edge> hasse;
  for (GradAbst a : kAllGrad) {
    for (GradAbst b : kAllGrad) {
      if (a == b || !leq(a, b)) continue;
      bool covered = true;
      for (GradAbst c : kAllGrad) {
        if (c != a && c != b && leq(a, c) && leq(c, b)) covered = false;
      }
      if (covered) hasse.insert({str(a), str(b)});
    }
  }
  const std::set<Edge> expected = {
    {"Null", "?Null"},     {"?", "?Null"},         {"?", "?NonNull"},
    {"NonNull", "?NonNull"}, {"?Null", "Nullable"}, {"?NonNull", "Nullable"},
  };
  ++v.cases;
  if (hasse != expected) {
    for (const Edge & e : hasse) {
      if (!expected.contains(e)) v.fail("unexpected Hasse edge " + e.first + " < " + e.second);
    }
    for (const Edge & e : expected) {
      if (!hasse.contains(e)) v.fail("missing Hasse edge " + e.first + " < " + e.second);
    }
  }

  auto height = [](auto elems, auto le) {
    // Longest strictly ascending chain, counted in edges.
    std::size_t best = 0;
    std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t from, std::size_t len) {
      best = std::max(best, len);
      for (std::size_t to = 0; to < elems.size(); ++to) {
        if (to != from && le(elems[from], elems[to]) && !le(elems[to], elems[from])) walk(to, len + 1);
      }
    };
    for (std::size_t k = 0; k < elems.size(); ++k) walk(k, 0);
    return best;
  };
  std::vector<GradAbst> lifted(kAllGrad.begin(), kAllGrad.end());
  std::vector<Abst> base(kAllAbst.begin(), kAllAbst.end());
  std::size_t hl = height(lifted, leq);
  std::size_t hb = height(base, base_leq);
  ++v.cases;
  if (hl != hb + 1) v.fail("height " + std::to_string(hl) + " vs base " + std::to_string(hb));

  ++v.cases;
  NaiveAbst left = naive_join(Abst::Null, naive_join(Abst::NonNull, std::nullopt));
  NaiveAbst right = naive_join(naive_join(Abst::Null, Abst::NonNull), std::nullopt);
  if (left != std::nullopt || right != NaiveAbst(Abst::Nullable)) {
    v.fail("naive lifting counterexample: left " + str(left) + ", right " + str(right));
  }
  return v;
}

namespace {

/// One-instruction main procedure followed by a return, plus the branch
/// targets when needed.
struct MiniProgram
{
  ProgramCfg cfg;
  VertexId at = 0;
};

const std::vector<std::string> kVars = {"x", "y", "z"};

MiniProgram mini(const Instruction & i)
{
  MiniProgram m;
  ProcedureGraph g;
  g.name = "main";
  g.is_main = true;
  g.variables = kVars;
  m.cfg.procedures.push_back(g);
  m.cfg.fields = {"f"};
  m.at = m.cfg.add_vertex(0, i);
  VertexId r = m.cfg.add_vertex(0, Instruction::ret("x", Ann::Nullable));
  if (i.kind == InstKind::Branch) {
    VertexId t = m.cfg.add_vertex(0, Instruction::if_arm(i.target));
    VertexId e = m.cfg.add_vertex(0, Instruction::else_arm(i.target));
    m.cfg.add_edge(m.at, t);
    m.cfg.add_edge(m.at, e);
    m.cfg.add_edge(t, r);
    m.cfg.add_edge(e, r);
  } else {
    m.cfg.add_edge(m.at, r);
  }
  m.cfg.procedures[0].entry = m.at;
  return m;
}

std::string show(const Env & rho)
{
  std::ostringstream o;
  o << "{";
  for (const auto & [x, v] : rho) o << " " << x << "=" << v;
  o << " }";
  return o.str();
}

std::string show(const AbstractState & s)
{
  std::ostringstream o;
  o << "{";
  for (const auto & [x, v] : s) o << " " << x << "=" << to_string(v);
  o << " }";
  return o.str();
}

}  // namespace

Verdict oracle_local_soundness(const LocalSoundnessOptions & opts)
{
  Verdict verdict{"local soundness", true, 0, {}};
  std::mt19937_64 rng(opts.seed);
  auto range = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto var = [&] { return kVars[range(0, 2)]; };
  auto ann = [&] { return std::array{Ann::Nullable, Ann::NonNull, Ann::Missing}[range(0, 2)]; };
  auto satisfies = [](Ann a, Value v) { return lifted_conc_contains(to_grad(a), v); };

  for (std::uint64_t t = 0; t < opts.trials; ++t) {
    int kinds = opts.assignments_only ? 3 : kInstKindCount;
    auto kind = std::array{InstKind::Copy,   InstKind::AssignNull, InstKind::New,   InstKind::Call,
                           InstKind::And,    InstKind::Or,         InstKind::FieldRead,
                           InstKind::FieldWrite, InstKind::Branch, InstKind::If,  InstKind::Else,
                           InstKind::Return, InstKind::Main,       InstKind::Proc}[range(0, kinds - 1)];
    Instruction i;
    switch (kind) {
      case InstKind::Copy: i = Instruction::copy(var(), var()); break;
      case InstKind::AssignNull: i = Instruction::assign_null(var()); break;
      case InstKind::New: i = Instruction::make_new(var(), {"f"}); break;
      case InstKind::Call: i = Instruction::call(var(), "m", ann(), var(), ann()); break;
      case InstKind::And: i = Instruction::logical_and(var(), var(), var()); break;
      case InstKind::Or: i = Instruction::logical_or(var(), var(), var()); break;
      case InstKind::FieldRead: {
        std::string x = var();
        std::string y = var();
        while (y == x) y = var();
        i = Instruction::field_read(x, y, "f");
        break;
      }
      case InstKind::FieldWrite: i = Instruction::field_write(var(), "f", var()); break;
      case InstKind::Branch: i = Instruction::branch(var()); break;
      case InstKind::If: i = Instruction::if_arm(var()); break;
      case InstKind::Else: i = Instruction::else_arm(var()); break;
      case InstKind::Return: i = Instruction::ret(var(), ann()); break;
      case InstKind::Main: i = Instruction::main_entry(); break;
      case InstKind::Proc: i = Instruction::proc_entry("m", ann(), var(), ann()); break;
    }

    // Concrete environment over locations 0..2 with a two-object heap.
    Env rho;
    for (const std::string & x : kVars) rho[x] = Value(range(0, 2));
    Heap heap;
    heap[1] = {{"f", Value(range(0, 2))}};
    heap[2] = {{"f", Value(range(0, 2))}};

    // A random abstract state describing rho; some variables left undefined.
    AbstractState sigma;
    for (const std::string & x : kVars) {
      if (range(0, 4) == 0) continue;
      std::vector<GradAbst> options;
      for (GradAbst g : kAllGrad) {
        if (lifted_conc_contains(g, rho[x])) options.push_back(g);
      }
      sigma[x] = options[range(0, int(options.size()) - 1)];
    }

    // Successor environments of a single execution step.
    std::vector<Env> after;
    switch (kind) {
      case InstKind::Call:
        if (!satisfies(i.param_ann, rho[i.operand])) break;
        for (Value v : {Value(0), Value(1)}) {
          if (!satisfies(i.ret_ann, v)) continue;
          Env r = rho;
          r[i.target] = v;
          after.push_back(r);
        }
        break;
      case InstKind::Proc:
        for (Value v : {Value(0), Value(1)}) {
          if (!satisfies(i.param_ann, v)) continue;
          Env r;
          for (const std::string & x : kVars) r[x] = 0;
          r[i.target] = v;
          after.push_back(r);
        }
        break;
      case InstKind::Main: {
        Env r;
        for (const std::string & x : kVars) r[x] = 0;
        after.push_back(r);
        break;
      }
      case InstKind::Return:
        if (satisfies(i.ret_ann, rho[i.target])) after.push_back(rho);
        break;
      case InstKind::If:
        if (rho[i.target] != 0) after.push_back(rho);
        break;
      case InstKind::Else:
        if (rho[i.target] == 0) after.push_back(rho);
        break;
      default: {
        MiniProgram m = mini(i);
        MachineState s;
        s.stack.push_back(Frame{rho, m.at});
        s.heap = heap;
        StepOutcome o = step(m.cfg, s);
        if (auto * st = std::get_if<Stepped>(&o)) after.push_back(st->state.top().env);
        break;
      }
    }

    AbstractState predicted = opts.flow(i, sigma, kVars);
    for (const Env & r : after) {
      ++verdict.cases;
      if (!lifted_desc(r, predicted)) {
        verdict.fail(render(i) + " from " + show(rho) + " with " + show(sigma) + " reaches " + show(r) +
                     " not described by " + show(predicted));
      }
    }
  }
  return verdict;
}

namespace {

GenConfig config_for(std::uint64_t seed, std::uint64_t k, double density)
{
  GenConfig c;
  c.seed = seed * 1000003ULL + k;
  c.density = density;
  return c;
}

std::string outcome_name(const RunOutcome & o)
{
  switch (o.index()) {
    case 0: return "final";
    case 1: return "stuck";
    case 2: return "error";
    default: return "fuel";
  }
}

bool same_trace(const RunResult & a, const RunResult & b, std::size_t upto)
{
  if (a.trace.size() < upto || b.trace.size() < upto) return false;
  for (std::size_t k = 0; k < upto; ++k) {
    if (a.trace[k].vertex != b.trace[k].vertex || a.trace[k].env != b.trace[k].env) return false;
  }
  return true;
}

std::string where(const GenConfig & c, const Program & p)
{
  return "seed " + std::to_string(c.seed) + "\n" + pretty_print(p);
}

}  // namespace

Verdict conservative_extension(std::uint64_t n_programs, std::uint64_t seed)
{
  Verdict v{"conservative extension", true, 0, {}};
  for (std::uint64_t k = 0; k < n_programs; ++k) {
    GenConfig c = config_for(seed, k, 1.0);
    Program p = gen_valid_program(c);
    ++v.cases;
    if (!fully_annotated(p)) {
      v.fail("not fully annotated: " + where(c, p));
      continue;
    }
    ProgramCfg g = lower(p);
    AnalysisResults st = analyze(g, Mode::Static);
    AnalysisResults gr = analyze(g, Mode::Gradual);
    if (st.states != gr.states) v.fail("static and gradual fixpoints differ: " + where(c, p));
    if (!static_warnings(st, g).empty()) v.fail("static warnings on a valid program: " + where(c, p));
    RunResult plain = run(g, RunMode::Plain, kPropertyFuel);
    RunResult grad = run(g, RunMode::Gradual, kPropertyFuel);
    if (plain.step_count != grad.step_count || !same_trace(plain, grad, plain.trace.size()) ||
        plain.outcome.index() != grad.outcome.index()) {
      v.fail("plain and gradual traces differ (" + outcome_name(plain.outcome) + "/" + outcome_name(grad.outcome) +
             "): " + where(c, p));
    }
  }
  return v;
}

Verdict gradual_guarantees(std::uint64_t n_programs, std::uint64_t seed, int erasures)
{
  Verdict v{"gradual guarantees", true, 0, {}};
  for (std::uint64_t k = 0; k < n_programs; ++k) {
    GenConfig c = config_for(seed, k, 1.0);
    Program p1 = gen_valid_program(c);
    ProgramCfg g1 = lower(p1);
    AnalysisResults pi1 = analyze(g1, Mode::Gradual);
    RunResult r1 = run(g1, RunMode::Gradual, kPropertyFuel);
    std::vector<std::string> sites = annotation_sites(p1);
    std::mt19937_64 rng(c.seed ^ 0xe7037ed1a0b428dbULL);
    for (int e = 0; e < erasures; ++e) {
      ++v.cases;
      std::set<std::string> chosen;
      for (const std::string & s : sites) {
        if (std::bernoulli_distribution(0.5)(rng)) chosen.insert(s);
      }
      Program p2 = erase_annotations(p1, chosen);
      std::string tag = "erasure " + std::to_string(e) + " of " + where(c, p1);
      if (!precision_leq_prog(p1, p2)) v.fail("erasure not less precise: " + tag);
      if (!is_valid(p2)) {
        v.fail("erased variant not statically valid: " + tag);
        continue;
      }
      ProgramCfg g2 = lower(p2);
      AnalysisResults pi2 = analyze(g2, Mode::Gradual);
      for (VertexId u = 0; u < g1.vertices.size(); ++u) {
        for (const auto & [x, a] : pi1.at(u)) {
          auto it = pi2.at(u).find(x);
          if (it == pi2.at(u).end() || !precision_leq(a, it->second)) {
            v.fail("fixpoint lost precision at vertex " + std::to_string(u) + " for " + x + ": " + tag);
          }
        }
      }
      RunResult r2 = run(g2, RunMode::Gradual, kPropertyFuel);
      bool p1_error = std::holds_alternative<Error>(r1.outcome);
      if (!same_trace(r1, r2, r1.trace.size())) {
        v.fail("trace diverges before the first error: " + tag);
      } else if (!p1_error && (r1.outcome.index() != r2.outcome.index() || r1.step_count != r2.step_count)) {
        v.fail("outcome differs (" + outcome_name(r1.outcome) + "/" + outcome_name(r2.outcome) + "): " + tag);
      }
    }
  }
  return v;
}

Verdict runtime_checks(std::uint64_t n_programs, std::uint64_t seed, double density, const CheckSitesFn & sites)
{
  Verdict v{"runtime checks", true, 0, {}};
  for (std::uint64_t k = 0; k < n_programs; ++k) {
    GenConfig c = config_for(seed, k, density);
    Program p = gen_valid_program(c);
    ProgramCfg g = lower(p);
    AnalysisResults pi = analyze(g, Mode::Gradual);
    std::vector<CheckSite> checks = sites(pi, g);
    ++v.cases;

    MachineState s = initial_state(g);
    for (std::uint64_t n = 0; n < kPropertyFuel; ++n) {
      for (const Frame & f : s.stack) {
        if (!lifted_desc(f.env, pi.at(f.vertex))) {
          v.fail("preservation fails at vertex " + std::to_string(f.vertex) + ": " + where(c, p));
          break;
        }
      }
      auto bad = check_state_invariants(g, s);
      if (!bad.empty()) v.fail("state condition " + bad.front() + " violated: " + where(c, p));

      StepOutcome o = grad_step(g, s);
      if (auto * st = std::get_if<Stepped>(&o)) {
        s = std::move(st->state);
        continue;
      }
      if (auto * stuck = std::get_if<Stuck>(&o)) {
        v.fail("stuck (" + std::string(to_string(stuck->reason)) + ") at vertex " + std::to_string(stuck->vertex) +
               ": " + where(c, p));
      } else if (auto * err = std::get_if<Error>(&o)) {
        bool listed = std::any_of(checks.begin(), checks.end(), [&](const CheckSite & cs) {
          return cs.vertex == err->vertex && cs.variable == err->variable;
        });
        if (!listed) {
          v.fail("error at vertex " + std::to_string(err->vertex) + " on " + err->variable +
                 " has no check site: " + where(c, p));
        }
      }
      break;
    }
  }
  return v;
}

std::vector<Verdict> oracle_properties(std::uint64_t n_programs, std::uint64_t seed, const CheckSitesFn & sites)
{
  return {conservative_extension(n_programs, seed), gradual_guarantees(n_programs, seed),
          runtime_checks(n_programs, seed, 0.5, sites)};
}

std::set<InstKind> instruction_coverage(std::uint64_t n_programs, std::uint64_t seed)
{
  std::set<InstKind> seen;
  for (std::uint64_t k = 0; k < n_programs; ++k) {
    GenConfig c;
    c.seed = seed * 1000003ULL + k;
    for (const Vertex & v : lower(gen_program(c)).vertices) seen.insert(v.inst.kind);
  }
  return seen;
}

}  // namespace graduator::testkit
