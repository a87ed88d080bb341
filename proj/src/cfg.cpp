#include "graduator/cfg.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <utility>

namespace graduator {

Instruction Instruction::copy(std::string x, std::string y)
{
  Instruction i;
  i.kind = InstKind::Copy;
  i.target = std::move(x);
  i.operand = std::move(y);
  return i;
}

Instruction Instruction::assign_null(std::string x)
{
  Instruction i;
  i.kind = InstKind::AssignNull;
  i.target = std::move(x);
  return i;
}

Instruction Instruction::call(std::string x, std::string m, Ann a, std::string y, Ann b)
{
  Instruction i;
  i.kind = InstKind::Call;
  i.target = std::move(x);
  i.proc = std::move(m);
  i.ret_ann = a;
  i.operand = std::move(y);
  i.param_ann = b;
  return i;
}

Instruction Instruction::make_new(std::string x, std::vector<std::string> fields)
{
  Instruction i;
  i.kind = InstKind::New;
  i.target = std::move(x);
  i.fields = std::move(fields);
  return i;
}

Instruction Instruction::logical_and(std::string x, std::string y, std::string z)
{
  Instruction i;
  i.kind = InstKind::And;
  i.target = std::move(x);
  i.operand = std::move(y);
  i.operand2 = std::move(z);
  return i;
}

Instruction Instruction::logical_or(std::string x, std::string y, std::string z)
{
  Instruction i = logical_and(std::move(x), std::move(y), std::move(z));
  i.kind = InstKind::Or;
  return i;
}

Instruction Instruction::field_read(std::string x, std::string y, std::string f)
{
  Instruction i;
  i.kind = InstKind::FieldRead;
  i.target = std::move(x);
  i.operand = std::move(y);
  i.field = std::move(f);
  return i;
}

Instruction Instruction::field_write(std::string x, std::string f, std::string y)
{
  Instruction i;
  i.kind = InstKind::FieldWrite;
  i.target = std::move(x);
  i.field = std::move(f);
  i.operand = std::move(y);
  return i;
}

Instruction Instruction::branch(std::string x)
{
  Instruction i;
  i.kind = InstKind::Branch;
  i.target = std::move(x);
  return i;
}

Instruction Instruction::if_arm(std::string x)
{
  Instruction i = branch(std::move(x));
  i.kind = InstKind::If;
  return i;
}

Instruction Instruction::else_arm(std::string x)
{
  Instruction i = branch(std::move(x));
  i.kind = InstKind::Else;
  return i;
}

Instruction Instruction::ret(std::string y, Ann a)
{
  Instruction i;
  i.kind = InstKind::Return;
  i.target = std::move(y);
  i.ret_ann = a;
  return i;
}

Instruction Instruction::main_entry()
{
  Instruction i;
  i.kind = InstKind::Main;
  return i;
}

Instruction Instruction::proc_entry(std::string m, Ann a, std::string y, Ann b)
{
  Instruction i;
  i.kind = InstKind::Proc;
  i.proc = std::move(m);
  i.ret_ann = a;
  i.target = std::move(y);
  i.param_ann = b;
  return i;
}

std::string_view kind_name(InstKind k) noexcept
{
  switch (k) {
    case InstKind::Copy: return "copy";
    case InstKind::AssignNull: return "null";
    case InstKind::Call: return "call";
    case InstKind::New: return "new";
    case InstKind::And: return "and";
    case InstKind::Or: return "or";
    case InstKind::FieldRead: return "field-read";
    case InstKind::FieldWrite: return "field-write";
    case InstKind::Branch: return "branch";
    case InstKind::If: return "if";
    case InstKind::Else: return "else";
    case InstKind::Return: return "return";
    case InstKind::Main: return "main";
    case InstKind::Proc: return "proc";
  }
  return "?";
}

std::string render(const Instruction & i)
{
  std::ostringstream os;
  switch (i.kind) {
    case InstKind::Copy: os << i.target << " := " << i.operand; break;
    case InstKind::AssignNull: os << i.target << " := null"; break;
    case InstKind::Call:
      os << i.target << " := " << i.proc << '@' << to_string(i.ret_ann) << '(' << i.operand << '@'
         << to_string(i.param_ann) << ')';
      break;
    case InstKind::New:
      os << i.target << " := new{";
      for (std::size_t k = 0; k < i.fields.size(); ++k) os << (k ? ", " : "") << i.fields[k];
      os << '}';
      break;
    case InstKind::And: os << i.target << " := " << i.operand << " && " << i.operand2; break;
    case InstKind::Or: os << i.target << " := " << i.operand << " || " << i.operand2; break;
    case InstKind::FieldRead: os << i.target << " := " << i.operand << '.' << i.field; break;
    case InstKind::FieldWrite: os << i.target << '.' << i.field << " := " << i.operand; break;
    case InstKind::Branch: os << "branch(" << i.target << ')'; break;
    case InstKind::If: os << "if(" << i.target << ')'; break;
    case InstKind::Else: os << "else(" << i.target << ')'; break;
    case InstKind::Return: os << "return " << i.target << '@' << to_string(i.ret_ann); break;
    case InstKind::Main: os << "main"; break;
    case InstKind::Proc:
      os << i.proc << '@' << to_string(i.ret_ann) << " proc(" << i.target << '@'
         << to_string(i.param_ann) << ')';
      break;
  }
  return os.str();
}

const ProcedureGraph * ProgramCfg::find_procedure(std::string_view name) const
{
  for (const ProcedureGraph & g : procedures) {
    if (!g.is_main && g.name == name) return &g;
  }
  return nullptr;
}

VertexId ProgramCfg::add_vertex(std::size_t owner, Instruction inst, SourceLoc loc)
{
  Vertex v;
  v.id = VertexId(vertices.size());
  v.inst = std::move(inst);
  v.owner = owner;
  v.loc = loc;
  vertices.push_back(std::move(v));
  procedures.at(owner).vertices.push_back(vertices.back().id);
  return vertices.back().id;
}

void ProgramCfg::add_edge(VertexId from, VertexId to)
{
  auto & succ = vertices.at(from).succ;
  if (std::find(succ.begin(), succ.end(), to) != succ.end()) return;
  succ.push_back(to);
  vertices.at(to).pred.push_back(from);
}

// ---------------------------------------------------------------------------
// Lowering
// ---------------------------------------------------------------------------

namespace {

class Lowerer
{
public:
  Lowerer(const Program & p, ProgramCfg & cfg) : prog_(p), cfg_(cfg) {}

  void main_block()
  {
    begin("main", true, Ann::Nullable, Ann::Missing);
    cur().entry = emit(Instruction::main_entry(), prog_.main_loc);
    block(prog_.main);
    finish();
  }

  void procedure(const Procedure & proc)
  {
    begin(proc.name, false, proc.return_ann, proc.param_ann);
    declared_.push_back(proc.param);
    cur().entry =
      emit(Instruction::proc_entry(proc.name, proc.return_ann, proc.param, proc.param_ann), proc.loc);
    block(proc.body);
    finish();
  }

private:
  ProcedureGraph & cur() { return cfg_.procedures[owner_]; }

  void begin(std::string name, bool is_main, Ann ret, Ann param)
  {
    ProcedureGraph g;
    g.name = std::move(name);
    g.is_main = is_main;
    g.ret_ann = ret;
    g.param_ann = param;
    cfg_.procedures.push_back(std::move(g));
    owner_ = cfg_.procedures.size() - 1;
    declared_.clear();
    temps_.clear();
    pending_.clear();
  }

  void finish()
  {
    auto & vars = cur().variables;
    for (const std::string & v : declared_) {
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    }
    for (const std::string & t : temps_) vars.push_back(t);
  }

  VertexId emit(Instruction inst, SourceLoc loc)
  {
    VertexId id = cfg_.add_vertex(owner_, std::move(inst), loc);
    for (VertexId p : pending_) cfg_.add_edge(p, id);
    pending_ = {id};
    return id;
  }

  std::string fresh()
  {
    std::string t = "$" + std::to_string(temps_.size());
    temps_.push_back(t);
    return t;
  }

  void block(const Block & b)
  {
    for (const Stmt & s : b) stmt(s);
  }

  void stmt(const Stmt & s)
  {
    switch (s.kind) {
      case Stmt::Kind::Skip: break;
      case Stmt::Kind::Decl: declared_.push_back(s.target); break;
      case Stmt::Kind::Assign: assign(s.target, s.value, s.loc); break;
      case Stmt::Kind::FieldAssign:
        emit(Instruction::field_write(s.target, s.field, s.source), s.loc);
        break;
      case Stmt::Kind::If: {
        auto [if_v, else_v] = condition(s.cond, s.loc);
        VertexId true_arm = s.cond.is_null ? else_v : if_v;
        VertexId false_arm = s.cond.is_null ? if_v : else_v;
        pending_ = {true_arm};
        block(s.then_block);
        std::vector<VertexId> joined = pending_;
        pending_ = {false_arm};
        block(s.else_block);
        joined.insert(joined.end(), pending_.begin(), pending_.end());
        pending_ = std::move(joined);
        break;
      }
      case Stmt::Kind::While: {
        auto head = VertexId(cfg_.vertices.size());
        auto [if_v, else_v] = condition(s.cond, s.loc);
        VertexId body_arm = s.cond.is_null ? else_v : if_v;
        VertexId exit_arm = s.cond.is_null ? if_v : else_v;
        pending_ = {body_arm};
        block(s.then_block);
        for (VertexId p : pending_) cfg_.add_edge(p, head);
        pending_ = {exit_arm};
        break;
      }
      case Stmt::Kind::Return:
        emit(Instruction::ret(s.target, cur().ret_ann), s.loc);
        pending_.clear();
        break;
    }
  }

  std::pair<VertexId, VertexId> condition(const Cond & c, SourceLoc loc)
  {
    std::string tested = c.expr.kind == Expr::Kind::Var ? c.expr.name : atom(c.expr, loc);
    VertexId b = emit(Instruction::branch(tested), loc);
    VertexId if_v = cfg_.add_vertex(owner_, Instruction::if_arm(tested), loc);
    VertexId else_v = cfg_.add_vertex(owner_, Instruction::else_arm(tested), loc);
    cfg_.add_edge(b, if_v);
    cfg_.add_edge(b, else_v);
    return {if_v, else_v};
  }

  std::string atom(const Expr & e, SourceLoc loc)
  {
    if (e.kind == Expr::Kind::Var) return e.name;
    std::string t = fresh();
    assign(t, e, loc);
    return t;
  }

  void assign(const std::string & x, const Expr & e, SourceLoc loc)
  {
    switch (e.kind) {
      case Expr::Kind::Null: emit(Instruction::assign_null(x), loc); break;
      case Expr::Kind::Var: emit(Instruction::copy(x, e.name), loc); break;
      case Expr::Kind::New: emit(Instruction::make_new(x, e.fields), loc); break;
      case Expr::Kind::And:
      case Expr::Kind::Or: {
        std::string y = atom(e.operands[0], loc);
        std::string z = atom(e.operands[1], loc);
        emit(e.kind == Expr::Kind::And ? Instruction::logical_and(x, y, z)
                                       : Instruction::logical_or(x, y, z),
             loc);
        break;
      }
      case Expr::Kind::Field: {
        std::string y = atom(e.operands[0], loc);
        if (y == x) {
          // Never emit an aliased field read: the receiver refinement would
          // overwrite the loaded value's abstraction.
          std::string t = fresh();
          emit(Instruction::field_read(t, y, e.name), loc);
          emit(Instruction::copy(x, t), loc);
        } else {
          emit(Instruction::field_read(x, y, e.name), loc);
        }
        break;
      }
      case Expr::Kind::Call: {
        std::string y = atom(e.operands[0], loc);
        const Procedure * callee = prog_.find_procedure(e.name);
        Ann a = callee ? callee->return_ann : Ann::Missing;
        Ann b = callee ? callee->param_ann : Ann::Missing;
        emit(Instruction::call(x, e.name, a, y, b), loc);
        break;
      }
    }
  }

  const Program & prog_;
  ProgramCfg & cfg_;
  std::size_t owner_ = 0;
  std::vector<std::string> declared_;
  std::vector<std::string> temps_;
  std::vector<VertexId> pending_;
};

}  // namespace

ProgramCfg lower(const Program & p)
{
  ProgramCfg cfg;
  cfg.fields = p.fields;
  Lowerer lowerer(p, cfg);
  lowerer.main_block();
  for (const Procedure & proc : p.procedures) lowerer.procedure(proc);
  return cfg;
}

// ---------------------------------------------------------------------------
// Graph utilities and validation
// ---------------------------------------------------------------------------

std::vector<bool> descend(const ProgramCfg & cfg, VertexId v)
{
  std::vector<bool> seen(cfg.vertices.size(), false);
  std::vector<VertexId> stack = {v};
  seen[v] = true;
  while (!stack.empty()) {
    VertexId u = stack.back();
    stack.pop_back();
    for (VertexId s : cfg.vertex(u).succ) {
      if (!seen[s]) {
        seen[s] = true;
        stack.push_back(s);
      }
    }
  }
  return seen;
}

std::vector<VertexId> reverse_postorder(const ProgramCfg & cfg, VertexId entry)
{
  std::vector<VertexId> post;
  std::vector<bool> seen(cfg.vertices.size(), false);
  // Iterative DFS: (vertex, next successor index).
  std::vector<std::pair<VertexId, std::size_t>> stack = {{entry, 0}};
  seen[entry] = true;
  while (!stack.empty()) {
    auto & [u, next] = stack.back();
    const auto & succ = cfg.vertex(u).succ;
    if (next < succ.size()) {
      VertexId s = succ[next++];
      if (!seen[s]) {
        seen[s] = true;
        stack.emplace_back(s, 0);
      }
    } else {
      post.push_back(u);
      stack.pop_back();
    }
  }
  std::reverse(post.begin(), post.end());
  return post;
}

std::vector<CfgDiagnostic> validate(const ProgramCfg & cfg)
{
  std::vector<CfgDiagnostic> out;
  const auto n = cfg.vertices.size();
  auto diag = [&](std::string rule, VertexId v, std::string msg) {
    out.push_back({std::move(rule), v, std::move(msg)});
  };

  // Rule 1: unique entry point.
  std::vector<VertexId> mains;
  std::vector<VertexId> entries;
  for (const Vertex & v : cfg.vertices) {
    if (v.inst.kind == InstKind::Main) mains.push_back(v.id);
  }
  if (mains.size() != 1) {
    diag("1", mains.empty() ? 0 : mains[1], "expected exactly one main vertex, found " +
                                                std::to_string(mains.size()));
  }
  for (VertexId m : mains) {
    if (!cfg.vertex(m).pred.empty()) diag("1", m, "main vertex has predecessors");
  }
  entries = mains;

  // Procedure entries, keyed by name.
  std::map<std::string, VertexId> proc_entry;
  for (const Vertex & v : cfg.vertices) {
    if (v.inst.kind != InstKind::Proc) continue;
    if (!proc_entry.emplace(v.inst.proc, v.id).second) {
      diag("2", v.id, "procedure '" + v.inst.proc + "' has more than one entry vertex");
    }
    entries.push_back(v.id);
  }

  // Rule 2: descend sets of the entries partition the vertices.
  std::vector<int> cover(n, 0);
  std::vector<VertexId> region(n, 0);
  for (VertexId e : entries) {
    auto d = descend(cfg, e);
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i]) {
        ++cover[i];
        region[i] = e;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cover[i] == 0) diag("2", VertexId(i), "vertex is not reachable from any entry");
    if (cover[i] > 1) diag("2", VertexId(i), "vertex belongs to more than one procedure");
  }

  // Rule 3: every vertex reaches a return, with the enclosing annotation.
  std::vector<bool> reaches_return(n, false);
  std::deque<VertexId> work;
  for (const Vertex & v : cfg.vertices) {
    if (v.inst.kind == InstKind::Return) {
      reaches_return[v.id] = true;
      work.push_back(v.id);
    }
  }
  while (!work.empty()) {
    VertexId u = work.front();
    work.pop_front();
    for (VertexId p : cfg.vertex(u).pred) {
      if (!reaches_return[p]) {
        reaches_return[p] = true;
        work.push_back(p);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!reaches_return[i]) diag("3", VertexId(i), "no path to a return");
    const Vertex & v = cfg.vertices[i];
    if (v.inst.kind == InstKind::Return && cover[i] == 1) {
      const Instruction & entry = cfg.vertex(region[i]).inst;
      Ann expected = entry.kind == InstKind::Proc ? entry.ret_ann : cfg.main().ret_ann;
      if (v.inst.ret_ann != expected) {
        diag("3", v.id, "return annotation " + std::string(to_string(v.inst.ret_ann)) +
                          " differs from the enclosing signature's " +
                          std::string(to_string(expected)));
      }
    }
  }

  // Rule 4: call sites agree with the callee signature.
  for (const Vertex & v : cfg.vertices) {
    if (v.inst.kind != InstKind::Call) continue;
    auto it = proc_entry.find(v.inst.proc);
    if (it == proc_entry.end()) {
      diag("4", v.id, "call to unknown procedure '" + v.inst.proc + "'");
      continue;
    }
    const Instruction & sig = cfg.vertex(it->second).inst;
    if (sig.ret_ann != v.inst.ret_ann || sig.param_ann != v.inst.param_ann) {
      diag("4", v.id, "call annotations do not match the signature of '" + v.inst.proc + "'");
    }
  }

  // Rule 5: successor shape.
  auto is_arm = [&](VertexId s) {
    auto k = cfg.vertex(s).inst.kind;
    return k == InstKind::If || k == InstKind::Else;
  };
  for (const Vertex & v : cfg.vertices) {
    if (v.inst.kind == InstKind::Branch) {
      bool ok = v.succ.size() == 2;
      if (ok) {
        const Instruction & a = cfg.vertex(v.succ[0]).inst;
        const Instruction & b = cfg.vertex(v.succ[1]).inst;
        bool has_if = (a.kind == InstKind::If && a.target == v.inst.target) ||
                      (b.kind == InstKind::If && b.target == v.inst.target);
        bool has_else = (a.kind == InstKind::Else && a.target == v.inst.target) ||
                        (b.kind == InstKind::Else && b.target == v.inst.target);
        ok = has_if && has_else;
      }
      if (!ok) diag("5a", v.id, "branch must have exactly one if and one else successor");
    } else if (v.inst.kind == InstKind::Return) {
      if (!v.succ.empty()) diag("5b", v.id, "return has successors");
    } else if (v.succ.size() != 1 || is_arm(v.succ[0])) {
      diag("5c", v.id, "vertex must have exactly one successor that is not an if/else vertex");
    }
  }
  return out;
}

namespace {

std::string dot_escape(const std::string & s)
{
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string emit_dot(const ProgramCfg & cfg)
{
  std::ostringstream os;
  os << "digraph cfg {\n";
  os << "  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t p = 0; p < cfg.procedures.size(); ++p) {
    const ProcedureGraph & g = cfg.procedures[p];
    os << "  subgraph cluster_" << p << " {\n";
    os << "    label=\"" << dot_escape(g.name) << "\";\n";
    for (VertexId id : g.vertices) {
      os << "    v" << id << " [label=\"" << dot_escape(render(cfg.vertex(id).inst)) << "\"];\n";
    }
    os << "  }\n";
  }
  for (const Vertex & v : cfg.vertices) {
    for (VertexId s : v.succ) os << "  v" << v.id << " -> v" << s << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace graduator
