#include "graduator/ast.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace graduator {

std::string_view to_string(Ann a) noexcept
{
  switch (a) {
    case Ann::Nullable: return "Nullable";
    case Ann::NonNull: return "NonNull";
    case Ann::Missing: return "?";
  }
  return "?";
}

std::string render(const Diagnostic & d, std::string_view file)
{
  std::ostringstream os;
  os << file << ':' << d.loc.line << ':' << d.loc.col << ": ";
  switch (d.severity) {
    case Severity::Error: os << "error"; break;
    case Severity::Warning: os << "warning"; break;
    case Severity::Note: os << "note"; break;
  }
  os << ": " << d.message;
  return os.str();
}

Expr Expr::null(SourceLoc loc)
{
  Expr e;
  e.kind = Kind::Null;
  e.loc = loc;
  return e;
}

Expr Expr::var(std::string name, SourceLoc loc)
{
  Expr e;
  e.kind = Kind::Var;
  e.name = std::move(name);
  e.loc = loc;
  return e;
}

Expr Expr::binary(Kind k, Expr lhs, Expr rhs, SourceLoc loc)
{
  Expr e;
  e.kind = k;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  e.loc = loc;
  return e;
}

Expr Expr::field(Expr receiver, std::string field, SourceLoc loc)
{
  Expr e;
  e.kind = Kind::Field;
  e.name = std::move(field);
  e.operands.push_back(std::move(receiver));
  e.loc = loc;
  return e;
}

Expr Expr::make_new(std::vector<std::string> fields, SourceLoc loc)
{
  Expr e;
  e.kind = Kind::New;
  e.fields = std::move(fields);
  e.loc = loc;
  return e;
}

Expr Expr::call(std::string callee, Expr arg, SourceLoc loc)
{
  Expr e;
  e.kind = Kind::Call;
  e.name = std::move(callee);
  e.operands.push_back(std::move(arg));
  e.loc = loc;
  return e;
}

const Procedure * Program::find_procedure(std::string_view name) const
{
  for (const Procedure & p : procedures) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Pretty printing
// ---------------------------------------------------------------------------

namespace {

bool is_binary(const Expr & e) { return e.kind == Expr::Kind::And || e.kind == Expr::Kind::Or; }

void print_expr(std::ostream & os, const Expr & e)
{
  switch (e.kind) {
    case Expr::Kind::Null: os << "null"; break;
    case Expr::Kind::Var: os << e.name; break;
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      const Expr & lhs = e.operands[0];
      const Expr & rhs = e.operands[1];
      bool wrap_lhs = is_binary(lhs) && lhs.kind != e.kind;
      if (wrap_lhs) os << '(';
      print_expr(os, lhs);
      if (wrap_lhs) os << ')';
      os << (e.kind == Expr::Kind::And ? " && " : " || ");
      if (is_binary(rhs)) os << '(';
      print_expr(os, rhs);
      if (is_binary(rhs)) os << ')';
      break;
    }
    case Expr::Kind::Field:
      if (is_binary(e.operands[0])) os << '(';
      print_expr(os, e.operands[0]);
      if (is_binary(e.operands[0])) os << ')';
      os << '.' << e.name;
      break;
    case Expr::Kind::New:
      os << "new {";
      for (std::size_t i = 0; i < e.fields.size(); ++i) os << (i ? ", " : "") << e.fields[i];
      os << '}';
      break;
    case Expr::Kind::Call:
      os << e.name << '(';
      print_expr(os, e.operands[0]);
      os << ')';
      break;
  }
}

void print_block(std::ostream & os, const Block & b, int indent);

void print_stmt(std::ostream & os, const Stmt & s, int indent)
{
  std::string pad(std::size_t(indent) * 2, ' ');
  os << pad;
  switch (s.kind) {
    case Stmt::Kind::Skip: os << "skip;\n"; break;
    case Stmt::Kind::Decl: os << "var " << s.target << ";\n"; break;
    case Stmt::Kind::Assign:
      os << s.target << " := ";
      print_expr(os, s.value);
      os << ";\n";
      break;
    case Stmt::Kind::FieldAssign: os << s.target << '.' << s.field << " := " << s.source << ";\n"; break;
    case Stmt::Kind::If:
      os << "if (";
      print_expr(os, s.cond.expr);
      os << (s.cond.is_null ? " == null) " : " != null) ");
      print_block(os, s.then_block, indent);
      os << " else ";
      print_block(os, s.else_block, indent);
      os << '\n';
      break;
    case Stmt::Kind::While:
      os << "while (";
      print_expr(os, s.cond.expr);
      os << (s.cond.is_null ? " == null) " : " != null) ");
      print_block(os, s.then_block, indent);
      os << '\n';
      break;
    case Stmt::Kind::Return: os << "return " << s.target << ";\n"; break;
  }
}

void print_block(std::ostream & os, const Block & b, int indent)
{
  os << "{\n";
  for (const Stmt & s : b) print_stmt(os, s, indent + 1);
  os << std::string(std::size_t(indent) * 2, ' ') << '}';
}

void print_ann(std::ostream & os, Ann a)
{
  if (a != Ann::Missing) os << '@' << to_string(a);
}

}  // namespace

std::string pretty_print(const Program & p)
{
  std::ostringstream os;
  for (const std::string & f : p.fields) os << "field " << f << ";\n";
  if (!p.fields.empty()) os << '\n';
  for (const Procedure & proc : p.procedures) {
    os << "proc " << proc.name;
    print_ann(os, proc.return_ann);
    os << '(' << proc.param;
    print_ann(os, proc.param_ann);
    os << ") ";
    print_block(os, proc.body, 0);
    os << "\n\n";
  }
  os << "main ";
  print_block(os, p.main, 0);
  os << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Surface checks
// ---------------------------------------------------------------------------

namespace {

class SurfaceChecker
{
public:
  SurfaceChecker(const Program & p, std::vector<Diagnostic> & diags) : prog_(p), diags_(diags)
  {
    for (const std::string & f : p.fields) fields_.insert(f);
  }

  void procedure(const Procedure & proc)
  {
    all_declared_ = {proc.param};
    scopes_ = {{proc.param}};
    std::set<std::string> init = {proc.param};
    if (!block(proc.body, init)) {
      error(proc.loc, "procedure '" + proc.name + "' may finish without returning");
    }
  }

  void main_block(const Block & b)
  {
    all_declared_.clear();
    scopes_ = {{}};
    std::set<std::string> init;
    block(b, init);
  }

private:
  /// Returns true when every path through the block returns.
  bool block(const Block & b, std::set<std::string> & init)
  {
    scopes_.emplace_back();
    bool returned = false;
    for (const Stmt & s : b) {
      if (returned) {
        error(s.loc, "unreachable statement after return");
        break;
      }
      returned = stmt(s, init);
    }
    scopes_.pop_back();
    return returned;
  }

  bool stmt(const Stmt & s, std::set<std::string> & init)
  {
    switch (s.kind) {
      case Stmt::Kind::Skip: return false;
      case Stmt::Kind::Decl:
        if (!all_declared_.insert(s.target).second) {
          error(s.loc, "variable '" + s.target + "' is declared more than once");
        }
        scopes_.back().insert(s.target);
        return false;
      case Stmt::Kind::Assign:
        expr(s.value, init);
        if (require_declared(s.target, s.loc)) init.insert(s.target);
        return false;
      case Stmt::Kind::FieldAssign:
        read(s.target, s.loc, init);
        read(s.source, s.loc, init);
        require_field(s.field, s.loc);
        return false;
      case Stmt::Kind::If: {
        expr(s.cond.expr, init);
        std::set<std::string> then_init = init;
        std::set<std::string> else_init = init;
        bool then_ret = block(s.then_block, then_init);
        bool else_ret = block(s.else_block, else_init);
        if (then_ret && else_ret) return true;
        if (then_ret) {
          init = std::move(else_init);
        } else if (else_ret) {
          init = std::move(then_init);
        } else {
          std::set<std::string> both;
          std::set_intersection(then_init.begin(), then_init.end(), else_init.begin(),
                                else_init.end(), std::inserter(both, both.end()));
          init = std::move(both);
        }
        return false;
      }
      case Stmt::Kind::While: {
        expr(s.cond.expr, init);
        std::set<std::string> body_init = init;
        block(s.then_block, body_init);
        return false;
      }
      case Stmt::Kind::Return: read(s.target, s.loc, init); return true;
    }
    return false;
  }

  void expr(const Expr & e, const std::set<std::string> & init)
  {
    switch (e.kind) {
      case Expr::Kind::Null: break;
      case Expr::Kind::Var: read(e.name, e.loc, init); break;
      case Expr::Kind::And:
      case Expr::Kind::Or:
        expr(e.operands[0], init);
        expr(e.operands[1], init);
        break;
      case Expr::Kind::Field:
        expr(e.operands[0], init);
        require_field(e.name, e.loc);
        break;
      case Expr::Kind::New: {
        std::set<std::string> seen;
        for (const std::string & f : e.fields) {
          require_field(f, e.loc);
          if (!seen.insert(f).second) error(e.loc, "field '" + f + "' listed twice in new");
        }
        break;
      }
      case Expr::Kind::Call:
        if (prog_.find_procedure(e.name) == nullptr) {
          error(e.loc, "call to unknown procedure '" + e.name + "'");
        }
        expr(e.operands[0], init);
        break;
    }
  }

  bool in_scope(const std::string & name) const
  {
    return std::any_of(scopes_.begin(), scopes_.end(), [&](const auto & s) { return s.count(name) != 0; });
  }

  bool require_declared(const std::string & name, SourceLoc loc)
  {
    if (in_scope(name)) return true;
    error(loc, "undeclared variable '" + name + "'");
    return false;
  }

  void read(const std::string & name, SourceLoc loc, const std::set<std::string> & init)
  {
    if (!require_declared(name, loc)) return;
    if (init.count(name) == 0) error(loc, "use before initialization of '" + name + "'");
  }

  void require_field(const std::string & f, SourceLoc loc)
  {
    if (fields_.count(f) == 0) error(loc, "unknown field '" + f + "'");
  }

  void error(SourceLoc loc, std::string msg) { diags_.push_back({Severity::Error, loc, std::move(msg)}); }

  const Program & prog_;
  std::vector<Diagnostic> & diags_;
  std::set<std::string> fields_;
  std::set<std::string> all_declared_;
  std::vector<std::set<std::string>> scopes_;
};

template <typename F> void for_each_expr(const Block & b, F && f);

template <typename F> void for_each_subexpr(const Expr & e, F && f)
{
  f(e);
  for (const Expr & c : e.operands) for_each_subexpr(c, f);
}

template <typename F> void for_each_expr(const Block & b, F && f)
{
  for (const Stmt & s : b) {
    if (s.kind == Stmt::Kind::Assign) for_each_subexpr(s.value, f);
    if (s.kind == Stmt::Kind::If || s.kind == Stmt::Kind::While) for_each_subexpr(s.cond.expr, f);
    for_each_expr(s.then_block, f);
    for_each_expr(s.else_block, f);
  }
}

template <typename F> void for_each_stmt(const Block & b, F && f)
{
  for (const Stmt & s : b) {
    f(s);
    for_each_stmt(s.then_block, f);
    for_each_stmt(s.else_block, f);
  }
}

}  // namespace

std::vector<Diagnostic> check_surface(const Program & p)
{
  std::vector<Diagnostic> diags;
  SurfaceChecker checker(p, diags);
  for (const Procedure & proc : p.procedures) checker.procedure(proc);
  checker.main_block(p.main);
  return diags;
}

std::vector<Diagnostic> lint_fields(const Program & p)
{
  std::vector<std::set<std::string>> allocations;
  auto collect_new = [&](const Expr & e) {
    if (e.kind == Expr::Kind::New) allocations.emplace_back(e.fields.begin(), e.fields.end());
  };
  for (const Procedure & proc : p.procedures) for_each_expr(proc.body, collect_new);
  for_each_expr(p.main, collect_new);

  std::vector<Diagnostic> out;
  auto check_access = [&](const std::string & field, SourceLoc loc) {
    for (const auto & alloc : allocations) {
      if (alloc.count(field) == 0) {
        out.push_back({Severity::Warning, loc,
                       "field '" + field + "' is accessed but some allocation does not list it"});
        return;
      }
    }
  };
  auto visit = [&](const Block & b) {
    for_each_expr(b, [&](const Expr & e) {
      if (e.kind == Expr::Kind::Field) check_access(e.name, e.loc);
    });
    for_each_stmt(b, [&](const Stmt & s) {
      if (s.kind == Stmt::Kind::FieldAssign) check_access(s.field, s.loc);
    });
  };
  for (const Procedure & proc : p.procedures) visit(proc.body);
  visit(p.main);
  return out;
}

// ---------------------------------------------------------------------------
// Structural comparison and annotation utilities
// ---------------------------------------------------------------------------

namespace {

bool expr_equal(const Expr & a, const Expr & b)
{
  if (a.kind != b.kind || a.name != b.name || a.fields != b.fields) return false;
  if (a.operands.size() != b.operands.size()) return false;
  for (std::size_t i = 0; i < a.operands.size(); ++i) {
    if (!expr_equal(a.operands[i], b.operands[i])) return false;
  }
  return true;
}

bool block_equal(const Block & a, const Block & b);

bool stmt_equal(const Stmt & a, const Stmt & b)
{
  return a.kind == b.kind && a.target == b.target && a.field == b.field && a.source == b.source &&
         expr_equal(a.value, b.value) && a.cond.is_null == b.cond.is_null &&
         expr_equal(a.cond.expr, b.cond.expr) && block_equal(a.then_block, b.then_block) &&
         block_equal(a.else_block, b.else_block);
}

bool block_equal(const Block & a, const Block & b)
{
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!stmt_equal(a[i], b[i])) return false;
  }
  return true;
}

bool ann_at_least_as_precise(Ann a1, Ann a2) { return a2 == Ann::Missing || a1 == a2; }

}  // namespace

bool structurally_equal(const Program & a, const Program & b, bool compare_annotations)
{
  if (a.fields != b.fields || a.procedures.size() != b.procedures.size()) return false;
  for (std::size_t i = 0; i < a.procedures.size(); ++i) {
    const Procedure & pa = a.procedures[i];
    const Procedure & pb = b.procedures[i];
    if (pa.name != pb.name || pa.param != pb.param || !block_equal(pa.body, pb.body)) return false;
    if (compare_annotations && (pa.return_ann != pb.return_ann || pa.param_ann != pb.param_ann)) {
      return false;
    }
  }
  return block_equal(a.main, b.main);
}

std::vector<std::string> annotation_sites(const Program & p)
{
  std::vector<std::string> out;
  for (const Procedure & proc : p.procedures) {
    out.push_back(proc.name + ".param");
    out.push_back(proc.name + ".return");
  }
  return out;
}

Program erase_annotations(const Program & p, const std::set<std::string> & selection)
{
  Program out = p;
  std::set<std::string> remaining = selection;
  for (Procedure & proc : out.procedures) {
    if (remaining.erase(proc.name + ".param") != 0) proc.param_ann = Ann::Missing;
    if (remaining.erase(proc.name + ".return") != 0) proc.return_ann = Ann::Missing;
  }
  if (!remaining.empty()) {
    throw std::invalid_argument("unknown annotation site '" + *remaining.begin() + "'");
  }
  return out;
}

Program fill_missing_annotations(const Program & p, Ann fill)
{
  Program out = p;
  for (Procedure & proc : out.procedures) {
    if (proc.param_ann == Ann::Missing) proc.param_ann = fill;
    if (proc.return_ann == Ann::Missing) proc.return_ann = fill;
  }
  return out;
}

bool fully_annotated(const Program & p)
{
  return std::all_of(p.procedures.begin(), p.procedures.end(), [](const Procedure & proc) {
    return proc.param_ann != Ann::Missing && proc.return_ann != Ann::Missing;
  });
}

bool precision_leq_prog(const Program & p1, const Program & p2)
{
  if (!structurally_equal(p1, p2, false)) return false;
  for (std::size_t i = 0; i < p1.procedures.size(); ++i) {
    const Procedure & a = p1.procedures[i];
    const Procedure & b = p2.procedures[i];
    if (!ann_at_least_as_precise(a.param_ann, b.param_ann)) return false;
    if (!ann_at_least_as_precise(a.return_ann, b.return_ann)) return false;
  }
  return true;
}

}  // namespace graduator
