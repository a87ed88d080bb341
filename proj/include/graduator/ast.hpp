// graduator/ast.hpp - PICL syntax tree, parser, surface checks
#pragma once

#include "graduator/lattice.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace graduator {

/// Procedure annotation; Missing is written `?` (or omitted).
enum class Ann : std::uint8_t { Nullable, NonNull, Missing };

std::string_view to_string(Ann a) noexcept;
constexpr GradAbst to_grad(Ann a) noexcept
{
  switch (a) {
    case Ann::Nullable: return GradAbst::exact(Abst::Nullable);
    case Ann::NonNull: return GradAbst::exact(Abst::NonNull);
    case Ann::Missing: return GradAbst::unknown();
  }
  return GradAbst::unknown();
}

struct SourceLoc
{
  int line = 0;
  int col = 0;

  bool operator==(const SourceLoc &) const = default;
};

enum class Severity : std::uint8_t { Error, Warning, Note };

struct Diagnostic
{
  Severity severity = Severity::Error;
  SourceLoc loc;
  std::string message;
};

/// `file:line:col: severity: message`
std::string render(const Diagnostic & d, std::string_view file);

struct Expr
{
  enum class Kind : std::uint8_t { Null, Var, And, Or, Field, New, Call };

  Kind kind = Kind::Null;
  /// Variable name (Var), field name (Field) or callee (Call).
  std::string name;
  /// And/Or: two operands; Field: the receiver; Call: the argument.
  std::vector<Expr> operands;
  /// New: the listed fields.
  std::vector<std::string> fields;
  SourceLoc loc;

  static Expr null(SourceLoc loc = {});
  static Expr var(std::string name, SourceLoc loc = {});
  static Expr binary(Kind k, Expr lhs, Expr rhs, SourceLoc loc = {});
  static Expr field(Expr receiver, std::string field, SourceLoc loc = {});
  static Expr make_new(std::vector<std::string> fields, SourceLoc loc = {});
  static Expr call(std::string callee, Expr arg, SourceLoc loc = {});
};

/// `expr == null` when is_null, otherwise `expr != null`.
struct Cond
{
  Expr expr;
  bool is_null = false;
};

struct Stmt;
using Block = std::vector<Stmt>;

struct Stmt
{
  enum class Kind : std::uint8_t { Skip, Decl, Assign, FieldAssign, If, While, Return };

  Kind kind = Kind::Skip;
  /// Decl/Assign/FieldAssign: assigned variable (receiver for FieldAssign); Return: returned variable.
  std::string target;
  /// FieldAssign: field name.
  std::string field;
  /// FieldAssign: the stored variable.
  std::string source;
  /// Assign: right-hand side.
  Expr value;
  Cond cond;
  Block then_block;
  Block else_block;
  SourceLoc loc;
};

struct Procedure
{
  std::string name;
  Ann return_ann = Ann::Missing;
  std::string param;
  Ann param_ann = Ann::Missing;
  Block body;
  SourceLoc loc;
};

struct Program
{
  std::vector<std::string> fields;
  std::vector<Procedure> procedures;
  Block main;
  SourceLoc main_loc;

  const Procedure * find_procedure(std::string_view name) const;
};

struct ParseResult
{
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return program.has_value(); }
};

ParseResult parse(std::string_view source);

/// Canonical source text; parse(pretty_print(p)) is structurally equal to p.
std::string pretty_print(const Program & p);

/// Declaration/initialization/name-resolution rules. Empty iff well formed.
std::vector<Diagnostic> check_surface(const Program & p);

/// Warns on field accesses naming a field that some `new` omits.
std::vector<Diagnostic> lint_fields(const Program & p);

/// Equality ignoring source locations; optionally ignoring annotations too.
bool structurally_equal(const Program & a, const Program & b, bool compare_annotations = true);

/// Annotation sites as `proc.param` / `proc.return`, in declaration order.
std::vector<std::string> annotation_sites(const Program & p);

/// Replaces the selected sites with Missing. Throws std::invalid_argument on
/// an unknown site.
Program erase_annotations(const Program & p, const std::set<std::string> & selection);

/// Replaces every Missing annotation with `fill`.
Program fill_missing_annotations(const Program & p, Ann fill);

bool fully_annotated(const Program & p);

/// p1 is at least as precise as p2: same program up to annotations, and every
/// annotation of p2 is either Missing or equal to p1's.
bool precision_leq_prog(const Program & p1, const Program & p2);

}  // namespace graduator
