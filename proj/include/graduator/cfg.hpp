// graduator/cfg.hpp - per-procedure control-flow graphs over atomic instructions
#pragma once

#include "graduator/ast.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace graduator {

using VertexId = std::uint32_t;

enum class InstKind : std::uint8_t {
  Copy,        // x := y
  AssignNull,  // x := null
  Call,        // x := m@a(y@b)
  New,         // x := new{f...}
  And,         // x := y && z
  Or,          // x := y || z
  FieldRead,   // x := y.f
  FieldWrite,  // x.f := y
  Branch,      // branch(x)
  If,          // if(x)
  Else,        // else(x)
  Return,      // return y@a
  Main,        // main
  Proc,        // m@a proc(y@b)
};

inline constexpr int kInstKindCount = 14;

struct Instruction
{
  InstKind kind = InstKind::Main;
  /// Written variable; the receiver for FieldWrite; the tested variable for
  /// Branch/If/Else; the returned variable for Return; the parameter for Proc.
  std::string target;
  /// First read operand: copy source, call argument, field-read receiver,
  /// field-write stored value, left operand of And/Or.
  std::string operand;
  /// Right operand of And/Or.
  std::string operand2;
  /// Callee for Call, own name for Proc.
  std::string proc;
  std::string field;
  std::vector<std::string> fields;
  /// Return annotation (Call/Return/Proc).
  Ann ret_ann = Ann::Missing;
  /// Parameter annotation (Call/Proc).
  Ann param_ann = Ann::Missing;

  static Instruction copy(std::string x, std::string y);
  static Instruction assign_null(std::string x);
  static Instruction call(std::string x, std::string m, Ann a, std::string y, Ann b);
  static Instruction make_new(std::string x, std::vector<std::string> fields);
  static Instruction logical_and(std::string x, std::string y, std::string z);
  static Instruction logical_or(std::string x, std::string y, std::string z);
  static Instruction field_read(std::string x, std::string y, std::string f);
  static Instruction field_write(std::string x, std::string f, std::string y);
  static Instruction branch(std::string x);
  static Instruction if_arm(std::string x);
  static Instruction else_arm(std::string x);
  static Instruction ret(std::string y, Ann a);
  static Instruction main_entry();
  static Instruction proc_entry(std::string m, Ann a, std::string y, Ann b);

  bool operator==(const Instruction &) const = default;
};

std::string render(const Instruction & i);
std::string_view kind_name(InstKind k) noexcept;

struct Vertex
{
  VertexId id = 0;
  Instruction inst;
  std::vector<VertexId> succ;
  std::vector<VertexId> pred;
  /// Index into ProgramCfg::procedures of the graph this vertex was built in.
  std::size_t owner = 0;
  SourceLoc loc;
};

struct ProcedureGraph
{
  /// "main" for the main block.
  std::string name;
  bool is_main = false;
  VertexId entry = 0;
  /// Vertices in creation order.
  std::vector<VertexId> vertices;
  /// Parameter, declared variables, then temporaries.
  std::vector<std::string> variables;
  Ann ret_ann = Ann::Nullable;
  Ann param_ann = Ann::Missing;
};

struct ProgramCfg
{
  std::vector<Vertex> vertices;
  /// Index 0 is main, followed by procedures in declaration order.
  std::vector<ProcedureGraph> procedures;
  std::vector<std::string> fields;

  const Vertex & vertex(VertexId id) const { return vertices.at(id); }
  const ProcedureGraph & owner_of(VertexId id) const { return procedures.at(vertices.at(id).owner); }
  const ProcedureGraph * find_procedure(std::string_view name) const;
  const ProcedureGraph & main() const { return procedures.front(); }

  /// Appends a vertex to procedure `owner`; returns its id.
  VertexId add_vertex(std::size_t owner, Instruction inst, SourceLoc loc = {});
  void add_edge(VertexId from, VertexId to);
};

/// Lowers a parsed program. Total on parsed programs; well-formedness of the
/// result is guaranteed when check_surface(p) is empty.
ProgramCfg lower(const Program & p);

struct CfgDiagnostic
{
  /// Rule tag: "1", "2", "3", "4", "5a", "5b" or "5c".
  std::string rule;
  VertexId vertex = 0;
  std::string message;
};

std::vector<CfgDiagnostic> validate(const ProgramCfg & cfg);

/// Reflexive-transitive closure of the successor relation from `v`.
std::vector<bool> descend(const ProgramCfg & cfg, VertexId v);

/// Reverse postorder of the vertices reachable from `entry`.
std::vector<VertexId> reverse_postorder(const ProgramCfg & cfg, VertexId entry);

std::string emit_dot(const ProgramCfg & cfg);

}  // namespace graduator
