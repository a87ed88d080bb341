#include "graduator/testkit.hpp"

#include "graduator/cfg.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

namespace graduator::testkit {

namespace {

constexpr std::uint64_t kAnnotationStream = 0x5bd1e995a3c2f0e1ULL;

class SourceGen
{
public:
  explicit SourceGen(const GenConfig & cfg)
    : cfg_(cfg), shape_(cfg.seed), ann_(cfg.seed ^ kAnnotationStream)
  {
  }

  std::string generate()
  {
    int nfields = range(1, 3);
    for (int k = 0; k < nfields; ++k) fields_.push_back("f" + std::to_string(k));
    nprocs_ = range(0, std::max(0, cfg_.max_procs));
    for (const std::string & f : fields_) out_ << "field " << f << ";\n";
    // Procedures are emitted last-to-first so the text reads callee-first,
    // but each one may only call higher-numbered procedures.
    std::vector<std::string> procs(nprocs_);
    for (int i = nprocs_ - 1; i >= 0; --i) procs[i] = procedure(i);
    for (const std::string & text : procs) out_ << text;
    out_ << main_block();
    return out_.str();
  }

private:
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(shape_); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(shape_) < p; }
  const std::string & pick(const std::vector<std::string> & xs) { return xs[range(0, int(xs.size()) - 1)]; }

  std::string annotation()
  {
    // Always draw both numbers so the stream stays aligned across densities.
    double u = std::uniform_real_distribution<double>(0, 1)(ann_);
    bool nonnull = std::uniform_int_distribution<int>(0, 1)(ann_) == 1;
    if (u >= cfg_.density) return "";
    return nonnull ? "@NonNull" : "@Nullable";
  }

  std::string new_expr()
  {
    std::string s = "new{";
    for (std::size_t k = 0; k < fields_.size(); ++k) s += (k ? ", " : "") + fields_[k];
    return s + "}";
  }

  std::string callee()
  {
    int lo = current_ + 1;
    if (lo >= nprocs_) return {};
    return "p" + std::to_string(range(lo, nprocs_ - 1));
  }

  void line(std::ostringstream & o, int indent, const std::string & s) { o << std::string(2 * indent, ' ') << s << "\n"; }

  void block(std::ostringstream & o, int indent, int depth)
  {
    int n = range(1, std::max(1, cfg_.max_stmts));
    for (int k = 0; k < n; ++k) statement(o, indent, depth);
  }

  void simple_assign(std::ostringstream & o, int indent)
  {
    const std::string & v = pick(vars_);
    switch (range(0, 2)) {
      case 0: line(o, indent, v + " := null;"); break;
      case 1: line(o, indent, v + " := " + pick(vars_) + ";"); break;
      default: line(o, indent, v + " := " + new_expr() + ";"); break;
    }
  }

  void statement(std::ostringstream & o, int indent, int depth)
  {
    const GenWeights & w = cfg_.weights;
    bool nested = depth < cfg_.max_depth;
    std::discrete_distribution<int> kind({w.assign, w.logic, w.call, w.guarded_read, w.guarded_write,
                                          w.call_read, nested ? w.branch : 0.0, nested ? w.loop : 0.0});
    const std::string & v = pick(vars_);
    const std::string & x = pick(vars_);
    const std::string & y = pick(vars_);
    const std::string & f = pick(fields_);
    switch (kind(shape_)) {
      case 0: simple_assign(o, indent); break;
      case 1: {
        const char * op = chance(0.5) ? " && " : " || ";
        if (chance(0.25)) {
          line(o, indent, v + " := (" + x + op + y + ")" + (chance(0.5) ? " && " : " || ") + pick(vars_) + ";");
        } else {
          line(o, indent, v + " := " + x + op + y + ";");
        }
        break;
      }
      case 2: {
        std::string m = callee();
        if (m.empty()) {
          simple_assign(o, indent);
        } else {
          line(o, indent, v + " := " + m + "(" + (chance(0.15) ? std::string("null") : x) + ");");
        }
        break;
      }
      case 3:
        if (chance(0.7)) {
          line(o, indent, "if (" + x + " != null) {");
          line(o, indent + 1, v + " := " + x + "." + f + ";");
          line(o, indent, "} else {");
          line(o, indent + 1, v + " := " + (chance(0.5) ? std::string("null") : new_expr()) + ";");
        } else {
          line(o, indent, "if (" + x + " == null) {");
          line(o, indent + 1, "skip;");
          line(o, indent, "} else {");
          line(o, indent + 1, v + " := " + x + "." + f + ";");
        }
        line(o, indent, "}");
        break;
      case 4:
        if (chance(0.3)) {
          line(o, indent, x + " := " + new_expr() + ";");
          line(o, indent, x + "." + f + " := " + y + ";");
        } else {
          line(o, indent, "if (" + x + " != null) {");
          line(o, indent + 1, x + "." + f + " := " + y + ";");
          line(o, indent, "} else {");
          line(o, indent + 1, "skip;");
          line(o, indent, "}");
        }
        break;
      case 5: {
        std::string m = callee();
        if (m.empty()) {
          line(o, indent, v + " := " + new_expr() + ";");
        } else {
          line(o, indent, v + " := " + m + "(" + x + ");");
        }
        if (chance(0.5)) {
          line(o, indent, y + " := " + v + "." + f + ";");
        } else {
          line(o, indent, v + "." + f + " := " + y + ";");
        }
        break;
      }
      case 6: {
        std::string cond;
        switch (range(0, 3)) {
          case 0: cond = x + " != null"; break;
          case 1: cond = x + " == null"; break;
          case 2: cond = x + " && " + y + " != null"; break;
          default: cond = x + " || " + y + " == null"; break;
        }
        line(o, indent, "if (" + cond + ") {");
        block(o, indent + 1, depth + 1);
        line(o, indent, "} else {");
        block(o, indent + 1, depth + 1);
        line(o, indent, "}");
        break;
      }
      default: {
        std::string m = callee();
        int shape = range(0, 2);
        if (shape == 0 && !m.empty()) {
          line(o, indent, "while (" + v + " == null) {");
          line(o, indent + 1, v + " := " + m + "(" + (chance(0.5) ? v : x) + ");");
          line(o, indent, "}");
        } else if (shape == 1) {
          line(o, indent, "while (" + v + " != null) {");
          line(o, indent + 1, v + " := " + v + "." + f + ";");
          line(o, indent, "}");
        } else {
          line(o, indent, "while (" + v + " == null) {");
          if (nested && chance(0.5)) block(o, indent + 1, depth + 1);
          line(o, indent + 1, v + " := " + new_expr() + ";");
          line(o, indent, "}");
        }
        break;
      }
    }
  }

  void locals(std::ostringstream & o, bool in_proc)
  {
    int n = range(2, 4);
    for (int k = 0; k < n; ++k) {
      std::string v = "v" + std::to_string(k);
      line(o, 1, "var " + v + ";");
      vars_.push_back(v);
    }
    for (int k = 0; k < n; ++k) {
      const std::string & v = vars_[vars_.size() - n + k];
      int init = range(0, in_proc ? 2 : 1);
      if (init == 2) {
        line(o, 1, v + " := a;");
      } else {
        line(o, 1, v + " := " + (init == 0 ? std::string("null") : new_expr()) + ";");
      }
    }
  }

  std::string procedure(int i)
  {
    current_ = i;
    vars_ = {"a"};
    std::ostringstream o;
    std::string ret = annotation();
    std::string param = annotation();
    o << "proc p" << i << ret << "(a" << param << ") {\n";
    locals(o, true);
    block(o, 1, 0);
    line(o, 1, "return " + pick(vars_) + ";");
    o << "}\n";
    return o.str();
  }

  std::string main_block()
  {
    current_ = -1;
    vars_.clear();
    std::ostringstream o;
    o << "main {\n";
    locals(o, false);
    block(o, 1, 0);
    line(o, 1, "return v0;");
    o << "}\n";
    return o.str();
  }

  const GenConfig & cfg_;
  std::mt19937_64 shape_;
  std::mt19937_64 ann_;
  std::vector<std::string> fields_;
  std::vector<std::string> vars_;
  int nprocs_ = 0;
  int current_ = -1;
  std::ostringstream out_;
};

bool well_formed(const Program & p, ProgramCfg & cfg)
{
  if (!check_surface(p).empty()) return false;
  cfg = lower(p);
  return validate(cfg).empty();
}

/// Relaxes NonNull annotations blamed by the given warnings. False when some
/// warning cannot be repaired that way.
bool relax(Program & p, const ProgramCfg & cfg, const std::vector<Warning> & warnings)
{
  for (const Warning & w : warnings) {
    const Instruction & i = cfg.vertex(w.vertex).inst;
    Procedure * target = nullptr;
    Ann * site = nullptr;
    for (Procedure & proc : p.procedures) {
      if (i.kind == InstKind::Call && proc.name == i.proc) {
        target = &proc;
        site = &proc.param_ann;
      } else if (i.kind == InstKind::Return && proc.name == w.proc) {
        target = &proc;
        site = &proc.return_ann;
      }
    }
    if (target == nullptr || *site != Ann::NonNull) return false;
    *site = Ann::Nullable;
  }
  return true;
}

}  // namespace

std::string gen_source(const GenConfig & cfg) { return SourceGen(cfg).generate(); }

Program gen_program(const GenConfig & cfg)
{
  std::string text = gen_source(cfg);
  ParseResult r = parse(text);
  if (!r.ok()) throw std::logic_error("generator produced unparsable program:\n" + text);
  return *r.program;
}

bool is_valid(const Program & p)
{
  ProgramCfg cfg;
  if (!well_formed(p, cfg)) return false;
  return static_warnings(analyze(cfg, Mode::Gradual), cfg).empty();
}

Program gen_valid_program(const GenConfig & cfg)
{
  for (std::uint64_t k = 0;; ++k) {
    GenConfig c = cfg;
    c.seed = cfg.seed + k * 0x9E3779B97F4A7C15ULL;
    Program p = gen_program(c);
    for (int attempt = 0; attempt < 6; ++attempt) {
      ProgramCfg g;
      if (!well_formed(p, g)) break;
      auto warnings = static_warnings(analyze(g, Mode::Gradual), g);
      if (warnings.empty()) return p;
      if (!relax(p, g, warnings)) break;
    }
  }
}

}  // namespace graduator::testkit
