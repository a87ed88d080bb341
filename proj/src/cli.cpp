#include "graduator/cli.hpp"

#include "graduator/testkit.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace graduator {

using Json = nlohmann::ordered_json;

namespace {

Json finding_json(const Finding & f)
{
  Json j;
  j["category"] = std::string(to_string(f.category));
  j["vertex"] = f.vertex;
  j["proc"] = f.proc;
  j["line"] = f.loc.line;
  j["col"] = f.loc.col;
  j["variable"] = f.variable;
  j["required"] = std::string(to_string(f.required));
  j["found"] = to_string(f.found);
  return j;
}

std::string describe(const Finding & f)
{
  std::ostringstream o;
  o << to_string(f.category) << ": '" << f.variable << "' in " << f.proc << " requires " << to_string(f.required)
    << ", found " << to_string(f.found);
  return o.str();
}

}  // namespace

Report build_report(const ProgramCfg & cfg, Mode mode, std::string source)
{
  Report r;
  r.source = std::move(source);
  r.mode = mode;
  AnalysisResults pi = analyze(cfg, mode);
  r.warnings = static_warnings(pi, cfg);
  r.checks = check_sites(pi, cfg);

  Summary & s = r.summary;
  s.static_warnings = r.warnings.size();
  std::size_t deref_checks = 0;
  for (const CheckSite & c : r.checks) {
    if (c.category == Category::GradualCheck) ++s.checks;
    if (c.category == Category::GradualBoundary) ++s.boundaries;
    if (is_dereference(cfg.vertex(c.vertex).inst.kind)) ++deref_checks;
  }
  for (const Vertex & v : cfg.vertices) {
    if (is_dereference(v.inst.kind)) ++s.dereference_sites;
  }
  s.eliminated = s.dereference_sites - deref_checks;
  if (s.dereference_sites > 0) {
    s.eliminated_pct = int(std::lround(100.0 * double(s.eliminated) / double(s.dereference_sites)));
  }
  return r;
}

std::string report_json(const Report & r)
{
  Json j;
  j["schema"] = kSchemaVersion;
  j["tool"] = "graduator";
  j["version"] = std::string(kToolVersion);
  j["source"] = r.source;
  j["mode"] = std::string(to_string(r.mode));
  j["warnings"] = Json::array();
  for (const Warning & w : r.warnings) j["warnings"].push_back(finding_json(w));
  j["check_sites"] = Json::array();
  for (const CheckSite & c : r.checks) j["check_sites"].push_back(finding_json(c));
  const Summary & s = r.summary;
  Json sum;
  sum["static"] = s.static_warnings;
  sum["check"] = s.checks;
  sum["boundary"] = s.boundaries;
  sum["dereference_sites"] = s.dereference_sites;
  sum["eliminated"] = s.eliminated;
  sum["eliminated_pct"] = s.eliminated_pct ? Json(*s.eliminated_pct) : Json(nullptr);
  j["summary"] = sum;
  return j.dump(2) + "\n";
}

std::string report_text(const Report & r)
{
  std::ostringstream o;
  for (const Warning & w : r.warnings) o << render(Diagnostic{Severity::Warning, w.loc, describe(w)}, r.source) << "\n";
  for (const CheckSite & c : r.checks) o << render(Diagnostic{Severity::Note, c.loc, describe(c)}, r.source) << "\n";
  const Summary & s = r.summary;
  o << r.source << ": " << s.static_warnings << " static warning(s), " << s.checks << " check(s), " << s.boundaries
    << " boundary check(s); " << s.eliminated << "/" << s.dereference_sites << " dereference checks eliminated\n";
  return o.str();
}

std::string error_json(const ProgramCfg & cfg, const Error & e)
{
  const Vertex & v = cfg.vertex(e.vertex);
  Finding f;
  f.category = is_dereference(v.inst.kind) ? Category::GradualCheck : Category::GradualBoundary;
  f.vertex = e.vertex;
  f.proc = cfg.owner_of(e.vertex).name;
  f.loc = v.loc;
  f.variable = e.variable;
  f.required = e.required;
  f.found = lift(e.found == 0 ? Abst::Null : Abst::NonNull);
  Json j;
  j["schema"] = kSchemaVersion;
  Json site = finding_json(f);
  for (auto & [k, val] : site.items()) j[k] = val;
  j["value"] = e.found;
  return j.dump() + "\n";
}

Program erase_all_annotations(const Program & p)
{
  auto sites = annotation_sites(p);
  return erase_annotations(p, std::set<std::string>(sites.begin(), sites.end()));
}

std::vector<PolicyResult> compare_policies(const Program & p)
{
  std::vector<PolicyResult> out;
  auto measure = [&](std::string name, const Program & q) {
    ProgramCfg cfg = lower(q);
    AnalysisResults pi = analyze(cfg, Mode::Gradual);
    out.push_back(PolicyResult{std::move(name), static_warnings(pi, cfg).size(), check_sites(pi, cfg).size()});
  };
  measure("gradual", p);
  measure("nonnull-default", fill_missing_annotations(p, Ann::NonNull));
  measure("nullable-default", fill_missing_annotations(p, Ann::Nullable));
  return out;
}

namespace {

constexpr int kExitOk = 0;
constexpr int kExitWarnings = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitError = 3;
constexpr int kExitStuck = 4;
constexpr int kExitFuel = 5;

struct Loaded
{
  Program program;
  ProgramCfg cfg;
};

std::optional<std::string> read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

std::optional<Program> load_parsed(const std::string & path, std::ostream & err)
{
  auto text = read_file(path);
  if (!text) {
    err << path << ": error: cannot read file\n";
    return std::nullopt;
  }
  ParseResult r = parse(*text);
  for (const Diagnostic & d : r.diagnostics) err << render(d, path) << "\n";
  if (!r.ok()) return std::nullopt;
  return std::move(*r.program);
}

/// Parse, surface checks, lowering and CFG validation.
std::optional<Loaded> load(const std::string & path, std::ostream & err)
{
  auto p = load_parsed(path, err);
  if (!p) return std::nullopt;
  auto surface = check_surface(*p);
  for (const Diagnostic & d : surface) err << render(d, path) << "\n";
  if (!surface.empty()) return std::nullopt;
  for (const Diagnostic & d : lint_fields(*p)) err << render(d, path) << "\n";
  Loaded l{std::move(*p), {}};
  l.cfg = lower(l.program);
  auto problems = validate(l.cfg);
  for (const CfgDiagnostic & d : problems) {
    err << path << ": error: malformed control flow (rule " << d.rule << ") at vertex " << d.vertex << ": "
        << d.message << "\n";
  }
  if (!problems.empty()) return std::nullopt;
  return l;
}

std::uint64_t default_fuel()
{
  if (const char * env = std::getenv("GRADUATOR_MAX_STEPS")) {
    char * end = nullptr;
    unsigned long long n = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return n;
  }
  return kDefaultMaxSteps;
}

std::vector<std::string> collect_sources(const std::vector<std::string> & paths, std::ostream & err, bool & ok)
{
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  for (const std::string & p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<std::string> found;
      for (const auto & e : fs::recursive_directory_iterator(p, ec)) {
        if (e.is_regular_file() && e.path().extension() == ".picl") found.push_back(e.path().generic_string());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p, ec)) {
      out.push_back(p);
    } else {
      err << p << ": error: no such file or directory\n";
      ok = false;
    }
  }
  return out;
}

int cmd_check(const std::string & path, const std::string & mode, const std::string & format, std::ostream & out,
              std::ostream & err)
{
  auto l = load(path, err);
  if (!l) return kExitInvalid;
  Mode m = mode == "static" ? Mode::Static : Mode::Gradual;
  if (m == Mode::Static && !fully_annotated(l->program)) {
    err << path << ": error: static mode requires every parameter and return to be annotated\n";
    return kExitInvalid;
  }
  Report r = build_report(l->cfg, m, path);
  out << (format == "json" ? report_json(r) : report_text(r));
  return r.warnings.empty() ? kExitOk : kExitWarnings;
}

int cmd_run(const std::string & path, const std::string & mode, std::optional<std::uint64_t> max_steps, bool trace,
            std::ostream & out, std::ostream & err)
{
  auto l = load(path, err);
  if (!l) return kExitInvalid;
  RunMode m = mode == "plain" ? RunMode::Plain : RunMode::Gradual;
  RunResult r = run(l->cfg, m, max_steps.value_or(default_fuel()), trace);
  if (trace) {
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
      const TraceEntry & e = r.trace[k];
      out << k + 1 << ": " << e.proc << "/" << e.vertex << ": " << e.instruction << "\n";
    }
  }
  auto loc_of = [&](VertexId v) { return l->cfg.vertex(v).loc; };
  if (std::holds_alternative<Final>(r.outcome)) {
    out << "final after " << r.step_count << " steps\n";
    return kExitOk;
  }
  if (auto * e = std::get_if<Error>(&r.outcome)) {
    out << error_json(l->cfg, *e);
    err << render(Diagnostic{Severity::Error, loc_of(e->vertex),
                             "run-time check failed: '" + e->variable + "' must be " + std::string(to_string(e->required))},
                  path)
        << "\n";
    return kExitError;
  }
  if (auto * s = std::get_if<Stuck>(&r.outcome)) {
    std::string what = "stuck: " + std::string(to_string(s->reason));
    if (!s->variable.empty()) what += " on '" + s->variable + "'";
    err << render(Diagnostic{Severity::Error, loc_of(s->vertex), what}, path) << "\n";
    return kExitStuck;
  }
  err << path << ": error: step limit of " << r.step_count << " reached\n";
  return kExitFuel;
}

int cmd_cfg(const std::string & path, bool dot, std::ostream & out, std::ostream & err)
{
  auto p = load_parsed(path, err);
  if (!p) return kExitInvalid;
  ProgramCfg cfg = lower(*p);
  if (dot) {
    out << emit_dot(cfg);
    return kExitOk;
  }
  for (const ProcedureGraph & g : cfg.procedures) {
    out << g.name << ":\n";
    for (VertexId v : g.vertices) {
      out << "  " << v << ": " << render(cfg.vertex(v).inst);
      const auto & succ = cfg.vertex(v).succ;
      if (!succ.empty()) {
        out << " ->";
        for (VertexId s : succ) out << " " << s;
      }
      out << "\n";
    }
  }
  return kExitOk;
}

int cmd_stats(const std::vector<std::string> & paths, bool ignore_annotations, const std::string & format,
              std::ostream & out, std::ostream & err)
{
  bool ok = true;
  std::vector<std::string> files = collect_sources(paths, err, ok);
  struct Row
  {
    std::string file;
    Summary s;
  };
  std::vector<Row> rows;
  for (const std::string & f : files) {
    auto l = load(f, err);
    if (!l) {
      ok = false;
      continue;
    }
    if (ignore_annotations) l->cfg = lower(erase_all_annotations(l->program));
    rows.push_back(Row{f, build_report(l->cfg, Mode::Gradual, f).summary});
  }
  std::size_t sites = 0;
  std::size_t eliminated = 0;
  for (const Row & r : rows) {
    sites += r.s.dereference_sites;
    eliminated += r.s.eliminated;
  }
  std::optional<int> total_pct;
  if (sites > 0) total_pct = int(std::lround(100.0 * double(eliminated) / double(sites)));

  if (format == "json") {
    Json j;
    j["schema"] = kSchemaVersion;
    j["ignore_annotations"] = ignore_annotations;
    j["programs"] = Json::array();
    for (const Row & r : rows) {
      Json e;
      e["source"] = r.file;
      e["dereference_sites"] = r.s.dereference_sites;
      e["eliminated"] = r.s.eliminated;
      e["eliminated_pct"] = r.s.eliminated_pct ? Json(*r.s.eliminated_pct) : Json(nullptr);
      j["programs"].push_back(e);
    }
    j["total"] = {{"dereference_sites", sites},
                  {"eliminated", eliminated},
                  {"eliminated_pct", total_pct ? Json(*total_pct) : Json(nullptr)}};
    out << j.dump(2) << "\n";
  } else {
    std::size_t width = 7;
    for (const Row & r : rows) width = std::max(width, r.file.size());
    auto pct = [](std::optional<int> p) { return p ? std::to_string(*p) + "%" : std::string("n/a"); };
    out << std::left << std::setw(int(width)) << "program" << std::right << std::setw(8) << "sites" << std::setw(12)
        << "eliminated" << std::setw(9) << "percent" << "\n";
    for (const Row & r : rows) {
      out << std::left << std::setw(int(width)) << r.file << std::right << std::setw(8) << r.s.dereference_sites
          << std::setw(12) << r.s.eliminated << std::setw(9) << pct(r.s.eliminated_pct) << "\n";
    }
    out << std::left << std::setw(int(width)) << "total" << std::right << std::setw(8) << sites << std::setw(12)
        << eliminated << std::setw(9) << pct(total_pct) << "\n";
  }
  return ok ? kExitOk : kExitInvalid;
}

int cmd_compare(const std::string & path, std::ostream & out, std::ostream & err)
{
  auto l = load(path, err);
  if (!l) return kExitInvalid;
  out << std::left << std::setw(18) << "policy" << std::right << std::setw(10) << "warnings" << std::setw(8) << "checks"
      << "\n";
  for (const PolicyResult & r : compare_policies(l->program)) {
    out << std::left << std::setw(18) << r.policy << std::right << std::setw(10) << r.warnings << std::setw(8)
        << r.checks << "\n";
  }
  return kExitOk;
}

int cmd_selftest(std::uint64_t seed, std::uint64_t programs, std::ostream & out)
{
  using namespace testkit;
  std::vector<Verdict> verdicts;
  verdicts.push_back(oracle_lattice());
  LocalSoundnessOptions local;
  local.seed = seed;
  verdicts.push_back(oracle_local_soundness(local));
  for (Verdict & v : oracle_properties(programs, seed)) verdicts.push_back(std::move(v));

  Verdict coverage{"instruction coverage", true, 0, {}};
  auto seen = instruction_coverage(programs, seed);
  coverage.cases = seen.size();
  for (int k = 0; k < kInstKindCount; ++k) {
    if (!seen.contains(InstKind(k))) coverage.fail("never generated: " + std::string(kind_name(InstKind(k))));
  }
  verdicts.push_back(coverage);

  bool all = true;
  for (const Verdict & v : verdicts) {
    out << std::left << std::setw(24) << v.name << (v.pass ? "pass" : "FAIL") << std::right << std::setw(8) << v.cases
        << "\n";
    for (const std::string & f : v.failures) out << "    " << f << "\n";
    all = all && v.pass;
  }
  out << "seed " << seed << ", " << programs << " programs\n";
  return all ? kExitOk : kExitWarnings;
}

}  // namespace

int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Gradual null-pointer analysis for PICL programs", "graduator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string path;
  std::string mode;
  std::string format = "text";
  bool dot = false;
  bool trace = false;
  bool ignore = false;
  std::optional<std::uint64_t> max_steps;
  std::vector<std::string> paths;
  std::uint64_t seed = 1;
  std::uint64_t programs = 200;

  auto * check = app.add_subcommand("check", "Report static warnings and run-time check sites");
  check->add_option("file", path, "PICL source")->required();
  check->add_option("--mode", mode, "gradual or static")->check(CLI::IsMember({"gradual", "static"}))->default_str("gradual");
  check->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto * runc = app.add_subcommand("run", "Execute a program");
  runc->add_option("file", path, "PICL source")->required();
  runc->add_option("--mode", mode, "plain or gradual")->check(CLI::IsMember({"plain", "gradual"}));
  runc->add_option("--max-steps", max_steps, "step limit");
  runc->add_flag("--trace", trace, "print every step");

  auto * cfgc = app.add_subcommand("cfg", "Print the control-flow graph");
  cfgc->add_option("file", path, "PICL source")->required();
  cfgc->add_flag("--dot", dot, "Graphviz output");

  auto * stats = app.add_subcommand("stats", "Count eliminated dereference checks");
  stats->add_option("paths", paths, "files or directories")->required();
  stats->add_flag("--ignore-annotations", ignore, "treat every annotation as ?");
  stats->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto * compare = app.add_subcommand("compare", "Compare annotation-default policies");
  compare->add_option("file", path, "PICL source")->required();

  auto * selftest = app.add_subcommand("selftest", "Run the property oracles");
  selftest->add_option("--seed", seed, "random seed");
  selftest->add_option("--programs", programs, "generated programs per property");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError & e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (check->parsed()) return cmd_check(path, mode.empty() ? "gradual" : mode, format, out, err);
  if (runc->parsed()) return cmd_run(path, mode.empty() ? "gradual" : mode, max_steps, trace, out, err);
  if (cfgc->parsed()) return cmd_cfg(path, dot, out, err);
  if (stats->parsed()) return cmd_stats(paths, ignore, format, out, err);
  if (compare->parsed()) return cmd_compare(path, out, err);
  if (selftest->parsed()) return cmd_selftest(seed, programs, out);
  return kExitInvalid;
}

}  // namespace graduator
