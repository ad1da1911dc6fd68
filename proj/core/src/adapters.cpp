#include "deopt/adapters.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "deopt/subprocess.hpp"

namespace deopt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view RunOutcome::kind_name() const {
  switch (result.index()) {
    case 0: return "facts";
    case 1: return "semantic_error";
    case 2: return "crash";
    case 3: return "timeout";
    default: return "parse_failure";
  }
}

std::string RunOutcome::describe() const {
  std::string s(kind_name());
  if (const auto* e = std::get_if<SemanticErrorOutcome>(&result))
    s += "[" + (e->code.empty() ? std::string("unknown") : e->code) + "]: " + e->message;
  else if (const auto* c = std::get_if<CrashOutcome>(&result))
    s += ": exit " + std::to_string(c->exit_code) + " signal " + std::to_string(c->signal) +
         (c->detail.empty() ? "" : " " + c->detail);
  else if (const auto* t = std::get_if<TimeoutOutcome>(&result))
    s += " after " + std::to_string(t->limit_s) + "s";
  else if (const auto* p = std::get_if<ParseFailureOutcome>(&result))
    s += ": " + p->detail;
  return s;
}

const std::vector<std::string>& embedded_error_catalog() {
  static const std::vector<std::string> codes = {"div_zero", "mod_zero", "type_mismatch", "unstratifiable",
                                                 "resource_limit"};
  return codes;
}

// --------------------------------------------------------------- embedded --

EmbeddedAdapter::EmbeddedAdapter(OptConfig opt, bool strip, EvalLimits limits)
    : opt_(std::move(opt)), strip_(strip), limits_(limits) {}

RunOutcome EmbeddedAdapter::run(const Program& program, Role role) {
  RunOutcome out;
  OptConfig opt = opt_;
  const Program* prog = &program;
  Program stripped;
  if (strip_ && role == Role::Reference) {
    opt.enable_magic = opt.enable_inline = opt.enable_subsumption = false;
    stripped = program;
    for (auto& d : stripped.decls) d.annotations.clear();
    prog = &stripped;
  }
  last_stats_ = {};
  auto start = std::chrono::steady_clock::now();
  auto res = evaluate(*prog, FactStore{}, opt, limits_, &last_stats_);
  out.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!res.ok()) {
    const auto& err = res.error();
    auto code = err.code();
    const auto& cat = embedded_error_catalog();
    bool matched = std::find(cat.begin(), cat.end(), code) != cat.end();
    out.result = SemanticErrorOutcome{code, err.message, matched};
    out.stderr_text = "error[" + code + "]: " + err.message + "\n";
    return out;
  }
  FactStore facts;
  for (const auto& rel : program.outputs) facts.set(rel, res.facts().get(rel));
  out.result = std::move(facts);
  return out;
}

// ---------------------------------------------------------------- process --

namespace {

WorkdirPolicy parse_policy(const std::string& s) {
  if (s == "on_failure") return WorkdirPolicy::KeepOnFailure;
  if (s == "always") return WorkdirPolicy::KeepAlways;
  if (s == "never") return WorkdirPolicy::KeepNever;
  throw ConfigError("unknown keep_workdirs value '" + s + "'");
}

std::string_view policy_name(WorkdirPolicy p) {
  switch (p) {
    case WorkdirPolicy::KeepOnFailure: return "on_failure";
    case WorkdirPolicy::KeepAlways: return "always";
    case WorkdirPolicy::KeepNever: return "never";
  }
  return "?";
}

std::string substitute(std::string arg, const std::string& key, const std::string& value) {
  for (auto pos = arg.find(key); pos != std::string::npos; pos = arg.find(key, pos + value.size()))
    arg.replace(pos, key.size(), value);
  return arg;
}

void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw ConfigError("cannot write " + p.string());
}

std::optional<ErrorPattern> match_catalog(const std::vector<ErrorPattern>& catalog, const std::string& err,
                                          const std::string& out) {
  for (const auto& e : catalog) {
    std::regex re(e.pattern);
    if (std::regex_search(err, re) || std::regex_search(out, re)) return e;
  }
  return std::nullopt;
}

std::string first_line(const std::string& s) {
  auto nl = s.find('\n');
  return s.substr(0, nl);
}

}  // namespace

EngineSpec EngineSpec::from_json_text(const std::string& text) {
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("engine spec is not a JSON object");
  try {
    EngineSpec s;
    s.name = j.value("name", std::string());
    auto dialect = parse_dialect(j.value("dialect", std::string("souffle")));
    if (!dialect) throw ConfigError("unknown dialect " + j["dialect"].dump());
    s.dialect = *dialect;
    s.executable = j.at("executable").get<std::string>();
    if (s.name.empty()) s.name = fs::path(s.executable).filename().string();
    s.args = j.value("args", std::vector<std::string>{});
    s.optimization_args = j.value("optimization_args", std::vector<std::string>{});
    s.timeout_s = j.value("timeout_s", 30.0);
    if (j.contains("error_catalog"))
      for (const auto& e : j["error_catalog"]) {
        ErrorPattern p{e.at("code").get<std::string>(), e.at("pattern").get<std::string>()};
        try {
          std::regex check(p.pattern);
        } catch (const std::regex_error&) {
          throw ConfigError("bad catalog pattern '" + p.pattern + "'");
        }
        s.error_catalog.push_back(std::move(p));
      }
    s.workdir_root = j.value("workdir_root", std::string());
    s.keep = parse_policy(j.value("keep_workdirs", std::string("on_failure")));
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("engine spec: ") + e.what());
  }
}

EngineSpec EngineSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read engine spec " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string EngineSpec::to_json_text() const {
  json cat = json::array();
  for (const auto& e : error_catalog) cat.push_back({{"code", e.code}, {"pattern", e.pattern}});
  json j{{"name", name},
         {"dialect", std::string(dialect_name(dialect))},
         {"executable", executable},
         {"args", args},
         {"optimization_args", optimization_args},
         {"timeout_s", timeout_s},
         {"error_catalog", cat},
         {"workdir_root", workdir_root},
         {"keep_workdirs", std::string(policy_name(keep))}};
  return j.dump(2) + "\n";
}

RunOutcome invoke_engine(const EngineSpec& spec, const Program& program, const RenderedArtifacts& artifacts,
                         const std::string& workdir, bool optimization_args) {
  RunOutcome out;
  out.workdir = workdir;
  fs::path dir(workdir);
  fs::create_directories(dir / "out");
  fs::create_directories(dir / "facts");
  write_file(dir / "program.dl", artifacts.program_text);
  for (const auto& [rel_path, content] : artifacts.files) write_file(dir / rel_path, content);

  std::vector<std::string> argv = {spec.executable};
  auto expand = [&](const std::string& a) {
    auto s = substitute(a, "{program}", (dir / "program.dl").string());
    s = substitute(s, "{factdir}", (dir / "facts").string());
    return substitute(s, "{outdir}", (dir / "out").string());
  };
  if (optimization_args)
    for (const auto& a : spec.optimization_args) argv.push_back(expand(a));
  for (const auto& a : spec.args) argv.push_back(expand(a));

  auto proc = run_process(argv, workdir, spec.timeout_s);
  if (proc.spawn_failed) throw ConfigError("cannot start engine: " + proc.spawn_error);
  out.stdout_text = std::move(proc.out);
  out.stderr_text = std::move(proc.err);
  out.elapsed_s = proc.elapsed_s;

  if (proc.timed_out) {
    out.result = TimeoutOutcome{spec.timeout_s};
    return out;
  }
  auto matched = match_catalog(spec.error_catalog, out.stderr_text, out.stdout_text);
  if (matched && proc.term_signal == 0) {
    out.result = SemanticErrorOutcome{matched->code, first_line(out.stderr_text), true};
    return out;
  }
  if (proc.term_signal != 0) {
    out.result = CrashOutcome{-1, proc.term_signal, first_line(out.stderr_text)};
    return out;
  }
  if (proc.exit_code != 0) {
    if (!out.stderr_text.empty())
      out.result = SemanticErrorOutcome{{}, first_line(out.stderr_text), false};
    else
      out.result = CrashOutcome{proc.exit_code, 0, {}};
    return out;
  }
  std::string err;
  auto facts = parse_engine_output(spec.dialect, program, artifacts.outputs, (dir / "out").string(),
                                   out.stdout_text, &err);
  if (!facts) {
    out.result = ParseFailureOutcome{err};
    return out;
  }
  out.result = std::move(*facts);
  return out;
}

ProcessAdapter::ProcessAdapter(EngineSpec spec, bool strip) : spec_(std::move(spec)), strip_(strip) {}

std::string ProcessAdapter::fresh_workdir() {
  fs::path root = spec_.workdir_root.empty() ? fs::temp_directory_path() / "deopt" : fs::path(spec_.workdir_root);
  std::ostringstream name;
  name << spec_.name << "-" << getpid() << "-" << reinterpret_cast<std::uintptr_t>(this) << "-" << counter_++;
  auto dir = root / name.str();
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

RunOutcome ProcessAdapter::run(const Program& program, Role role) {
  if (auto why = check_feature_set(program, spec_.dialect)) {
    RunOutcome out;
    out.result = SemanticErrorOutcome{"unsupported_feature", *why, true};
    return out;
  }
  bool stripped = strip_ && role == Role::Reference;
  auto artifacts = render_program(program, spec_.dialect, role, stripped);
  auto dir = fresh_workdir();
  auto out = invoke_engine(spec_, program, artifacts, dir, !stripped);
  bool keep = spec_.keep == WorkdirPolicy::KeepAlways || (spec_.keep == WorkdirPolicy::KeepOnFailure && !out.has_facts());
  if (!keep) {
    std::error_code ec;
    fs::remove_all(dir, ec);
    out.workdir.clear();
  }
  return out;
}

}  // namespace deopt
