#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "deopt/engine.hpp"
#include "deopt/render.hpp"

namespace deopt {

struct SemanticErrorOutcome {
  std::string code;  // catalog code, empty when nothing matched
  std::string message;
  bool matched = false;
};

struct CrashOutcome {
  int exit_code = -1;
  int signal = 0;
  std::string detail;
};

struct TimeoutOutcome {
  double limit_s = 0.0;
};

struct ParseFailureOutcome {
  std::string detail;
};

struct RunOutcome {
  std::variant<FactStore, SemanticErrorOutcome, CrashOutcome, TimeoutOutcome, ParseFailureOutcome> result;
  std::string stdout_text;
  std::string stderr_text;
  double elapsed_s = 0.0;
  std::string workdir;  // kept on disk only when the workdir policy says so

  bool has_facts() const { return std::holds_alternative<FactStore>(result); }
  const FactStore& facts() const { return std::get<FactStore>(result); }
  const SemanticErrorOutcome* semantic_error() const { return std::get_if<SemanticErrorOutcome>(&result); }
  bool expected_error() const {
    const auto* e = semantic_error();
    return e && e->matched;
  }
  /// facts, semantic_error, crash, timeout, parse_failure
  std::string_view kind_name() const;
  std::string describe() const;
};

/// Campaign-level misconfiguration (missing executable, unreadable spec).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class EngineAdapter {
 public:
  virtual ~EngineAdapter() = default;

  /// Evaluates `program` (facts in program.edb) and returns the facts of
  /// program.outputs.
  virtual RunOutcome run(const Program& program, Role role) = 0;
  virtual Dialect dialect() const = 0;
  virtual std::string name() const = 0;
};

/// Catalog codes the embedded engine may report for generated programs.
const std::vector<std::string>& embedded_error_catalog();

/// In-process adapter over the embedded engine. Reference runs use the same
/// configuration as optimized ones; with `strip` they lose relation
/// annotations and the enable flags, while injected bugs stay in place.
class EmbeddedAdapter : public EngineAdapter {
 public:
  explicit EmbeddedAdapter(OptConfig opt, bool strip = false, EvalLimits limits = {});

  RunOutcome run(const Program& program, Role role) override;
  Dialect dialect() const override { return Dialect::Embedded; }
  std::string name() const override { return "embedded"; }
  const OptConfig& opt() const { return opt_; }
  const EvalStats& last_stats() const { return last_stats_; }

 private:
  OptConfig opt_;
  bool strip_;
  EvalLimits limits_;
  EvalStats last_stats_;
};

enum class WorkdirPolicy : std::uint8_t { KeepOnFailure, KeepAlways, KeepNever };

struct ErrorPattern {
  std::string code;
  std::string pattern;  // ECMAScript regex searched in stderr then stdout
};

/// External engine description, loaded from JSON:
///   {"name": "souffle", "dialect": "souffle", "executable": "souffle",
///    "args": ["-F", "{factdir}", "-D", "{outdir}", "{program}"],
///    "optimization_args": ["--magic-transform=*"], "timeout_s": 30,
///    "error_catalog": [{"code": "div_zero", "pattern": "division by zero"}],
///    "workdir_root": "/tmp/deopt", "keep_workdirs": "on_failure"}
struct EngineSpec {
  std::string name;
  Dialect dialect = Dialect::SouffleLike;
  std::string executable;
  std::vector<std::string> args;
  std::vector<std::string> optimization_args;
  double timeout_s = 30.0;
  std::vector<ErrorPattern> error_catalog;
  std::string workdir_root;  // empty: system temp directory
  WorkdirPolicy keep = WorkdirPolicy::KeepOnFailure;

  static EngineSpec from_json_text(const std::string& text);  // throws ConfigError
  static EngineSpec load(const std::string& path);             // throws ConfigError
  std::string to_json_text() const;
};

/// Writes the rendered artifacts into `workdir` (program.dl, facts/, out/),
/// runs the engine and classifies the result.
RunOutcome invoke_engine(const EngineSpec& spec, const Program& program, const RenderedArtifacts& artifacts,
                         const std::string& workdir, bool optimization_args);

class ProcessAdapter : public EngineAdapter {
 public:
  /// `strip` drops optimization_args and annotations from reference runs.
  explicit ProcessAdapter(EngineSpec spec, bool strip = false);

  RunOutcome run(const Program& program, Role role) override;
  Dialect dialect() const override { return spec_.dialect; }
  std::string name() const override { return spec_.name; }
  const EngineSpec& spec() const { return spec_; }

 private:
  std::string fresh_workdir();

  EngineSpec spec_;
  bool strip_;
  std::uint64_t counter_ = 0;
};

}  // namespace deopt
