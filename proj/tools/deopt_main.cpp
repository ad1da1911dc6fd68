#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "deopt/campaign.hpp"
#include "deopt/ir_json.hpp"

namespace fs = std::filesystem;
using namespace deopt;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitConfig = 1;
constexpr int kExitBugs = 2;
constexpr int kExitEngineError = 3;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("cannot write " + path.string());
}

std::set<BugId> parse_bug_list(const std::vector<std::string>& names) {
  std::set<BugId> out;
  for (const auto& n : names) {
    std::stringstream ss(n);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      auto id = parse_bug(item);
      if (!id) throw ConfigError("unknown bug id '" + item + "'");
      out.insert(*id);
    }
  }
  return out;
}

struct RunArgs {
  std::string engine = "embedded";
  std::vector<std::string> inject;
  std::string profile;
  bool magic = false, inline_ = false, subsumption = false, sample_flags = false;
  std::size_t max_rules = 100;
  std::string max_att = "inf";
  double p_empty = 0.1, p_head = 0.02;
  std::size_t max_iter = 100;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> iterations;
  std::optional<double> duration;
  std::size_t workers = 1;
  std::string mode = "ire";
  std::string baseline = "none";
  std::string out;
  bool no_reduce = false;
};

int cmd_run(const RunArgs& a) {
  CampaignConfig cfg;
  cfg.gen.max_rules = a.max_rules;
  if (a.max_att != "inf") {
    try {
      cfg.gen.max_att = std::stoull(a.max_att);
    } catch (const std::exception&) {
      throw ConfigError("--max-att expects a number or 'inf'");
    }
  }
  cfg.gen.p_empty = a.p_empty;
  cfg.gen.p_head = a.p_head;
  cfg.gen.max_iter = a.max_iter;
  cfg.gen.seed = a.seed;
  if (!a.profile.empty()) {
    auto id = parse_bug(a.profile);
    if (!id) throw ConfigError("unknown bug id '" + a.profile + "'");
    cfg.gen = with_bug_features(cfg.gen, *id);
  }
  if (a.engine == "embedded") {
    cfg.engine.embedded = true;
    cfg.engine.opt.enable_magic = a.magic;
    cfg.engine.opt.enable_inline = a.inline_;
    cfg.engine.opt.enable_subsumption = a.subsumption;
    cfg.engine.opt.injected_bugs = parse_bug_list(a.inject);
    cfg.engine.sample_flags = a.sample_flags;
  } else {
    if (!a.inject.empty()) throw ConfigError("--inject only applies to the embedded engine");
    cfg.engine.embedded = false;
    cfg.engine.spec = EngineSpec::load(a.engine);
    cfg.gen.dialect = cfg.engine.spec.dialect;
  }
  if (a.mode == "ire")
    cfg.mode = CampaignMode::Ire;
  else if (a.mode == "strip")
    cfg.mode = CampaignMode::IrePlusStrip;
  else
    throw ConfigError("--mode expects ire or strip");
  if (a.baseline == "random")
    cfg.baseline = Baseline::Random;
  else if (a.baseline != "none")
    throw ConfigError("--baseline expects none or random");
  cfg.iterations = a.iterations;
  cfg.duration_s = a.duration;
  if (!cfg.iterations && !cfg.duration_s) cfg.iterations = 1;
  cfg.workers = a.workers;
  cfg.out_dir = a.out;
  cfg.reduce = !a.no_reduce;

  auto res = run_campaign(cfg);
  std::size_t nonempty = 0, valid = 0;
  for (const auto& t : res.iterations) {
    valid += t.valid;
    nonempty += t.valid && !t.output_empty;
  }
  std::cout << "iterations: " << res.iterations.size() << "\n"
            << "valid test cases: " << valid << "\n"
            << "non-empty test cases: " << nonempty << "\n"
            << "bug reports: " << res.reports << " (" << res.logic_reports << " logic)\n";
  for (const auto& t : res.iterations)
    for (const auto& r : t.reports)
      std::cout << "  " << bug_kind_name(r.kind) << " at iteration " << r.iteration << ", rule " << r.rule_index
                << ": " << r.detail << "\n";
  return res.reports == 0 ? kExitClean : kExitBugs;
}

int cmd_reduce(const std::string& report_dir) {
  auto path = fs::path(report_dir) / "report.json";
  std::string err;
  auto report = report_from_json_text(read_text(path.string()), &err);
  if (!report) throw ConfigError("cannot parse " + path.string() + ": " + err);
  auto engine = adapter_from_description(report->engine);
  std::size_t max_iter = 100;
  auto red = reduce_testcase(*report, *engine, OracleConfig{max_iter});
  if (!red.reproducible) {
    report->reduction_failed = true;
    write_text(path, report_to_json_text(*report));
    std::cout << "not reproducible; report kept unreduced\n";
    return kExitClean;
  }
  report->reduced = red.program;
  report->reduction_failed = false;
  write_text(path, report_to_json_text(*report));
  write_text(fs::path(report_dir) / "reduced.dl", render_readable(red.program));
  write_text(fs::path(report_dir) / "reduced.json", program_to_json_text(red.program));
  std::cout << "reduced " << report->program.rules.size() << " -> " << red.program.rules.size() << " rules ("
            << red.checks << " checks)\n"
            << render_readable(red.program);
  return kExitClean;
}

int cmd_stats(const std::string& out_dir) {
  auto stats = read_text((fs::path(out_dir) / "stats.csv").string());
  std::string timings;
  if (fs::exists(fs::path(out_dir) / "timings.csv")) timings = read_text((fs::path(out_dir) / "timings.csv").string());
  auto summary = summarize_stats(stats, timings);
  if (!summary) throw ConfigError("malformed stats in " + out_dir);
  write_text(fs::path(out_dir) / "summary.csv", *summary);
  std::cout << *summary;
  return kExitClean;
}

// Runs the embedded engine on a JSON program, as an external engine would.
int cmd_exec(const std::string& program_path, const std::string& out_dir, const OptConfig& opt) {
  std::string err;
  auto program = program_from_json_text(read_text(program_path), &err);
  if (!program) {
    std::cerr << "error[parse]: " << err << "\n";
    return kExitEngineError;
  }
  auto res = evaluate(*program, FactStore{}, opt);
  if (!res.ok()) {
    std::cerr << "error[" << res.error().code() << "]: " << res.error().message << "\n";
    return kExitEngineError;
  }
  fs::create_directories(out_dir);
  for (const auto& rel : program->outputs) {
    const auto& tuples = res.facts().get(rel);
    std::string text;
    const auto* decl = program->find_decl(rel);
    if (decl && decl->arity() == 0)
      text = tuples.empty() ? "" : "\n";
    else
      text = render_fact_file(tuples);
    write_text(fs::path(out_dir) / (rel + ".facts"), text);
  }
  return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deopt: finds optimization bugs in Datalog engines by incremental rule evaluation"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a fuzzing campaign");
  run_cmd->add_option("--engine", run.engine, "Engine spec JSON file, or 'embedded'");
  run_cmd->add_option("--inject", run.inject, "Comma separated bug ids for the embedded engine");
  run_cmd->add_option("--profile", run.profile, "Raise the probabilities of the constructs a bug id depends on");
  run_cmd->add_flag("--magic", run.magic, "Enable the demand rewrite (embedded)");
  run_cmd->add_flag("--inline", run.inline_, "Enable inlining (embedded)");
  run_cmd->add_flag("--subsumption", run.subsumption, "Enable eager subsumption (embedded)");
  run_cmd->add_flag("--sample-flags", run.sample_flags, "Cycle through all enable-flag combinations (embedded)");
  run_cmd->add_option("--max-rules", run.max_rules, "Rules per test case")->check(CLI::PositiveNumber);
  run_cmd->add_option("--max-att", run.max_att, "Consecutive failed attempts before giving up, or 'inf'");
  run_cmd->add_option("--p-empty", run.p_empty, "Probability of keeping a rule with an empty result")
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--p-head", run.p_head, "Probability of reusing an existing head relation")
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--max-iter", run.max_iter, "Round limit for recursive components")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "Campaign seed");
  auto* it_opt = run_cmd->add_option("--iterations", run.iterations, "Number of test iterations");
  run_cmd->add_option("--duration", run.duration, "Wall-clock budget in seconds")->excludes(it_opt);
  run_cmd->add_option("--workers", run.workers, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--mode", run.mode, "ire or strip");
  run_cmd->add_option("--baseline", run.baseline, "none or random");
  run_cmd->add_option("--out", run.out, "Output directory for reports and statistics");
  run_cmd->add_flag("--no-reduce", run.no_reduce, "Skip test case reduction");

  std::string report_dir;
  auto* reduce_cmd = app.add_subcommand("reduce", "Reduce the program of a bug report");
  reduce_cmd->add_option("--report", report_dir, "Report directory")->required();

  std::string stats_dir;
  auto* stats_cmd = app.add_subcommand("stats", "Summarize the statistics of a campaign");
  stats_cmd->add_option("--out", stats_dir, "Campaign output directory")->required();

  std::string exec_program, exec_out;
  std::vector<std::string> exec_inject;
  bool exec_magic = false, exec_inline = false, exec_subsumption = false;
  auto* exec_cmd = app.add_subcommand("exec", "Evaluate a JSON program with the embedded engine");
  exec_cmd->add_option("--program", exec_program, "Program JSON")->required();
  exec_cmd->add_option("--out", exec_out, "Directory for <relation>.facts outputs")->required();
  exec_cmd->add_flag("--magic", exec_magic);
  exec_cmd->add_flag("--inline", exec_inline);
  exec_cmd->add_flag("--subsumption", exec_subsumption);
  exec_cmd->add_option("--inject", exec_inject);
  // Engine specs put optimization arguments ahead of the subcommand.
  app.add_flag("--magic", exec_magic, "exec: enable the magic-set rewrite");
  app.add_flag("--inline", exec_inline, "exec: enable inlining");
  app.add_flag("--subsumption", exec_subsumption, "exec: enable subsumption pruning");
  app.add_option("--inject", exec_inject, "exec: injected bugs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*reduce_cmd) return cmd_reduce(report_dir);
    if (*stats_cmd) return cmd_stats(stats_dir);
    if (*exec_cmd) {
      OptConfig opt;
      opt.enable_magic = exec_magic;
      opt.enable_inline = exec_inline;
      opt.enable_subsumption = exec_subsumption;
      opt.injected_bugs = parse_bug_list(exec_inject);
      return cmd_exec(exec_program, exec_out, opt);
    }
  } catch (const ConfigError& e) {
    std::cerr << "deopt: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
