#include "deopt/campaign.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "deopt/ir_json.hpp"

namespace deopt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

OptConfig iteration_opt(const CampaignConfig& cfg, std::uint64_t iteration) {
  OptConfig opt = cfg.engine.opt;
  if (cfg.engine.sample_flags) {
    auto combos = all_flag_combinations();
    const auto& c = combos[iteration % combos.size()];
    opt.enable_magic = c.enable_magic;
    opt.enable_inline = c.enable_inline;
    opt.enable_subsumption = c.enable_subsumption;
  }
  return opt;
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("cannot write " + p.string());
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::unique_ptr<EngineAdapter> make_adapter(const CampaignConfig& cfg, std::uint64_t iteration) {
  bool strip = cfg.mode == CampaignMode::IrePlusStrip;
  if (cfg.engine.embedded)
    return std::make_unique<EmbeddedAdapter>(iteration_opt(cfg, iteration), strip, cfg.engine.limits);
  return std::make_unique<ProcessAdapter>(cfg.engine.spec, strip);
}

std::string describe_engine(const CampaignConfig& cfg, std::uint64_t iteration) {
  bool strip = cfg.mode == CampaignMode::IrePlusStrip;
  json j;
  if (cfg.engine.embedded) {
    auto opt = iteration_opt(cfg, iteration);
    json bugs = json::array();
    for (auto b : opt.injected_bugs) bugs.push_back(std::string(bug_name(b)));
    j = {{"engine", "embedded"},
         {"enable_magic", opt.enable_magic},
         {"enable_inline", opt.enable_inline},
         {"enable_subsumption", opt.enable_subsumption},
         {"bugs", bugs},
         {"max_tuples_per_relation", cfg.engine.limits.max_tuples_per_relation},
         {"max_bindings", cfg.engine.limits.max_bindings},
         {"strip", strip}};
  } else {
    j = {{"engine", "process"}, {"spec", json::parse(cfg.engine.spec.to_json_text())}, {"strip", strip}};
  }
  return j.dump();
}

std::unique_ptr<EngineAdapter> adapter_from_description(const std::string& text) {
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("bad engine description");
  bool strip = j.value("strip", false);
  if (j.value("engine", std::string()) == "embedded") {
    OptConfig opt;
    opt.enable_magic = j.value("enable_magic", false);
    opt.enable_inline = j.value("enable_inline", false);
    opt.enable_subsumption = j.value("enable_subsumption", false);
    for (const auto& b : j.value("bugs", std::vector<std::string>{})) {
      auto id = parse_bug(b);
      if (!id) throw ConfigError("unknown bug " + b);
      opt.injected_bugs.insert(*id);
    }
    EvalLimits limits;
    limits.max_tuples_per_relation = j.value("max_tuples_per_relation", limits.max_tuples_per_relation);
    limits.max_bindings = j.value("max_bindings", limits.max_bindings);
    return std::make_unique<EmbeddedAdapter>(opt, strip, limits);
  }
  if (j.value("engine", std::string()) == "process" && j.contains("spec"))
    return std::make_unique<ProcessAdapter>(EngineSpec::from_json_text(j["spec"].dump()), strip);
  throw ConfigError("unknown engine description");
}

void write_report_dir(const std::string& dir, const BugReport& report, const CampaignConfig& cfg) {
  fs::path d(dir);
  write_text(d / "report.json", report_to_json_text(report));
  write_text(d / "program.dl", render_readable(report.program));
  write_text(d / "program.json", program_to_json_text(report.program));
  if (!cfg.engine.embedded) {
    auto art = render_program(report.program, cfg.engine.spec.dialect, Role::Optimized, false);
    write_text(d / "optimized" / "program.dl", art.program_text);
    for (const auto& [rel_path, content] : art.files) write_text(d / "optimized" / rel_path, content);
    write_text(d / "engine.json", cfg.engine.spec.to_json_text());
  }
  if (report.reduced) {
    write_text(d / "reduced.dl", render_readable(*report.reduced));
    write_text(d / "reduced.json", program_to_json_text(*report.reduced));
  }
}

CampaignResult run_campaign(const CampaignConfig& cfg) {
  CampaignResult result;
  auto start = std::chrono::steady_clock::now();
  if (!cfg.iterations && !cfg.duration_s) throw ConfigError("campaign needs an iteration count or a duration");
  if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);

  std::atomic<std::uint64_t> next{0};
  std::mutex sink;
  std::map<std::uint64_t, IterationTrace> done;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    try {
      for (;;) {
        if (failed) return;
        std::uint64_t i = next.fetch_add(1);
        if (cfg.iterations && i >= *cfg.iterations) return;
        if (cfg.duration_s &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= *cfg.duration_s)
          return;
        auto engine = make_adapter(cfg, i);
        auto trace = cfg.baseline == Baseline::Random ? run_iteration_random(cfg.gen, *engine, i)
                                                      : run_iteration(cfg.gen, *engine, i);
        auto desc = describe_engine(cfg, i);
        for (auto& rep : trace.reports) {
          rep.engine = desc;
          if (cfg.reduce && rep.kind == BugKind::Logic) {
            auto fresh = make_adapter(cfg, i);
            auto red = reduce_testcase(rep, *fresh, OracleConfig{cfg.gen.max_iter});
            if (red.reproducible)
              rep.reduced = std::move(red.program);
            else
              rep.reduction_failed = true;
          }
        }
        std::lock_guard<std::mutex> lock(sink);
        if (!cfg.out_dir.empty())
          for (const auto& rep : trace.reports)
            write_report_dir((fs::path(cfg.out_dir) / "reports" /
                              (std::to_string(rep.iteration) + "-" + std::to_string(rep.rule_index)))
                                 .string(),
                             rep, cfg);
        trace.program = Program{};
        done.emplace(i, std::move(trace));
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(sink);
      if (!failure) failure = std::current_exception();
      failed = true;
    }
  };

  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < std::max<std::size_t>(1, cfg.workers); ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  for (auto& [i, t] : done) {
    result.reports += t.reports.size();
    for (const auto& r : t.reports) result.logic_reports += r.kind == BugKind::Logic;
    result.iterations.push_back(std::move(t));
  }
  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!cfg.out_dir.empty()) {
    write_text(fs::path(cfg.out_dir) / "stats.csv", stats_csv(result.iterations));
    write_text(fs::path(cfg.out_dir) / "timings.csv", timings_csv(result.iterations));
  }
  return result;
}

std::string stats_csv(const std::vector<IterationTrace>& its) {
  std::ostringstream os;
  os << "iteration,seed,arm,rules,retained,retained_empty,discarded_empty,discarded_error,exhausted,valid,"
        "output_empty,mean_attempts,cycles,mean_cycle_length,reference_runs,optimized_runs,bugs\n";
  for (const auto& t : its) {
    double mean_att = 0;
    for (auto a : t.attempts) mean_att += static_cast<double>(a);
    if (!t.attempts.empty()) mean_att /= static_cast<double>(t.attempts.size());
    os << t.iteration << "," << t.seed << "," << (t.random_arm ? "random" : "incremental") << "," << t.rules << ","
       << t.retained << "," << t.retained_empty << "," << t.discarded_empty << "," << t.discarded_error << ","
       << t.exhausted << "," << t.valid << "," << t.output_empty << "," << fmt_double(mean_att) << ","
       << t.cycles.count << "," << fmt_double(t.cycles.mean_length) << "," << t.reference_runs << ","
       << t.optimized_runs << "," << t.reports.size() << "\n";
  }
  return os.str();
}

std::string timings_csv(const std::vector<IterationTrace>& its) {
  std::ostringstream os;
  os << "iteration,reference_s,optimized_s,reference_fraction,optimized_fraction\n";
  for (const auto& t : its) {
    double total = t.reference_time_s + t.optimized_time_s;
    double ref = total > 0 ? t.reference_time_s / total : 0.0;
    os << t.iteration << "," << fmt_double(t.reference_time_s) << "," << fmt_double(t.optimized_time_s) << ","
       << fmt_double(ref) << "," << fmt_double(1.0 - ref) << "\n";
  }
  return os.str();
}

namespace {

std::vector<std::map<std::string, std::string>> read_csv(const std::string& text) {
  std::vector<std::map<std::string, std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line);
    if (header.empty()) {
      header = fields;
      continue;
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) row[header[i]] = fields[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::optional<std::string> summarize_stats(const std::string& stats_text, const std::string& timings_text) {
  auto rows = read_csv(stats_text);
  auto timing = read_csv(timings_text);
  if (stats_text.rfind("iteration,", 0) != 0) return std::nullopt;
  double n = static_cast<double>(rows.size());
  double rules = 0, empty = 0, valid = 0, nonempty = 0, cycles = 0, cycle_len = 0, bugs = 0, exhausted = 0,
         attempts = 0;
  try {
    for (auto& r : rows) {
      rules += std::stod(r["rules"]);
      bool is_valid = r["valid"] == "1";
      bool is_empty = r["output_empty"] == "1";
      empty += is_empty;
      valid += is_valid;
      nonempty += is_valid && !is_empty;
      cycles += std::stod(r["cycles"]);
      cycle_len += std::stod(r["mean_cycle_length"]);
      bugs += std::stod(r["bugs"]);
      exhausted += r["exhausted"] == "1";
      attempts += std::stod(r["mean_attempts"]);
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  double ref = 0, opt = 0;
  for (auto& t : timing) {
    try {
      ref += std::stod(t["reference_s"]);
      opt += std::stod(t["optimized_s"]);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  auto avg = [&](double v) { return n > 0 ? v / n : 0.0; };
  std::ostringstream os;
  os << "metric,value\n";
  os << "iterations," << rows.size() << "\n";
  os << "mean_rules_at_termination," << fmt_double(avg(rules)) << "\n";
  os << "exhausted_fraction," << fmt_double(avg(exhausted)) << "\n";
  os << "mean_attempts_per_rule," << fmt_double(avg(attempts)) << "\n";
  os << "empty_output_fraction," << fmt_double(avg(empty)) << "\n";
  os << "valid_test_cases," << valid << "\n";
  os << "nonempty_test_cases," << nonempty << "\n";
  os << "mean_cycle_count," << fmt_double(avg(cycles)) << "\n";
  os << "mean_cycle_length," << fmt_double(avg(cycle_len)) << "\n";
  os << "reference_time_fraction," << fmt_double(ref + opt > 0 ? ref / (ref + opt) : 0.0) << "\n";
  os << "bug_reports," << bugs << "\n";
  return os.str();
}

}  // namespace deopt
