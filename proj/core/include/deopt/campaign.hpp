#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deopt/adapters.hpp"
#include "deopt/generator.hpp"
#include "deopt/reduce.hpp"

namespace deopt {

/// Engine under test: the embedded engine with `opt`, or an external one.
struct EngineChoice {
  bool embedded = true;
  OptConfig opt;
  // Embedded only: iteration i runs with flag combination i mod 8 (the
  // injected bugs of `opt` are kept).
  bool sample_flags = false;
  EvalLimits limits;
  EngineSpec spec;
};

enum class CampaignMode : std::uint8_t { Ire, IrePlusStrip };
enum class Baseline : std::uint8_t { None, Random };

struct CampaignConfig {
  GenConfig gen;
  EngineChoice engine;
  CampaignMode mode = CampaignMode::Ire;
  std::optional<std::uint64_t> iterations;
  std::optional<double> duration_s;
  std::size_t workers = 1;
  std::string out_dir;  // empty: nothing is written
  Baseline baseline = Baseline::None;
  bool reduce = true;
};

/// Engine used by iteration `iteration`, plus its JSON description.
std::unique_ptr<EngineAdapter> make_adapter(const CampaignConfig& cfg, std::uint64_t iteration);
std::string describe_engine(const CampaignConfig& cfg, std::uint64_t iteration);
/// Rebuilds an adapter from describe_engine output (used to replay reports).
std::unique_ptr<EngineAdapter> adapter_from_description(const std::string& json_text);  // throws ConfigError

struct CampaignResult {
  std::vector<IterationTrace> iterations;  // ascending iteration index, programs dropped
  std::size_t reports = 0;
  std::size_t logic_reports = 0;
  double wall_time_s = 0.0;
};

/// Runs iterations on `workers` threads until the iteration count or time
/// budget is reached. Reports go to <out>/reports/<iteration>-<rule>/ and
/// per-iteration statistics to <out>/stats.csv (deterministic) and
/// <out>/timings.csv (wall-clock figures).
CampaignResult run_campaign(const CampaignConfig& cfg);

std::string stats_csv(const std::vector<IterationTrace>& its);
std::string timings_csv(const std::vector<IterationTrace>& its);

/// "metric,value" summary of a stats.csv / timings.csv pair. Returns nullopt
/// when the input cannot be read.
std::optional<std::string> summarize_stats(const std::string& stats_text, const std::string& timings_text);

/// Writes report.json, program.dl and the replay artifacts of one report.
void write_report_dir(const std::string& dir, const BugReport& report, const CampaignConfig& cfg);

}  // namespace deopt
