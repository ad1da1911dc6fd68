#pragma once

#include "deopt/adapters.hpp"
#include "deopt/discrepancy.hpp"
#include "deopt/oracle.hpp"

namespace deopt {

struct ReduceResult {
  Program program;
  bool reproducible = false;
  std::size_t checks = 0;  // oracle + optimized evaluations performed
};

/// True when the optimized result of `program` differs from its oracle on
/// the output relation.
bool shows_logic_bug(const Program& program, EngineAdapter& engine, const OracleConfig& cfg);

/// Greedy rule-level delta debugging: drops rules the output does not depend
/// on, then single rules, single body literals and single EDB facts for as
/// long as the discrepancy persists. Deterministic.
ReduceResult reduce_testcase(const BugReport& report, EngineAdapter& engine, const OracleConfig& cfg = {});
ReduceResult reduce_program(const Program& program, EngineAdapter& engine, const OracleConfig& cfg = {});

}  // namespace deopt
