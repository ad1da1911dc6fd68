#pragma once

#include <string>
#include <vector>

namespace deopt {

struct ProcessResult {
  bool spawn_failed = false;
  std::string spawn_error;
  bool timed_out = false;
  int exit_code = -1;    // valid when the process exited normally
  int term_signal = 0;   // nonzero when killed by a signal
  std::string out;
  std::string err;
  double elapsed_s = 0.0;

  bool exited_ok() const { return !spawn_failed && !timed_out && term_signal == 0 && exit_code == 0; }
};

/// Runs argv[0] (PATH lookup) in `cwd` with stdin closed. On timeout the whole
/// process group is killed. `timeout_s` <= 0 means no limit.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& cwd, double timeout_s);

}  // namespace deopt
