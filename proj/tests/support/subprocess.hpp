#pragma once

// Minimal fork/exec harness for driving the cdxstats binary from tests,
// with an optional address-space cap on the child.

#include <string>
#include <vector>

namespace testsup {

struct ProcResult {
  int exit_code = -1;
  std::string output;  // combined stdout + stderr
};

ProcResult run_process(const std::vector<std::string>& argv,
                       std::uint64_t rlimit_as_bytes = 0);

}  // namespace testsup
