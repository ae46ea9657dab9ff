#pragma once

#include <functional>
#include <iosfwd>

#include "plidar/config.hpp"

namespace plidar {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitFrameFailures = 2,
  kExitEvalInputMismatch = 3,
};

// `log` receives one JSON line per frame and stage; pass nullptr to silence.
int cmd_convert(const RunConfig& cfg, std::ostream* log);
int cmd_fit(const RunConfig& cfg, std::ostream* log);
int cmd_eval(const RunConfig& cfg, std::ostream* log);
int cmd_depth_diag(const RunConfig& cfg, std::ostream* log);

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace plidar
