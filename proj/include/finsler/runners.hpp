#pragma once

#include <functional>

#include "finsler/report.hpp"

namespace finsler {

// exit-code contract, fixed for scripting
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInvariant = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitFlowAborted = 5;

struct RunOutput {
  int exit_code = kExitOk;
  std::string message;  // one-line outcome for the CLI
  std::vector<ReportFile> files;
};

RunOutput run_tensors(const RunConfig& cfg);
RunOutput run_curvature(const RunConfig& cfg);
RunOutput run_audit(const RunConfig& cfg);
RunOutput run_flow(const RunConfig& cfg);

/// Worker cap: FINSLERLAB_THREADS if set, else hardware concurrency.
int worker_thread_cap();

/// Index-parallel loop; results must be written to per-index slots so the
/// output is independent of the thread count.
void parallel_for(size_t count, const std::function<void(size_t)>& fn);

}  // namespace finsler
