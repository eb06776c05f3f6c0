#pragma once

#include <string>
#include <vector>

#include "radloc/evaluation.hpp"
#include "radloc/pipeline.hpp"

namespace radloc::testing {

struct EndToEnd {
  PreparedRun prepared;
  PipelineConfig config;
  LocalizationResult result;
  TrajectoryErrorReport report;
  double path_length = 0.0;
  double seconds = 0.0;  // localization wall time
};

/// Simulates `scenario`, localizes with `config` (origin heading taken from
/// the first ground-truth pose) and scores against ground truth.
EndToEnd run_end_to_end(const Scenario& scenario, PipelineConfig config);

/// The urban configuration with the published noise sigmas injected into
/// odometry and overhead measurements.
PipelineConfig urban_injected_config(std::uint64_t seed);

/// Gate bookkeeping violations of a manifest, one message per offending scan.
std::vector<std::string> audit_gating(const LocalizationResult& result, double tau_fit);

}  // namespace radloc::testing
