// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "angvel/decomp.hpp"
#include "angvel/dsp.hpp"
#include "angvel/estimate.hpp"
#include "angvel/scenario.hpp"

namespace angvel {

struct TrackReport {
    int track_id = 0;
    int truth_index = -1; ///< index into the truth list, -1 when unassigned
    int target_id = -1;
    EstimateSeries raw;
    EstimateSeries smoothed;
    std::optional<EstimateStats> stats_raw;
    std::optional<EstimateStats> stats_smoothed;
};

struct ProcessResult {
    std::array<TimeFrequencyMap, 2> doppler;
    TimeFrequencyMap interferometric;
    DecomposedResponse decomposed;
    std::vector<TrackReport> tracks;
    FrequencyMode mode = FrequencyMode::Known;
};

/// High-pass, per-antenna STFTs, full interferometric map, decomposition,
/// peak tracking, smoothing and statistics against `truth`.
/// `n_targets` defaults to the number of truth trajectories.
ProcessResult process_capture(const IqCapture& capture, const ArrayGeometry& geom, const ProcessingConfig& cfg,
                              const std::vector<TargetTrajectory>& truth,
                              std::optional<int> n_targets = std::nullopt);

} // namespace angvel
