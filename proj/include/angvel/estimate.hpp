// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "angvel/dsp.hpp"
#include "angvel/scene.hpp"

namespace angvel {

struct EstimatePoint {
    double t_s = 0.0;
    double f_hz = 0.0;
    double omega_radps = 0.0;
    bool valid = false;
};

struct EstimateSeries {
    int track_id = 0;
    std::vector<EstimatePoint> points;

    std::size_t n_valid() const;
};

/// Per-frame interpolated peak frequency. Frames whose peak magnitude is
/// below max_peak * 10^(floor_db/20) are invalid, as are frames flagged in
/// `frame_valid` (if given).
EstimateSeries peak_track(const TimeFrequencyMap& response, double floor_db = -20.0,
                          const std::vector<char>* frame_valid = nullptr, int track_id = 0);

/// Centred moving average over valid frames; the window is truncated at the
/// series ends and invalid frames stay invalid.
EstimateSeries smooth(const EstimateSeries& series, int window_frames = 60);

struct OmegaOptions {
    /// Per-point absolute angle; when set, omega = f lambda / (D cos theta).
    std::optional<std::vector<double>> theta_rad;
};

/// omega = f * lambda / D on valid points.
EstimateSeries to_omega(const EstimateSeries& series, const ArrayGeometry& geom, const OmegaOptions& opts = {});

/// Ground-truth angular velocity samples (time-ordered).
struct TruthSeries {
    std::vector<double> t_s;
    std::vector<double> omega_radps;

    /// Linear interpolation; nullopt outside the support.
    std::optional<double> at(double t) const;
};

/// RX1 omega of a trajectory at each of its own sample times.
TruthSeries truth_omega(const TargetTrajectory& traj, const ArrayGeometry& geom,
                        const KinematicsOptions& opts = {});

struct EstimateStats {
    double mu_true_radps = 0.0;
    double mu_est_radps = 0.0;
    double std_radps = 0.0;
    std::size_t n_valid_frames = 0;
};

/// Means of truth and estimate and the sample std of the estimate, over valid
/// frames that fall inside the truth support.
EstimateStats stats(const EstimateSeries& est, const TruthSeries& truth);

} // namespace angvel
