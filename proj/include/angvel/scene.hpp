// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "angvel/types.hpp"

namespace angvel {

/// Plan-view layout of a single-transmitter, two-receiver interferometer.
///
/// Broadside is +y. Angles are measured from broadside, positive clockwise
/// seen from above (towards +x). RX1 sits on the +x side so that clockwise
/// target motion yields a positive shift in ch1 * conj(ch2).
struct ArrayGeometry {
    double baseline_m = 0.0;
    double wavelength_m = 0.0;
    double carrier_hz = 0.0;
    Vec2 tx_position = Vec2::Zero();
    Vec2 rx1_position = Vec2::Zero();
    Vec2 rx2_position = Vec2::Zero();

    /// TX at the origin, RX1 at (+D/2, 0), RX2 at (-D/2, 0).
    static ArrayGeometry centered(double carrier_hz, double baseline_m);
    static ArrayGeometry centered_wavelengths(double carrier_hz, double baseline_wavelengths);

    const Vec2& rx(int antenna) const { return antenna == 0 ? rx1_position : rx2_position; }

    /// Throws ValidationError on any broken invariant.
    void validate() const;
};

struct TrajectorySample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// Time-ordered plan-view track of one point scatterer.
struct TargetTrajectory {
    int target_id = 0;
    std::vector<TrajectorySample> samples;
    double amplitude = 1.0;

    void validate() const;

    double t_begin() const { return samples.front().t; }
    double t_end() const { return samples.back().t; }
    double mean_spacing() const { return (t_end() - t_begin()) / double(samples.size() - 1); }
    bool covers(double t) const { return t >= t_begin() && t <= t_end(); }

    /// Linear interpolation; throws RangeError outside [t_begin, t_end].
    Vec2 position_at(double t) const;
};

/// Instantaneous geometry of one target, per receive antenna (index 0 = RX1).
///
/// `range_m` is the RX-to-target distance. `v_radial_mps` is the rate of the
/// half round-trip path (TX->target->RX)/2, so that the baseband Doppler of
/// channel i is exactly -2 v_radial/lambda; it is negative when approaching.
struct KinematicState {
    std::array<double, 2> range_m{};
    std::array<double, 2> theta_rad{};
    std::array<double, 2> v_radial_mps{};
    std::array<double, 2> omega_radps{};
    std::array<double, 2> tau_s{};
    double range_tx_m = 0.0;
};

struct KinematicsOptions {
    /// Central-difference half step; 0 selects the trajectory's native spacing.
    double step_s = 0.0;
};

/// Static part of KinematicState (no derivatives) for a point.
KinematicState geometry_at(const Vec2& position, const ArrayGeometry& geom);

KinematicState kinematics_at(const TargetTrajectory& traj, const ArrayGeometry& geom, double t,
                             const KinematicsOptions& opts = {});

struct ShiftOptions {
    /// Below this |theta| the broadside form omega*D/lambda is used.
    double small_angle_threshold_rad = 0.2;
    KinematicsOptions kinematics{};
};

struct ExpectedShifts {
    double doppler_hz = 0.0;         ///< ch1 Doppler; positive when approaching
    double doppler_rx2_hz = 0.0;     ///< same quantity referenced to RX2
    double interferometric_hz = 0.0; ///< ch1 * conj(ch2) frequency
};

ExpectedShifts expected_shifts(const TargetTrajectory& traj, const ArrayGeometry& geom, double t,
                               const ShiftOptions& opts = {});

/// Doppler frequency for a half-path range rate (m/s).
inline double doppler_from_range_rate(double v_radial_mps, double wavelength_m)
{
    return -2.0 * v_radial_mps / wavelength_m;
}

/// Centered moving average of positions; the window shrinks symmetrically at
/// the ends so that uniform straight-line motion is preserved exactly.
TargetTrajectory smooth_positions(const TargetTrajectory& traj, int width);

struct GroundTruthOptions {
    /// Moving-average width applied to positions after loading; 1 disables it.
    int presmooth_width = 5;
};

/// Ground-truth CSV: header `t,target_id,x,y`, SI units, `#` comments.
std::vector<TargetTrajectory> parse_ground_truth(std::istream& in, const GroundTruthOptions& opts = {});
std::vector<TargetTrajectory> load_ground_truth(const std::filesystem::path& path,
                                                const GroundTruthOptions& opts = {});
void write_ground_truth(std::ostream& out, const std::vector<TargetTrajectory>& trajectories);

} // namespace angvel
