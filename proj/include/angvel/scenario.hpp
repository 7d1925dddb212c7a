// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "angvel/decomp.hpp"
#include "angvel/dsp.hpp"
#include "angvel/scene.hpp"
#include "angvel/synth.hpp"

namespace angvel {

inline constexpr int kScenarioSchemaVersion = 1;

/// Straight line: position `start_m` at t = 0, constant velocity.
struct LineSpec {
    Vec2 start_m = Vec2::Zero();
    Vec2 velocity_mps = Vec2::Zero();
};

/// Circle about `center_m`; bearing measured from +y, clockwise positive.
struct CircleSpec {
    Vec2 center_m = Vec2::Zero();
    double radius_m = 1.0;
    double start_bearing_rad = 0.0;
    double rate_radps = 0.0;
};

/// Constant range rate and bearing rate about the origin, referenced at `t_ref_s`.
struct PolarSpec {
    double range_m = 1.0;
    double range_rate_mps = 0.0;
    double bearing_rad = 0.0;
    double bearing_rate_radps = 0.0;
    double t_ref_s = 0.0;
};

/// Samples of one target taken from a ground-truth CSV.
struct WaypointSpec {
    std::filesystem::path path;
    int target_id = 0;
};

using TrajectorySpec = std::variant<LineSpec, CircleSpec, PolarSpec, WaypointSpec>;

Vec2 evaluate(const LineSpec& s, double t);
Vec2 evaluate(const CircleSpec& s, double t);
Vec2 evaluate(const PolarSpec& s, double t);

struct TargetSpec {
    int id = 0;
    double amplitude = 1.0;
    TrajectorySpec trajectory;
    std::vector<VibrationTone> vibration;
};

struct ProcessingConfig {
    HighpassConfig highpass{};
    DecompConfig decomp{};
    FrequencyMode mode = FrequencyMode::Known;
    double floor_db = -20.0;
    int smooth_frames = 60;
    bool full_cos_form = false;
    ShiftOptions shifts{};
    GroundTruthOptions truth{};
};

struct Scenario {
    std::string name;
    ArrayGeometry geometry;
    AntennaPattern pattern;
    WaveformConfig waveform;
    std::array<double, 2> imbalance_gain_db{0.0, 0.0};
    std::array<double, 2> imbalance_phase_rad{0.0, 0.0};
    double truth_rate_hz = 120.0;
    std::vector<TargetSpec> targets;
    ProcessingConfig processing;
    std::filesystem::path base_dir;
    std::string canonical_json; ///< normalised scene text (no processing block), input to the hash
};

/// Parses scenario JSON text; relative paths resolve against `base_dir`.
Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

/// 16 hex digits (FNV-1a 64) of the canonical scene description (processing excluded).
std::string scenario_hash(const Scenario& scenario);

/// Samples one target over [t_begin, t_end] at `rate_hz` (parametric kinds)
/// or loads it verbatim (waypoint kind).
TargetTrajectory sample_target(const TargetSpec& spec, double t_begin, double t_end, double rate_hz,
                               const std::filesystem::path& base_dir);

/// Trajectories sampled at the capture rate, ready for synthesis.
Scene build_scene(const Scenario& scenario);

/// Trajectories sampled at the ground-truth rate.
std::vector<TargetTrajectory> truth_trajectories(const Scenario& scenario);

/// Synthesises the scenario and applies its channel imbalance.
IqCapture simulate(const Scenario& scenario, const WarningSink& warn = {});

FrequencyMode frequency_mode_from_string(const std::string& s);
std::string to_string(FrequencyMode mode);

} // namespace angvel
