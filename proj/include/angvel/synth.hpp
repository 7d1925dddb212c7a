// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "angvel/scene.hpp"
#include "angvel/types.hpp"

namespace angvel {

/// Complex voltage pattern A(theta) of each receive element.
struct AntennaPattern {
    enum class Kind { Isotropic, GaussianBeam };

    Kind kind = Kind::GaussianBeam;
    double beamwidth_rad = deg2rad(30.0); ///< two-sided 3 dB (power) width
    double boresight_rad = 0.0;

    static AntennaPattern isotropic() { return {Kind::Isotropic, 0.0, 0.0}; }

    Complex gain(double theta_rad) const;
    void validate() const;
};

/// Platform vibration modelled as phase modulation depth*sin(2 pi f t + phase).
struct VibrationTone {
    double freq_hz = 0.0;
    double depth_rad = 0.0;
    double phase_rad = 0.0;
};

struct WaveformConfig {
    double sample_rate_hz = 1920.0;
    double duration_s = 0.0;
    double t0_s = 0.0;
    /// Noise relative to the strongest single target; nullopt disables noise.
    std::optional<double> snr_db;
    std::array<Complex, 2> dc_offset{Complex(0.01, 0.0), Complex(0.01, 0.0)};
    std::uint64_t rng_seed = 0;

    std::size_t n_samples() const;
    double sample_time(std::size_t k) const { return t0_s + double(k) / sample_rate_hz; }
    void validate() const;
};

struct SceneTarget {
    TargetTrajectory trajectory;
    std::vector<VibrationTone> vibration;
};

struct Scene {
    ArrayGeometry geometry;
    AntennaPattern pattern;
    WaveformConfig waveform;
    std::vector<SceneTarget> targets;
};

/// Two-channel complex baseband capture.
struct IqCapture {
    ComplexVector ch1;
    ComplexVector ch2;
    double sample_rate_hz = 0.0;
    double t0_s = 0.0;

    std::size_t size() const { return std::size_t(ch1.size()); }
    double duration_s() const { return double(size()) / sample_rate_hz; }
    void validate() const;
};

using WarningSink = std::function<void(std::string_view)>;

/// ch_i(t_k) = sum_n a_n A(theta_i,n) exp(-j 2 pi f_c tau_i,n) + noise + dc_i.
IqCapture synthesize(const Scene& scene, const WarningSink& warn = {});

/// Scales ch_i by 10^(gain_db/20) exp(j phase_rad).
IqCapture add_channel_imbalance(IqCapture capture, std::array<double, 2> gain_db,
                                std::array<double, 2> phase_rad);

} // namespace angvel
