// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "angvel/dsp.hpp"
#include "angvel/scene.hpp"
#include "angvel/synth.hpp"

namespace angvel {

/// Per-target quantities entering the closed-form interferometric spectrum.
/// Radial velocity is the RX1 half-path range rate (negative = approaching).
struct PointState {
    double v_radial_mps = 0.0;
    double omega_radps = 0.0;
    std::array<double, 2> theta_rad{};
    double amplitude = 1.0;
};

PointState point_state(const KinematicState& kin, double amplitude);

enum class LineKind { Self, Cross };

struct SpectralLine {
    double freq_hz = 0.0;
    Complex amplitude;
    LineKind kind = LineKind::Self;
    int n = 0;
    int k = 0;
};

struct LineList {
    std::vector<SpectralLine> lines;
    /// Set when some |theta| exceeds the small-angle validity limit.
    bool approximation_degraded = false;
};

inline constexpr double kSmallAngleLimitRad = 0.35;

/// f_{n,k} = (f_D,n - f_D,k) + omega_k D / lambda, with f_D = -2 v_r / lambda.
double line_frequency(const PointState& n, const PointState& k, const ArrayGeometry& geom);

/// All N^2 self and cross lines of ch1 * conj(ch2); lines are not merged.
LineList full_response_lines(std::span<const PointState> points, const ArrayGeometry& geom,
                             const AntennaPattern& pattern);

/// The N ideal self lines, amplitude |A(theta_1,n)|^2 a_n^2.
LineList decomposed_response_lines(std::span<const PointState> points, const ArrayGeometry& geom,
                                   const AntennaPattern& pattern);

/// (N, N(N-1)).
std::pair<std::size_t, std::size_t> line_count_check(std::size_t n_points);

/// Regular frequency grid f0 + i*step, i in [0, size).
struct FrequencyGrid {
    double f0_hz = 0.0;
    double step_hz = 1.0;
    int size = 0;

    static FrequencyGrid of(const TimeFrequencyMap& tf);
    double at(int i) const { return f0_hz + step_hz * double(i); }
};

/// Spectral kernel a finite observation window imprints on a line.
struct LineKernel {
    WindowKind window = WindowKind::Hann;
    int window_len = 1024;
    double sample_rate_hz = 1920.0;
    double support_bins = 4.0; ///< truncation, in native bins (fs / window_len)

    double native_bin_hz() const { return sample_rate_hz / double(window_len); }
    /// Normalised |W(df)| / W(0).
    double operator()(double df_hz) const;
};

/// Incoherent rasterisation: sum over lines of |amp| * kernel(f - f_line).
/// Lines are accumulated in (freq, |amp|) order, so relabelling the input
/// produces a bit-identical result.
RealVector rasterize_lines(std::span<const SpectralLine> lines, const FrequencyGrid& grid,
                           const LineKernel& kernel);

} // namespace angvel
