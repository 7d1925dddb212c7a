// SPDX-License-Identifier: Apache-2.0
#include "angvel/model.hpp"

#include <algorithm>
#include <cmath>

#include "angvel/errors.hpp"

namespace angvel {

PointState point_state(const KinematicState& kin, double amplitude)
{
    PointState p;
    p.v_radial_mps = kin.v_radial_mps[0];
    p.omega_radps = kin.omega_radps[0];
    p.theta_rad = kin.theta_rad;
    p.amplitude = amplitude;
    return p;
}

double line_frequency(const PointState& n, const PointState& k, const ArrayGeometry& geom)
{
    const double dv = n.v_radial_mps - k.v_radial_mps;
    return -2.0 * dv / geom.wavelength_m + k.omega_radps * geom.baseline_m / geom.wavelength_m;
}

namespace {

bool degraded(std::span<const PointState> points)
{
    for (const auto& p : points)
        for (double th : p.theta_rad)
            if (std::abs(th) > kSmallAngleLimitRad)
                return true;
    return false;
}

void check_points(std::span<const PointState> points)
{
    if (points.empty())
        throw ValidationError("response lines: empty point list");
    for (const auto& p : points) {
        if (!std::isfinite(p.v_radial_mps) || !std::isfinite(p.omega_radps) || !std::isfinite(p.amplitude) ||
            !std::isfinite(p.theta_rad[0]) || !std::isfinite(p.theta_rad[1]))
            throw ValidationError("response lines: non-finite point state");
        if (std::abs(p.theta_rad[0]) >= kPi / 2 || std::abs(p.theta_rad[1]) >= kPi / 2)
            throw ValidationError("response lines: |theta| must be below pi/2");
    }
}

} // namespace

LineList full_response_lines(std::span<const PointState> points, const ArrayGeometry& geom,
                             const AntennaPattern& pattern)
{
    check_points(points);
    LineList out;
    out.approximation_degraded = degraded(points);
    const int n_pts = int(points.size());
    out.lines.reserve(std::size_t(n_pts * n_pts));
    for (int n = 0; n < n_pts; ++n) {
        for (int k = 0; k < n_pts; ++k) {
            const auto& pn = points[std::size_t(n)];
            const auto& pk = points[std::size_t(k)];
            SpectralLine l;
            l.freq_hz = line_frequency(pn, pk, geom);
            l.amplitude = pn.amplitude * pk.amplitude * pattern.gain(pn.theta_rad[0]) *
                          std::conj(pattern.gain(pk.theta_rad[1]));
            l.kind = n == k ? LineKind::Self : LineKind::Cross;
            l.n = n;
            l.k = k;
            out.lines.push_back(l);
        }
    }
    return out;
}

LineList decomposed_response_lines(std::span<const PointState> points, const ArrayGeometry& geom,
                                   const AntennaPattern& pattern)
{
    check_points(points);
    LineList out;
    out.approximation_degraded = degraded(points);
    for (int n = 0; n < int(points.size()); ++n) {
        const auto& p = points[std::size_t(n)];
        SpectralLine l;
        l.freq_hz = line_frequency(p, p, geom);
        l.amplitude = p.amplitude * p.amplitude * std::norm(pattern.gain(p.theta_rad[0]));
        l.kind = LineKind::Self;
        l.n = n;
        l.k = n;
        out.lines.push_back(l);
    }
    return out;
}

std::pair<std::size_t, std::size_t> line_count_check(std::size_t n_points)
{
    return {n_points, n_points * (n_points == 0 ? 0 : n_points - 1)};
}

FrequencyGrid FrequencyGrid::of(const TimeFrequencyMap& tf)
{
    return {tf.freq_axis_hz[0], tf.bin_hz(), tf.n_bins()};
}

double LineKernel::operator()(double df_hz) const
{
    const double nu = df_hz / native_bin_hz();
    if (std::abs(nu) > support_bins)
        return 0.0;
    return std::abs(window_dtft(window, window_len, nu)) / std::abs(window_dtft(window, window_len, 0.0));
}

RealVector rasterize_lines(std::span<const SpectralLine> lines, const FrequencyGrid& grid, const LineKernel& kernel)
{
    std::vector<std::pair<double, double>> order;
    order.reserve(lines.size());
    for (const auto& l : lines)
        order.emplace_back(l.freq_hz, std::abs(l.amplitude));
    std::sort(order.begin(), order.end());

    RealVector out = RealVector::Zero(grid.size);
    const double reach_hz = kernel.support_bins * kernel.native_bin_hz();
    for (const auto& [f, amp] : order) {
        const int lo = std::max(0, int(std::ceil((f - reach_hz - grid.f0_hz) / grid.step_hz)));
        const int hi = std::min(grid.size - 1, int(std::floor((f + reach_hz - grid.f0_hz) / grid.step_hz)));
        for (int i = lo; i <= hi; ++i)
            out[i] += amp * kernel(grid.at(i) - f);
    }
    return out;
}

} // namespace angvel
