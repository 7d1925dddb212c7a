// SPDX-License-Identifier: Apache-2.0
#include "angvel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "angvel/errors.hpp"

namespace angvel {

Complex AntennaPattern::gain(double theta_rad) const
{
    if (kind == Kind::Isotropic)
        return {1.0, 0.0};
    const double u = (theta_rad - boresight_rad) / beamwidth_rad;
    // |A|^2 = 1/2 at +-beamwidth/2
    return {std::exp(-2.0 * std::log(2.0) * u * u), 0.0};
}

void AntennaPattern::validate() const
{
    if (kind == Kind::GaussianBeam && !(beamwidth_rad > 0.0))
        throw ValidationError("antenna pattern: beamwidth must be positive");
}

std::size_t WaveformConfig::n_samples() const
{
    return std::size_t(std::llround(sample_rate_hz * duration_s));
}

void WaveformConfig::validate() const
{
    if (!(sample_rate_hz > 0.0))
        throw ValidationError("waveform: sample rate must be positive");
    if (!(duration_s > 0.0) || !std::isfinite(duration_s))
        throw ValidationError("waveform: duration must be positive");
    if (n_samples() == 0)
        throw ValidationError("waveform: duration shorter than one sample");
    for (const auto& d : dc_offset)
        if (!std::isfinite(d.real()) || !std::isfinite(d.imag()))
            throw ValidationError("waveform: non-finite dc offset");
    if (snr_db && !std::isfinite(*snr_db))
        throw ValidationError("waveform: non-finite snr");
}

void IqCapture::validate() const
{
    if (ch1.size() != ch2.size())
        throw ValidationError("capture: channel lengths differ");
    if (!(sample_rate_hz > 0.0))
        throw ValidationError("capture: sample rate must be positive");
    if (!ch1.allFinite() || !ch2.allFinite())
        throw NumericError("capture: non-finite samples");
}

IqCapture synthesize(const Scene& scene, const WarningSink& warn)
{
    const auto& wf = scene.waveform;
    const auto& geom = scene.geometry;
    wf.validate();
    geom.validate();
    scene.pattern.validate();

    const std::size_t n = wf.n_samples();
    const double t_last = wf.sample_time(n - 1);
    constexpr double kTimeSlack = 1e-9;

    IqCapture cap;
    cap.sample_rate_hz = wf.sample_rate_hz;
    cap.t0_s = wf.t0_s;
    cap.ch1 = ComplexVector::Zero(Eigen::Index(n));
    cap.ch2 = ComplexVector::Zero(Eigen::Index(n));

    double reference_power = 0.0;
    double min_range = std::numeric_limits<double>::infinity();
    ComplexVector term1(static_cast<Eigen::Index>(n)), term2(static_cast<Eigen::Index>(n));

    for (const auto& target : scene.targets) {
        const auto& traj = target.trajectory;
        traj.validate();
        if (traj.t_begin() > wf.t0_s + kTimeSlack || traj.t_end() < t_last - kTimeSlack)
            throw ValidationError("trajectory " + std::to_string(traj.target_id) +
                                  " does not cover the capture interval (coverage gap)");

        double prev_cycles[2] = {0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const double t = std::clamp(wf.sample_time(k), traj.t_begin(), traj.t_end());
            const KinematicState g = geometry_at(traj.position_at(t), geom);
            double extra_phase = 0.0;
            for (const auto& v : target.vibration)
                extra_phase += v.depth_rad * std::sin(2.0 * kPi * v.freq_hz * t + v.phase_rad);

            for (int i = 0; i < 2; ++i) {
                min_range = std::min(min_range, g.range_m[i]);
                // f_c * tau in cycles; only the fractional part matters
                const double cycles = (g.range_tx_m + g.range_m[i]) / geom.wavelength_m;
                if (k > 0 && std::abs(cycles - prev_cycles[i]) >= 0.5)
                    throw ValidationError("sample rate does not exceed twice the Doppler of target " +
                                          std::to_string(traj.target_id));
                prev_cycles[i] = cycles;
                const double phase = -2.0 * kPi * (cycles - std::floor(cycles)) + extra_phase;
                const Complex value = traj.amplitude * scene.pattern.gain(g.theta_rad[i]) * std::polar(1.0, phase);
                (i == 0 ? term1 : term2)[Eigen::Index(k)] = value;
            }
        }
        if (!term1.allFinite() || !term2.allFinite())
            throw NumericError("synthesis produced non-finite samples for target " +
                               std::to_string(traj.target_id));
        cap.ch1 += term1;
        cap.ch2 += term2;
        reference_power = std::max(reference_power, term1.squaredNorm() / double(n));
    }

    if (warn && !scene.targets.empty() && min_range < 10.0 * geom.baseline_m)
        warn("far-field condition violated: minimum range " + std::to_string(min_range) +
             " m is below 10 baselines");

    cap.ch1.array() += wf.dc_offset[0];
    cap.ch2.array() += wf.dc_offset[1];

    if (wf.snr_db) {
        if (scene.targets.empty())
            reference_power = 1.0;
        const double sigma = std::sqrt(reference_power / std::pow(10.0, *wf.snr_db / 10.0) / 2.0);
        std::mt19937_64 rng(wf.rng_seed);
        std::normal_distribution<double> normal(0.0, sigma);
        for (std::size_t k = 0; k < n; ++k) {
            const double a = normal(rng), b = normal(rng), c = normal(rng), d = normal(rng);
            cap.ch1[Eigen::Index(k)] += Complex(a, b);
            cap.ch2[Eigen::Index(k)] += Complex(c, d);
        }
    }
    return cap;
}

IqCapture add_channel_imbalance(IqCapture capture, std::array<double, 2> gain_db, std::array<double, 2> phase_rad)
{
    for (int i = 0; i < 2; ++i) {
        if (!std::isfinite(gain_db[i]) || !std::isfinite(phase_rad[i]))
            throw ValidationError("channel imbalance: non-finite parameter");
        const Complex scale = std::polar(std::pow(10.0, gain_db[i] / 20.0), phase_rad[i]);
        (i == 0 ? capture.ch1 : capture.ch2) *= scale;
    }
    return capture;
}

} // namespace angvel
