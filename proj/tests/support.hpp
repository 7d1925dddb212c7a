// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "angvel/scenario.hpp"
#include "angvel/scene.hpp"
#include "angvel/synth.hpp"

namespace angvel::test {

inline ArrayGeometry geom40()
{
    return ArrayGeometry::centered_wavelengths(40e9, 20.0);
}

inline TargetTrajectory sampled(const TrajectorySpec& spec, int id, double t0, double t1, double rate,
                                double amplitude = 1.0)
{
    TargetSpec ts;
    ts.id = id;
    ts.amplitude = amplitude;
    ts.trajectory = spec;
    return sample_target(ts, t0, t1, rate, ".");
}

inline TargetTrajectory polar(int id, double r, double rdot, double b, double bdot, double t0, double t1,
                              double rate = 1920.0, double amplitude = 1.0, double t_ref = 0.0)
{
    return sampled(PolarSpec{r, rdot, b, bdot, t_ref}, id, t0, t1, rate, amplitude);
}

inline TargetTrajectory line(int id, Vec2 start, Vec2 vel, double t0, double t1, double rate = 1920.0,
                             double amplitude = 1.0)
{
    return sampled(LineSpec{start, vel}, id, t0, t1, rate, amplitude);
}

/// Noise-free, DC-free scene with the given trajectories.
inline Scene clean_scene(std::vector<TargetTrajectory> trajs, double duration_s,
                         AntennaPattern pattern = AntennaPattern::isotropic())
{
    Scene s;
    s.geometry = geom40();
    s.pattern = pattern;
    s.waveform.duration_s = duration_s;
    s.waveform.snr_db.reset();
    s.waveform.dc_offset = {Complex(0.0, 0.0), Complex(0.0, 0.0)};
    for (auto& t : trajs)
        s.targets.push_back({std::move(t), {}});
    return s;
}

inline ComplexVector tone(double freq_hz, double fs, std::size_t n, double amp = 1.0, double phase = 0.0)
{
    ComplexVector x(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
        x[Eigen::Index(k)] = std::polar(amp, 2.0 * kPi * freq_hz * double(k) / fs + phase);
    return x;
}

inline double rel_diff(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

} // namespace angvel::test
