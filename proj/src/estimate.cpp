// SPDX-License-Identifier: Apache-2.0
#include "angvel/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "angvel/errors.hpp"

namespace angvel {

std::size_t EstimateSeries::n_valid() const
{
    return std::size_t(std::count_if(points.begin(), points.end(), [](const EstimatePoint& p) { return p.valid; }));
}

EstimateSeries peak_track(const TimeFrequencyMap& response, double floor_db, const std::vector<char>* frame_valid,
                          int track_id)
{
    const int n = response.n_frames();
    if (frame_valid && int(frame_valid->size()) != n)
        throw ValidationError("peak_track: validity flags do not match frame count");
    if (!std::isfinite(floor_db) || floor_db > 0.0)
        throw ValidationError("peak_track: floor must be a finite, non-positive dB value");

    EstimateSeries out;
    out.track_id = track_id;
    std::vector<SpectralPeak> peaks;
    double global = 0.0;
    for (int j = 0; j < n; ++j) {
        peaks.push_back(find_peak(response.frames.row(j).transpose(), response.freq_axis_hz));
        if (!frame_valid || (*frame_valid)[std::size_t(j)])
            global = std::max(global, peaks.back().magnitude);
    }
    const double floor_mag = global * std::pow(10.0, floor_db / 20.0);
    for (int j = 0; j < n; ++j) {
        EstimatePoint p;
        p.t_s = response.frame_times_s[j];
        p.f_hz = peaks[std::size_t(j)].freq_hz;
        const bool flagged = frame_valid && !(*frame_valid)[std::size_t(j)];
        const double mag = peaks[std::size_t(j)].magnitude;
        p.valid = !flagged && global > 0.0 && mag >= floor_mag && std::isfinite(p.f_hz);
        out.points.push_back(p);
    }
    return out;
}

EstimateSeries smooth(const EstimateSeries& series, int window_frames)
{
    if (window_frames < 1)
        throw ValidationError("smooth: window must be >= 1 frame");
    const int n = int(series.points.size());
    const int before = (window_frames - 1) / 2;
    const int after = window_frames / 2;
    EstimateSeries out = series;
    for (int i = 0; i < n; ++i) {
        if (!series.points[std::size_t(i)].valid)
            continue;
        double sf = 0.0, sw = 0.0;
        int count = 0;
        for (int k = std::max(0, i - before); k <= std::min(n - 1, i + after); ++k) {
            const auto& p = series.points[std::size_t(k)];
            if (!p.valid)
                continue;
            sf += p.f_hz;
            sw += p.omega_radps;
            ++count;
        }
        out.points[std::size_t(i)].f_hz = sf / count;
        out.points[std::size_t(i)].omega_radps = sw / count;
    }
    return out;
}

EstimateSeries to_omega(const EstimateSeries& series, const ArrayGeometry& geom, const OmegaOptions& opts)
{
    geom.validate();
    if (opts.theta_rad && opts.theta_rad->size() != series.points.size())
        throw ValidationError("to_omega: angle list does not match series length");
    EstimateSeries out = series;
    const double scale = geom.wavelength_m / geom.baseline_m;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        auto& p = out.points[i];
        if (!p.valid)
            continue;
        double w = p.f_hz * scale;
        if (opts.theta_rad) {
            const double c = std::cos((*opts.theta_rad)[i]);
            if (std::abs(c) < 1e-6)
                throw NumericError("to_omega: angle too close to endfire");
            w /= c;
        }
        p.omega_radps = w;
    }
    return out;
}

std::optional<double> TruthSeries::at(double t) const
{
    if (t_s.empty() || t < t_s.front() || t > t_s.back())
        return std::nullopt;
    if (t_s.size() == 1)
        return omega_radps.front();
    auto it = std::upper_bound(t_s.begin(), t_s.end(), t);
    std::size_t hi = std::size_t(it - t_s.begin());
    if (hi >= t_s.size())
        return omega_radps.back();
    const std::size_t lo = hi - 1;
    const double a = (t - t_s[lo]) / (t_s[hi] - t_s[lo]);
    return omega_radps[lo] + a * (omega_radps[hi] - omega_radps[lo]);
}

TruthSeries truth_omega(const TargetTrajectory& traj, const ArrayGeometry& geom, const KinematicsOptions& opts)
{
    traj.validate();
    TruthSeries out;
    for (const auto& s : traj.samples) {
        out.t_s.push_back(s.t);
        out.omega_radps.push_back(kinematics_at(traj, geom, s.t, opts).omega_radps[0]);
    }
    return out;
}

EstimateStats stats(const EstimateSeries& est, const TruthSeries& truth)
{
    EstimateStats out;
    std::vector<double> e;
    double sum_true = 0.0;
    for (const auto& p : est.points) {
        if (!p.valid)
            continue;
        const auto w = truth.at(p.t_s);
        if (!w)
            continue;
        sum_true += *w;
        e.push_back(p.omega_radps);
    }
    if (e.empty())
        throw ValidationError("stats: no valid frames overlap the ground truth");
    const double n = double(e.size());
    double mean = 0.0;
    for (double v : e)
        mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : e)
        ss += (v - mean) * (v - mean);
    out.mu_true_radps = sum_true / n;
    out.mu_est_radps = mean;
    out.std_radps = e.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.n_valid_frames = e.size();
    return out;
}

} // namespace angvel
