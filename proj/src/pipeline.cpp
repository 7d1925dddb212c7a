// SPDX-License-Identifier: Apache-2.0
#include "angvel/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "angvel/errors.hpp"

namespace angvel {

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const ValidationError&) {
        throw;
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
}

double clamp_time(const TargetTrajectory& tr, double t)
{
    return std::clamp(t, tr.t_begin(), tr.t_end());
}

/// Matches detected tracks to truth targets by mean |mask centre - expected Doppler|.
std::vector<int> match_tracks(const DecomposedResponse& dec, const std::vector<TargetTrajectory>& truth,
                              const ArrayGeometry& geom, const ShiftOptions& shifts, const RealVector& times)
{
    const int nt = int(dec.n_tracks());
    const int ng = int(truth.size());
    std::vector<int> out(std::size_t(nt), -1);
    if (nt == 0 || ng == 0)
        return out;
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(nt, ng);
    for (int g = 0; g < ng; ++g) {
        for (Eigen::Index j = 0; j < times.size(); ++j) {
            const double f = expected_shifts(truth[std::size_t(g)], geom, clamp_time(truth[std::size_t(g)], times[j]),
                                             shifts)
                                 .doppler_hz;
            for (int t = 0; t < nt; ++t)
                cost(t, g) += std::abs(dec.mask_center_hz[std::size_t(t)][std::size_t(j)] - f);
        }
    }
    if (nt <= ng) {
        out = solve_assignment(cost);
    } else {
        const std::vector<int> cols = solve_assignment(cost.transpose());
        for (int g = 0; g < ng; ++g)
            out[std::size_t(cols[std::size_t(g)])] = g;
    }
    return out;
}

} // namespace

ProcessResult process_capture(const IqCapture& capture, const ArrayGeometry& geom, const ProcessingConfig& cfg,
                              const std::vector<TargetTrajectory>& truth, std::optional<int> n_targets)
{
    capture.validate();
    geom.validate();
    const int n = n_targets.value_or(int(truth.size()));
    if (n < 0)
        throw ValidationError("process: negative target count");
    if (cfg.mode == FrequencyMode::Known && int(truth.size()) < n)
        throw ValidationError("process: known-frequency mode needs ground truth for every target");

    ProcessResult res;
    res.mode = cfg.mode;
    const IqCapture hp = stage("highpass", [&] { return highpass(capture, cfg.highpass); });
    stage("stft", [&] {
        res.doppler[0] = stft(hp.ch1, hp.sample_rate_hz, cfg.decomp.stft, hp.t0_s, "doppler_rx1");
        res.doppler[1] = stft(hp.ch2, hp.sample_rate_hz, cfg.decomp.stft, hp.t0_s, "doppler_rx2");
        res.interferometric = interferometric_stft(hp, cfg.decomp.stft, cfg.decomp.zero_pad);
        res.interferometric.label = "interferometric";
        return 0;
    });

    const DopplerOracle known = [&](std::size_t i, double t) -> std::array<double, 2> {
        const auto& tr = truth[i];
        const ExpectedShifts s = expected_shifts(tr, geom, clamp_time(tr, t), cfg.shifts);
        return {s.doppler_hz, s.doppler_rx2_hz};
    };
    res.decomposed = stage("decompose", [&] {
        return decompose_maps(res.doppler[0], res.doppler[1], cfg.decomp, n, cfg.mode, known);
    });

    std::vector<int> truth_index(std::size_t(n), -1);
    if (cfg.mode == FrequencyMode::Known) {
        for (int t = 0; t < n; ++t)
            truth_index[std::size_t(t)] = t;
    } else {
        truth_index = stage("associate", [&] {
            return match_tracks(res.decomposed, truth, geom, cfg.shifts, res.doppler[0].frame_times_s);
        });
    }

    stage("estimate", [&] {
        for (int t = 0; t < n; ++t) {
            TrackReport rep;
            rep.track_id = t;
            rep.truth_index = truth_index[std::size_t(t)];
            const TargetTrajectory* tr = rep.truth_index >= 0 ? &truth[std::size_t(rep.truth_index)] : nullptr;
            if (tr)
                rep.target_id = tr->target_id;

            EstimateSeries f = peak_track(res.decomposed.tracks[std::size_t(t)], cfg.floor_db,
                                          &res.decomposed.frame_valid[std::size_t(t)], t);
            OmegaOptions oo;
            if (cfg.full_cos_form && tr) {
                std::vector<double> theta;
                for (const auto& p : f.points)
                    theta.push_back(kinematics_at(*tr, geom, clamp_time(*tr, p.t_s), cfg.shifts.kinematics).theta_rad[0]);
                oo.theta_rad = std::move(theta);
            }
            rep.raw = to_omega(f, geom, oo);
            rep.smoothed = smooth(rep.raw, cfg.smooth_frames);
            if (tr) {
                const TruthSeries ts = truth_omega(*tr, geom, cfg.shifts.kinematics);
                try {
                    rep.stats_raw = stats(rep.raw, ts);
                    rep.stats_smoothed = stats(rep.smoothed, ts);
                } catch (const ValidationError&) {
                    rep.stats_raw.reset();
                    rep.stats_smoothed.reset();
                }
            }
            res.tracks.push_back(std::move(rep));
        }
        return 0;
    });
    return res;
}

} // namespace angvel
