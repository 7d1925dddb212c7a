// SPDX-License-Identifier: Apache-2.0
#include "angvel/modelfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "angvel/errors.hpp"

namespace angvel {

std::vector<double> GridAxis::values() const
{
    if (!(step > 0.0) || !(max >= min))
        throw ValidationError("grid axis needs step > 0 and max >= min");
    const auto n = std::size_t(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = min + double(i) * step;
    return v;
}

void FitConfig::validate() const
{
    (void)omega.values();
    (void)v_radial.values();
    if (!(min_step > 0.0))
        throw ValidationError("fit: min_step must be positive");
    if (max_iterations < 0)
        throw ValidationError("fit: max_iterations must be non-negative");
}

ObservedSpectrum observed_frame(const TimeFrequencyMap& tf, int frame)
{
    if (frame < 0 || frame >= tf.n_frames())
        throw RangeError("observed_frame: frame index out of range");
    ObservedSpectrum obs;
    obs.magnitude = tf.frames.row(frame).cwiseAbs().transpose();
    obs.grid = FrequencyGrid::of(tf);
    obs.kernel = LineKernel{tf.window, tf.window_len, tf.sample_rate_hz};
    return obs;
}

namespace {

std::vector<PointState> to_points(const FitParams& params)
{
    if (params.v_radial_mps.size() != params.omega_radps.size())
        throw ValidationError("fit: parameter vectors differ in length");
    std::vector<PointState> pts(params.v_radial_mps.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        pts[i].v_radial_mps = params.v_radial_mps[i];
        pts[i].omega_radps = params.omega_radps[i];
    }
    return pts;
}

constexpr int kTableOversample = 256;

/// Rasterises the line model with a tabulated kernel and scores it against
/// the observation over the touched bins only.
class Evaluator {
public:
    Evaluator(const ObservedSpectrum& obs, const ArrayGeometry& geom) : obs_(obs), geom_(geom)
    {
        if (obs.magnitude.size() == 0 || obs.magnitude.size() != obs.grid.size)
            throw ValidationError("fit: empty or inconsistent observed spectrum");
        reach_hz_ = obs.kernel.support_bins * obs.kernel.native_bin_hz();
        h_ = obs.kernel.native_bin_hz() / kTableOversample;
        const int n = int(std::ceil(2.0 * reach_hz_ / h_)) + 2;
        table_.resize(std::size_t(n));
        for (int i = 0; i < n; ++i)
            table_[std::size_t(i)] = obs.kernel(-reach_hz_ + double(i) * h_);
        oo_ = obs.magnitude.squaredNorm();
        model_ = RealVector::Zero(obs.grid.size);
        mark_.assign(std::size_t(obs.grid.size), 0);
    }

    double loss(const FitParams& params)
    {
        rasterize(params);
        std::sort(touched_.begin(), touched_.end());
        double os = 0.0, ss = 0.0;
        for (int i : touched_) {
            os += obs_.magnitude[i] * model_[i];
            ss += model_[i] * model_[i];
        }
        clear();
        if (!(ss > 0.0) || os <= 0.0)
            return oo_;
        return std::max(0.0, oo_ - os * os / ss);
    }

    RealVector spectrum(const FitParams& params)
    {
        rasterize(params);
        RealVector out = model_;
        clear();
        return out;
    }

private:
    double kernel(double df) const
    {
        const double u = (df + reach_hz_) / h_;
        if (u < 0.0 || u > double(table_.size() - 1))
            return 0.0;
        const auto i = std::min(std::size_t(u), table_.size() - 2);
        const double a = u - double(i);
        return table_[i] + a * (table_[i + 1] - table_[i]);
    }

    void rasterize(const FitParams& params)
    {
        const auto pts = to_points(params);
        const LineList lines = full_response_lines(pts, geom_, AntennaPattern::isotropic());
        order_.clear();
        for (const auto& l : lines.lines)
            order_.emplace_back(l.freq_hz, std::abs(l.amplitude));
        std::sort(order_.begin(), order_.end());
        const FrequencyGrid& g = obs_.grid;
        for (const auto& [f, amp] : order_) {
            const int lo = std::max(0, int(std::ceil((f - reach_hz_ - g.f0_hz) / g.step_hz)));
            const int hi = std::min(g.size - 1, int(std::floor((f + reach_hz_ - g.f0_hz) / g.step_hz)));
            for (int i = lo; i <= hi; ++i) {
                model_[i] += amp * kernel(g.at(i) - f);
                if (!mark_[std::size_t(i)]) {
                    mark_[std::size_t(i)] = 1;
                    touched_.push_back(i);
                }
            }
        }
    }

    void clear()
    {
        for (int i : touched_) {
            model_[i] = 0.0;
            mark_[std::size_t(i)] = 0;
        }
        touched_.clear();
    }

    const ObservedSpectrum& obs_;
    const ArrayGeometry& geom_;
    double reach_hz_ = 0.0;
    double h_ = 0.0;
    double oo_ = 0.0;
    std::vector<double> table_;
    RealVector model_;
    std::vector<char> mark_;
    std::vector<int> touched_;
    std::vector<std::pair<double, double>> order_;
};

} // namespace

RealVector model_spectrum(const FitParams& params, const ArrayGeometry& geom, const ObservedSpectrum& like)
{
    return Evaluator(like, geom).spectrum(params);
}

double fit_loss(const ObservedSpectrum& obs, const FitParams& params, const ArrayGeometry& geom)
{
    return Evaluator(obs, geom).loss(params);
}

namespace {

struct Candidate {
    std::vector<double> free; ///< v_1..v_{N-1}, omega_1..omega_N
    double loss = std::numeric_limits<double>::infinity();
};

FitParams expand(const std::vector<double>& free, int n, double mean_v)
{
    FitParams p;
    double sum = 0.0;
    for (int i = 0; i < n - 1; ++i) {
        p.v_radial_mps.push_back(free[std::size_t(i)]);
        sum += free[std::size_t(i)];
    }
    p.v_radial_mps.push_back(double(n) * mean_v - sum);
    for (int i = 0; i < n; ++i)
        p.omega_radps.push_back(free[std::size_t(n - 1 + i)]);
    return p;
}

bool better(const Candidate& a, const Candidate& b)
{
    if (a.loss != b.loss)
        return a.loss < b.loss;
    return a.free < b.free;
}

} // namespace

FitResult fit(const ObservedSpectrum& obs, int n_targets, const ArrayGeometry& geom, const FitConfig& cfg)
{
    cfg.validate();
    geom.validate();
    if (n_targets < 1 || n_targets > 3)
        throw ValidationError("fit: target count must be 1..3");
    Evaluator eval(obs, geom);

    const std::vector<double> vs = cfg.v_radial.values();
    const std::vector<double> ws = cfg.omega.values();
    const int n_free = 2 * n_targets - 1;
    std::vector<const std::vector<double>*> axes;
    for (int i = 0; i < n_targets - 1; ++i)
        axes.push_back(&vs);
    for (int i = 0; i < n_targets; ++i)
        axes.push_back(&ws);

    double total = 1.0;
    for (const auto* a : axes)
        total *= double(a->size());
    if (total > double(cfg.max_grid_points))
        throw ValidationError("fit: grid exceeds max_grid_points");

    auto loss_of = [&](const std::vector<double>& free) {
        return eval.loss(expand(free, n_targets, cfg.mean_v_radial_mps));
    };

    FitResult res;
    Candidate best;
    std::vector<std::size_t> idx(std::size_t(n_free), 0);
    Candidate cur;
    cur.free.resize(std::size_t(n_free));
    for (;;) {
        for (int i = 0; i < n_free; ++i)
            cur.free[std::size_t(i)] = (*axes[std::size_t(i)])[idx[std::size_t(i)]];
        cur.loss = loss_of(cur.free);
        if (better(cur, best))
            best = cur;
        ++res.grid_points;
        int d = n_free - 1;
        while (d >= 0 && ++idx[std::size_t(d)] == axes[std::size_t(d)]->size()) {
            idx[std::size_t(d)] = 0;
            --d;
        }
        if (d < 0)
            break;
    }
    res.grid_loss = best.loss;
    res.loss_history.push_back(best.loss);

    std::vector<double> steps;
    for (int i = 0; i < n_targets - 1; ++i)
        steps.push_back(cfg.v_radial.step);
    for (int i = 0; i < n_targets; ++i)
        steps.push_back(cfg.omega.step);

    while (res.iterations < cfg.max_iterations) {
        ++res.iterations;
        bool moved = false;
        for (int i = 0; i < n_free; ++i) {
            for (double sign : {1.0, -1.0}) {
                Candidate trial = best;
                trial.free[std::size_t(i)] += sign * steps[std::size_t(i)];
                trial.loss = loss_of(trial.free);
                if (trial.loss < best.loss) {
                    best = trial;
                    res.loss_history.push_back(best.loss);
                    moved = true;
                    break;
                }
            }
        }
        if (moved)
            continue;
        for (double& s : steps)
            s *= 0.5;
        if (*std::max_element(steps.begin(), steps.end()) < cfg.min_step)
            break;
    }

    const FitParams p = expand(best.free, n_targets, cfg.mean_v_radial_mps);
    for (int i = 0; i < n_targets; ++i)
        res.targets.emplace_back(p.v_radial_mps[std::size_t(i)], p.omega_radps[std::size_t(i)]);
    std::sort(res.targets.begin(), res.targets.end());
    res.loss = best.loss;
    return res;
}

} // namespace angvel
