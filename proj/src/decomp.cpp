// SPDX-License-Identifier: Apache-2.0
#include "angvel/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "angvel/errors.hpp"

namespace angvel {

int window_bins(double width_hz, double bin_hz)
{
    return 2 * int(std::floor(0.5 * width_hz / bin_hz + 1e-9)) + 1;
}

namespace {

double axis_step(const RealVector& axis)
{
    if (axis.size() < 2)
        throw ValidationError("frequency axis needs at least two bins");
    return axis[1] - axis[0];
}

/// Exact best placement of n windows (width w bins) over candidate powers.
/// Candidate i corresponds to centre bin h + i.
std::vector<int> place_exact(const std::vector<double>& score, int n, int w)
{
    const int m = int(score.size());
    const double neg = -std::numeric_limits<double>::infinity();
    // best[j][i]: max total of j windows with all candidate indices >= i
    std::vector<std::vector<double>> best(std::size_t(n + 1), std::vector<double>(std::size_t(m + w + 1), neg));
    std::fill(best[0].begin(), best[0].end(), 0.0);
    for (int j = 1; j <= n; ++j) {
        for (int i = m - 1; i >= 0; --i) {
            const double take = score[std::size_t(i)] + best[std::size_t(j - 1)][std::size_t(i + w)];
            best[std::size_t(j)][std::size_t(i)] = std::max(best[std::size_t(j)][std::size_t(i + 1)], take);
        }
    }
    std::vector<int> chosen;
    int i = 0;
    for (int j = n; j > 0 && i < m;) {
        const double take = score[std::size_t(i)] + best[std::size_t(j - 1)][std::size_t(i + w)];
        if (take >= best[std::size_t(j)][std::size_t(i + 1)]) {
            chosen.push_back(i);
            i += w;
            --j;
        } else {
            ++i;
        }
    }
    return chosen;
}

std::vector<int> place_greedy(const std::vector<double>& score, int n, int w)
{
    const int m = int(score.size());
    std::vector<int> chosen;
    for (int j = 0; j < n; ++j) {
        int best = -1;
        for (int i = 0; i < m; ++i) {
            const bool clash = std::any_of(chosen.begin(), chosen.end(), [&](int c) { return std::abs(c - i) < w; });
            if (!clash && (best < 0 || score[std::size_t(i)] > score[std::size_t(best)]))
                best = i;
        }
        if (best < 0)
            break;
        chosen.push_back(best);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    const auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

} // namespace

std::vector<DetectionWindow> detect_frame(std::span<const double> power, const RealVector& freq_axis_hz,
                                          int n_targets, const DetectOptions& opts, int frame_index,
                                          int antenna_id)
{
    const double bin_hz = axis_step(freq_axis_hz);
    const int n_bins = int(power.size());
    if (n_bins != freq_axis_hz.size())
        throw ValidationError("detect: power and axis lengths differ");
    if (n_targets < 1)
        throw ValidationError("detect: n_targets must be >= 1");
    if (opts.width_hz < 2.0 * bin_hz)
        throw ValidationError("detect: window narrower than two bins");
    const int w = window_bins(opts.width_hz, bin_hz);
    if (n_targets * w > n_bins)
        throw ValidationError("detect: n_targets windows do not fit in the band");

    const int h = w / 2;
    std::vector<double> prefix(std::size_t(n_bins + 1), 0.0);
    for (int k = 0; k < n_bins; ++k)
        prefix[std::size_t(k + 1)] = prefix[std::size_t(k)] + power[std::size_t(k)];
    std::vector<double> score(std::size_t(n_bins - 2 * h));
    for (std::size_t i = 0; i < score.size(); ++i)
        score[i] = prefix[i + std::size_t(w)] - prefix[i];

    const std::vector<int> chosen =
        n_targets <= opts.exact_max_targets ? place_exact(score, n_targets, w) : place_greedy(score, n_targets, w);

    const double floor_power = median({power.begin(), power.end()}) * double(w);
    const double threshold = floor_power * std::pow(10.0, opts.min_snr_db / 10.0);

    std::vector<DetectionWindow> out;
    for (int i : chosen) {
        DetectionWindow d;
        d.center_hz = freq_axis_hz[i + h];
        d.width_hz = opts.width_hz;
        d.integrated_power = score[std::size_t(i)];
        d.frame_index = frame_index;
        d.antenna_id = antenna_id;
        d.lo_bin = i;
        d.hi_bin = i + w - 1;
        d.valid = d.integrated_power > 0.0 && d.integrated_power > threshold;
        out.push_back(d);
    }
    return out;
}

std::vector<std::vector<DetectionWindow>> detect_targets(const TimeFrequencyMap& tf, int n_targets,
                                                         const DetectOptions& opts, int antenna_id)
{
    std::vector<std::vector<DetectionWindow>> out;
    std::vector<double> power(std::size_t(tf.n_bins()));
    for (int j = 0; j < tf.n_frames(); ++j) {
        for (int k = 0; k < tf.n_bins(); ++k)
            power[std::size_t(k)] = std::norm(tf.frames(j, k));
        out.push_back(detect_frame(power, tf.freq_axis_hz, n_targets, opts, j, antenna_id));
    }
    return out;
}

DetectionWindow window_around(double center_hz, double width_hz, const RealVector& freq_axis_hz)
{
    const double bin_hz = axis_step(freq_axis_hz);
    const Eigen::Index n = freq_axis_hz.size();
    if (!(width_hz > 0.0))
        throw ValidationError("mask: width must be positive");
    if (center_hz < freq_axis_hz[0] - 0.5 * bin_hz || center_hz > freq_axis_hz[n - 1] + 0.5 * bin_hz)
        throw ValidationError("mask: centre outside the frequency axis");
    const double half = 0.5 * width_hz + 1e-9 * bin_hz;
    DetectionWindow d;
    d.center_hz = center_hz;
    d.width_hz = width_hz;
    d.lo_bin = int(std::clamp(std::ceil((center_hz - half - freq_axis_hz[0]) / bin_hz), 0.0, double(n - 1)));
    d.hi_bin = int(std::clamp(std::floor((center_hz + half - freq_axis_hz[0]) / bin_hz), 0.0, double(n - 1)));
    d.valid = d.lo_bin <= d.hi_bin;
    return d;
}

ComplexVector mask_spectrum(const Eigen::Ref<const ComplexVector>& frame, const RealVector& freq_axis_hz,
                            const DetectionWindow& window, const MaskOptions& opts)
{
    if (frame.size() != freq_axis_hz.size())
        throw ValidationError("mask: frame and axis lengths differ");
    ComplexVector out = ComplexVector::Zero(frame.size());
    const int lo = std::max(0, window.lo_bin);
    const int hi = std::min(int(frame.size()) - 1, window.hi_bin);
    const int len = hi - lo + 1;
    for (int k = lo; k <= hi; ++k) {
        double g = 1.0;
        if (opts.taper == MaskTaper::Tukey && len > 1 && opts.tukey_alpha > 0.0) {
            const double a = std::min(opts.tukey_alpha, 1.0);
            const double u = double(k - lo) / double(len - 1);
            if (u < 0.5 * a)
                g = 0.5 * (1.0 + std::cos(kPi * (2.0 * u / a - 1.0)));
            else if (u > 1.0 - 0.5 * a)
                g = 0.5 * (1.0 + std::cos(kPi * (2.0 * u / a - 2.0 / a + 1.0)));
        }
        out[k] = g * frame[k];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Association

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost)
{
    const int n = int(cost.rows());
    const int m = int(cost.cols());
    if (n == 0)
        return {};
    if (n > m)
        throw ValidationError("assignment: more rows than columns");

    // Shortest augmenting path with potentials (1-based internally).
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(std::size_t(n + 1), 0.0), v(std::size_t(m + 1), 0.0);
    std::vector<int> p(std::size_t(m + 1), 0), way(std::size_t(m + 1), 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(std::size_t(m + 1), inf);
        std::vector<char> used(std::size_t(m + 1), 0);
        do {
            used[std::size_t(j0)] = 1;
            const int i0 = p[std::size_t(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[std::size_t(j)])
                    continue;
                const double cur = cost(i0 - 1, j - 1) - u[std::size_t(i0)] - v[std::size_t(j)];
                if (cur < minv[std::size_t(j)]) {
                    minv[std::size_t(j)] = cur;
                    way[std::size_t(j)] = j0;
                }
                if (minv[std::size_t(j)] < delta) {
                    delta = minv[std::size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[std::size_t(j)]) {
                    u[std::size_t(p[std::size_t(j)])] += delta;
                    v[std::size_t(j)] -= delta;
                } else {
                    minv[std::size_t(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[std::size_t(j0)] != 0);
        do {
            const int j1 = way[std::size_t(j0)];
            p[std::size_t(j0)] = p[std::size_t(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(std::size_t(n), -1);
    for (int j = 1; j <= m; ++j)
        if (p[std::size_t(j)] != 0)
            row_to_col[std::size_t(p[std::size_t(j)] - 1)] = j - 1;
    return row_to_col;
}

FrameAssociation associate(double gate_hz, std::span<const double> centers1, std::span<const double> centers2)
{
    FrameAssociation out;
    const int n1 = int(centers1.size());
    const int n2 = int(centers2.size());

    // Solve on value-sorted inputs so tied optima do not depend on input order.
    auto sorted_order = [](std::span<const double> c) {
        std::vector<int> idx(c.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return c[std::size_t(a)] < c[std::size_t(b)]; });
        return idx;
    };
    const std::vector<int> o1 = sorted_order(centers1), o2 = sorted_order(centers2);
    const bool transpose = n1 > n2;
    const std::vector<int>& ro = transpose ? o2 : o1;
    const std::vector<int>& co = transpose ? o1 : o2;
    const auto& rows = transpose ? centers2 : centers1;
    const auto& cols = transpose ? centers1 : centers2;

    Eigen::MatrixXd cost(Eigen::Index(rows.size()), Eigen::Index(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            cost(Eigen::Index(i), Eigen::Index(j)) =
                std::abs(rows[std::size_t(ro[i])] - cols[std::size_t(co[j])]);
    const std::vector<int> sorted_assign = solve_assignment(cost);
    std::vector<int> assign(rows.size(), -1);
    for (std::size_t r = 0; r < sorted_assign.size(); ++r)
        assign[std::size_t(ro[r])] = co[std::size_t(sorted_assign[r])];

    std::vector<int> first_to_second(std::size_t(n1), -1);
    if (!transpose) {
        first_to_second = assign;
    } else {
        for (std::size_t r = 0; r < assign.size(); ++r)
            first_to_second[std::size_t(assign[r])] = int(r);
    }

    std::vector<char> second_used(std::size_t(n2), 0);
    for (int i = 0; i < n1; ++i) {
        AssociationPair pr;
        pr.first = i;
        pr.second = first_to_second[std::size_t(i)];
        pr.track_id = i;
        if (pr.second >= 0) {
            second_used[std::size_t(pr.second)] = 1;
            pr.distance = std::abs(centers1[std::size_t(i)] - centers2[std::size_t(pr.second)]);
            out.cost += pr.distance;
            pr.matched = pr.distance <= gate_hz;
        }
        out.pairs.push_back(pr);
    }
    for (int j = 0; j < n2; ++j) {
        if (!second_used[std::size_t(j)]) {
            AssociationPair pr;
            pr.second = j;
            out.pairs.push_back(pr);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Decomposition

TimeFrequencyMap DecomposedResponse::total() const
{
    if (tracks.empty())
        throw ValidationError("decomposed response has no tracks");
    TimeFrequencyMap sum = tracks.front();
    for (std::size_t t = 1; t < tracks.size(); ++t)
        sum.frames += tracks[t].frames;
    sum.label = "decomposed_total";
    return sum;
}

ComplexVector correlate_masked(const ComplexVector& masked1, const ComplexVector& masked2, int zero_pad,
                               double window_sum, double window_energy)
{
    if (masked1.size() != masked2.size())
        throw ValidationError("correlate: spectra lengths differ");
    const ComplexVector x1 = ifft(ifftshift(masked1 * window_sum));
    const ComplexVector x2 = ifft(ifftshift(masked2 * window_sum));
    const ComplexVector prod = x1.cwiseProduct(x2.conjugate());
    return fftshift(fft(prod, int(prod.size()) * zero_pad)) / window_energy;
}

namespace {

struct TargetWindows {
    DetectionWindow rx1;
    DetectionWindow rx2;
    bool valid = true;
    int det1 = -1;
    int det2 = -1;
};

DetectionWindow merged(const DetectionWindow& a, const DetectionWindow& b, const RealVector& axis)
{
    DetectionWindow u = a;
    u.lo_bin = std::min(a.lo_bin, b.lo_bin);
    u.hi_bin = std::max(a.hi_bin, b.hi_bin);
    u.center_hz = 0.5 * (axis[u.lo_bin] + axis[u.hi_bin]);
    u.width_hz = axis[u.hi_bin] - axis[u.lo_bin];
    u.antenna_id = -1;
    return u;
}

/// Per-antenna windows that overlap collapse to their union on both antennas.
void share_if_overlapping(TargetWindows& tw, const RealVector& axis)
{
    if (tw.rx1.overlaps(tw.rx2)) {
        const DetectionWindow u = merged(tw.rx1, tw.rx2, axis);
        tw.rx1 = u;
        tw.rx2 = u;
    }
}

} // namespace

DecomposedResponse decompose_maps(const TimeFrequencyMap& s1, const TimeFrequencyMap& s2, const DecompConfig& cfg,
                                  int n_targets, FrequencyMode mode, const DopplerOracle& known)
{
    if (s1.n_frames() != s2.n_frames() || s1.n_bins() != s2.n_bins())
        throw ValidationError("decompose: antenna maps differ in shape");
    if (n_targets < 0)
        throw ValidationError("decompose: negative target count");
    if (mode == FrequencyMode::Known && n_targets > 0 && !known)
        throw ValidationError("decompose: known-frequency mode needs expected Dopplers");
    if (cfg.zero_pad < 1)
        throw ValidationError("decompose: zero-pad factor must be >= 1");

    const RealVector w = make_window(s1.window, s1.window_len);
    const double wsum = w.sum();
    const double wenergy = w.squaredNorm();
    const int n_frames = s1.n_frames();
    const int n_out = s1.n_bins() * cfg.zero_pad;
    const RealVector& axis = s1.freq_axis_hz;

    DecomposedResponse out;
    out.mode = mode;
    for (int t = 0; t < n_targets; ++t) {
        TimeFrequencyMap tf;
        tf.frames = ComplexFrames<double>::Zero(n_frames, n_out);
        tf.frame_times_s = s1.frame_times_s;
        tf.freq_axis_hz = centered_frequency_axis(n_out, s1.sample_rate_hz);
        tf.sample_rate_hz = s1.sample_rate_hz;
        tf.window_len = s1.window_len;
        tf.hop = s1.hop;
        tf.window = s1.window;
        tf.label = "track_" + std::to_string(t);
        out.tracks.push_back(std::move(tf));
    }
    out.frame_valid.assign(std::size_t(n_targets), std::vector<char>(std::size_t(n_frames), 1));
    out.mask_center_hz.assign(std::size_t(n_targets), std::vector<double>(std::size_t(n_frames), 0.0));

    DetectOptions det = cfg.detect;
    det.width_hz = cfg.mask_width_hz;
    std::vector<double> prev_centers;
    std::vector<double> p1(std::size_t(s1.n_bins())), p2(std::size_t(s1.n_bins())), pc(std::size_t(s1.n_bins()));

    for (int j = 0; j < n_frames; ++j) {
        FrameAssociation fa;
        fa.frame_index = j;
        if (n_targets == 0) {
            out.association.push_back(fa);
            continue;
        }
        std::vector<TargetWindows> targets;

        if (mode == FrequencyMode::Known) {
            for (int t = 0; t < n_targets; ++t) {
                const auto d = known(std::size_t(t), s1.frame_times_s[j]);
                TargetWindows tw;
                try {
                    tw.rx1 = window_around(d[0], cfg.mask_width_hz, axis);
                    tw.rx2 = cfg.mask_mode == MaskMode::Shared ? tw.rx1 : window_around(d[1], cfg.mask_width_hz, axis);
                } catch (const ValidationError&) {
                    tw.valid = false;
                    tw.rx1 = tw.rx2 = DetectionWindow{};
                    tw.rx1.valid = tw.rx2.valid = false;
                    tw.rx1.hi_bin = tw.rx2.hi_bin = -1;
                }
                if (cfg.mask_mode == MaskMode::PerAntenna && tw.valid)
                    share_if_overlapping(tw, axis);
                tw.det1 = tw.det2 = t;
                targets.push_back(tw);
            }
            for (int t = 0; t < n_targets; ++t) {
                AssociationPair pr;
                pr.first = pr.second = pr.track_id = t;
                pr.distance = std::abs(targets[std::size_t(t)].rx1.center_hz - targets[std::size_t(t)].rx2.center_hz);
                pr.matched = targets[std::size_t(t)].valid;
                fa.cost += pr.distance;
                fa.pairs.push_back(pr);
            }
        } else {
            for (int k = 0; k < s1.n_bins(); ++k) {
                p1[std::size_t(k)] = std::norm(s1.frames(j, k));
                p2[std::size_t(k)] = std::norm(s2.frames(j, k));
                pc[std::size_t(k)] = p1[std::size_t(k)] + p2[std::size_t(k)];
            }
            std::vector<TargetWindows> found;
            if (cfg.mask_mode == MaskMode::Shared) {
                for (const auto& d : detect_frame(pc, axis, n_targets, det, j, -1)) {
                    TargetWindows tw{d, d, d.valid};
                    found.push_back(tw);
                }
                for (int i = 0; i < int(found.size()); ++i)
                    found[std::size_t(i)].det1 = found[std::size_t(i)].det2 = i;
            } else {
                const auto d1 = detect_frame(p1, axis, n_targets, det, j, 0);
                const auto d2 = detect_frame(p2, axis, n_targets, det, j, 1);
                std::vector<double> c1, c2;
                for (const auto& d : d1)
                    c1.push_back(d.center_hz);
                for (const auto& d : d2)
                    c2.push_back(d.center_hz);
                const FrameAssociation cross = associate(cfg.gate_hz, c1, c2);
                for (const auto& pr : cross.pairs) {
                    if (pr.first < 0 || pr.second < 0)
                        continue;
                    TargetWindows tw{d1[std::size_t(pr.first)], d2[std::size_t(pr.second)],
                                     pr.matched && d1[std::size_t(pr.first)].valid && d2[std::size_t(pr.second)].valid,
                                     pr.first, pr.second};
                    share_if_overlapping(tw, axis);
                    found.push_back(tw);
                }
            }

            // Frame-to-frame continuity: tracks follow their previous RX1 centre.
            std::vector<double> centers;
            for (const auto& tw : found)
                centers.push_back(tw.rx1.center_hz);
            targets.assign(std::size_t(n_targets), TargetWindows{});
            for (auto& tw : targets) {
                tw.valid = false;
                tw.rx1.hi_bin = tw.rx2.hi_bin = -1;
            }
            if (prev_centers.empty()) {
                for (std::size_t i = 0; i < found.size() && i < std::size_t(n_targets); ++i)
                    targets[i] = found[i];
            } else {
                const FrameAssociation cont = associate(cfg.track_gate_hz, prev_centers, centers);
                for (const auto& pr : cont.pairs) {
                    if (pr.first < 0 || pr.second < 0)
                        continue;
                    targets[std::size_t(pr.first)] = found[std::size_t(pr.second)];
                    targets[std::size_t(pr.first)].valid = found[std::size_t(pr.second)].valid && pr.matched;
                }
            }
            if (prev_centers.empty() && !found.empty())
                prev_centers.assign(std::size_t(n_targets), 0.0);
            for (int t = 0; t < n_targets; ++t) {
                const auto& tw = targets[std::size_t(t)];
                if (tw.rx1.hi_bin >= 0)
                    prev_centers[std::size_t(t)] = tw.rx1.center_hz;
                AssociationPair pr;
                pr.first = tw.det1;
                pr.second = tw.det2;
                pr.track_id = t;
                pr.distance = tw.rx1.hi_bin >= 0 ? std::abs(tw.rx1.center_hz - tw.rx2.center_hz) : 0.0;
                pr.matched = tw.valid;
                fa.cost += pr.distance;
                fa.pairs.push_back(pr);
            }
        }

        for (int t = 0; t < n_targets; ++t) {
            const auto& tw = targets[std::size_t(t)];
            out.frame_valid[std::size_t(t)][std::size_t(j)] = tw.valid ? 1 : 0;
            out.mask_center_hz[std::size_t(t)][std::size_t(j)] = tw.rx1.center_hz;
            if (tw.rx1.hi_bin < 0)
                continue;
            const ComplexVector m1 = mask_spectrum(s1.frames.row(j).transpose(), axis, tw.rx1, cfg.mask);
            const ComplexVector m2 = mask_spectrum(s2.frames.row(j).transpose(), axis, tw.rx2, cfg.mask);
            out.tracks[std::size_t(t)].frames.row(j) = correlate_masked(m1, m2, cfg.zero_pad, wsum, wenergy).transpose();
        }
        out.association.push_back(std::move(fa));
    }
    return out;
}

DecomposedResponse decompose_and_correlate(const IqCapture& capture, const DecompConfig& cfg, int n_targets,
                                           FrequencyMode mode, const DopplerOracle& known)
{
    capture.validate();
    const TimeFrequencyMap s1 = stft(capture.ch1, capture.sample_rate_hz, cfg.stft, capture.t0_s, "rx1");
    const TimeFrequencyMap s2 = stft(capture.ch2, capture.sample_rate_hz, cfg.stft, capture.t0_s, "rx2");
    return decompose_maps(s1, s2, cfg, n_targets, mode, known);
}

} // namespace angvel
