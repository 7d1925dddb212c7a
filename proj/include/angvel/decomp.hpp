// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "angvel/dsp.hpp"
#include "angvel/synth.hpp"

namespace angvel {

/// Contiguous band of bins attributed to one target in one frame.
struct DetectionWindow {
    double center_hz = 0.0;
    double width_hz = 10.0;
    double integrated_power = 0.0;
    int frame_index = 0;
    int antenna_id = 0; ///< 0 = RX1, 1 = RX2, -1 = combined power of both
    int lo_bin = 0;     ///< inclusive
    int hi_bin = 0;     ///< inclusive
    bool valid = true;

    bool overlaps(const DetectionWindow& o) const { return lo_bin <= o.hi_bin && o.lo_bin <= hi_bin; }
};

struct DetectOptions {
    double width_hz = 10.0;
    /// Above this many targets the exact search gives way to greedy selection.
    int exact_max_targets = 8;
    /// Window power must exceed (median bin power * bins) by this much.
    double min_snr_db = 6.0;
};

/// Number of bins in a window of `width_hz` centred on a bin (always odd).
int window_bins(double width_hz, double bin_hz);

/// Picks `n_targets` non-overlapping windows that maximise the summed power.
/// Ties resolve to the lexicographically lowest set of centres.
std::vector<DetectionWindow> detect_frame(std::span<const double> power, const RealVector& freq_axis_hz,
                                          int n_targets, const DetectOptions& opts = {},
                                          int frame_index = 0, int antenna_id = 0);

/// detect_frame over every frame of `tf`; result is [frame][window], sorted by centre.
std::vector<std::vector<DetectionWindow>> detect_targets(const TimeFrequencyMap& tf, int n_targets,
                                                         const DetectOptions& opts = {},
                                                         int antenna_id = 0);

enum class MaskTaper { Rect, Tukey };

struct MaskOptions {
    MaskTaper taper = MaskTaper::Rect;
    double tukey_alpha = 0.5;
};

/// Keeps bins with |f - centre| <= width/2 (optionally tapered), zeroes the rest.
ComplexVector mask_spectrum(const Eigen::Ref<const ComplexVector>& frame, const RealVector& freq_axis_hz,
                            const DetectionWindow& window, const MaskOptions& opts = {});

/// Window covering bins within width/2 of `center_hz` on the given axis.
DetectionWindow window_around(double center_hz, double width_hz, const RealVector& freq_axis_hz);

// ---------------------------------------------------------------------------
// Association

/// Minimum-cost one-to-one assignment for an n x m cost matrix (n <= m).
/// Returns the column assigned to each row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

struct AssociationPair {
    int first = -1;  ///< index into the first set, -1 for a miss
    int second = -1; ///< index into the second set, -1 for a miss
    int track_id = -1;
    double distance = 0.0;
    bool matched = false;
};

struct FrameAssociation {
    int frame_index = 0;
    std::vector<AssociationPair> pairs;
    double cost = 0.0; ///< sum of |centre1 - centre2| over assigned pairs
};

/// Global-nearest-neighbour association of two centre-frequency sets.
/// Pairs further apart than `gate_hz` are kept but flagged unmatched; the
/// surplus of the larger set is reported as misses.
FrameAssociation associate(double gate_hz, std::span<const double> centers1,
                           std::span<const double> centers2);

using AssociationMap = std::vector<FrameAssociation>;

// ---------------------------------------------------------------------------
// Decomposition

enum class FrequencyMode { Known, Detected };
enum class MaskMode { Shared, PerAntenna };

struct DecompConfig {
    StftConfig stft{};
    int zero_pad = 8;
    double mask_width_hz = 10.0;
    MaskMode mask_mode = MaskMode::Shared;
    MaskOptions mask{};
    DetectOptions detect{};
    double gate_hz = 5.0;       ///< antenna-to-antenna association gate
    double track_gate_hz = 5.0; ///< frame-to-frame continuity gate
};

/// Expected Doppler per antenna {RX1, RX2} for target `index` at time `t_s`.
using DopplerOracle = std::function<std::array<double, 2>(std::size_t index, double t_s)>;

struct DecomposedResponse {
    std::vector<TimeFrequencyMap> tracks;             ///< R_D,n per track
    std::vector<std::vector<char>> frame_valid;       ///< [track][frame]
    std::vector<std::vector<double>> mask_center_hz;  ///< [track][frame], RX1 mask centre
    AssociationMap association;                       ///< [frame]
    FrequencyMode mode = FrequencyMode::Known;

    std::size_t n_tracks() const { return tracks.size(); }
    /// Sum of the per-track responses.
    TimeFrequencyMap total() const;
};

/// Conjugate-multiplies the time series behind two masked spectra and
/// returns the zero-padded spectrum of the product, DC-centred and scaled so a
/// unit tone in both channels peaks at 1. `window_sum` and `window_energy` are
/// sum(w) and sum(w^2) of the analysis window.
ComplexVector correlate_masked(const ComplexVector& masked1, const ComplexVector& masked2, int zero_pad,
                               double window_sum, double window_energy);

/// Decomposition from precomputed per-antenna STFTs.
DecomposedResponse decompose_maps(const TimeFrequencyMap& s1, const TimeFrequencyMap& s2, const DecompConfig& cfg,
                                  int n_targets, FrequencyMode mode, const DopplerOracle& known = {});

DecomposedResponse decompose_and_correlate(const IqCapture& capture, const DecompConfig& cfg,
                                           int n_targets, FrequencyMode mode,
                                           const DopplerOracle& known = {});

} // namespace angvel
