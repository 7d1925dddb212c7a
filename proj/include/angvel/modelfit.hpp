// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "angvel/model.hpp"

namespace angvel {

struct GridAxis {
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
};

/// Coarse grid search followed by derivative-free coordinate descent.
///
/// Only radial-velocity differences are observable in the interferometric
/// spectrum, so the fit holds the mean radial velocity at
/// `mean_v_radial_mps` and searches the remaining N-1 velocity offsets.
struct FitConfig {
    GridAxis omega{-0.2, 0.2, 0.01};
    /// Cross-lines move 2 * step / lambda per v_r step; keep that within
    /// the kernel main lobe.
    GridAxis v_radial{-1.0, 1.0, 0.005};
    double mean_v_radial_mps = 0.0;
    double min_step = 1e-4;
    int max_iterations = 10000;
    std::size_t max_grid_points = 20'000'000;

    void validate() const;
};

/// Observed magnitude spectrum on a regular grid plus the kernel of the
/// window that produced it.
struct ObservedSpectrum {
    RealVector magnitude;
    FrequencyGrid grid;
    LineKernel kernel;
};

ObservedSpectrum observed_frame(const TimeFrequencyMap& tf, int frame);

struct FitParams {
    std::vector<double> v_radial_mps;
    std::vector<double> omega_radps;
};

/// Least-squares distance between |observed| and g * model for the best g >= 0.
double fit_loss(const ObservedSpectrum& obs, const FitParams& params, const ArrayGeometry& geom);

/// Model spectrum for `params` on the grid of `like` (equal unit amplitudes,
/// boresight pattern). The kernel is tabulated at 1/256 of a native bin.
RealVector model_spectrum(const FitParams& params, const ArrayGeometry& geom, const ObservedSpectrum& like);

struct FitResult {
    std::vector<std::pair<double, double>> targets; ///< (v_r, omega), sorted by v_r
    double loss = 0.0;
    double grid_loss = 0.0;
    std::size_t grid_points = 0;
    int iterations = 0;
    std::vector<double> loss_history; ///< after the grid stage, then per accepted move
};

FitResult fit(const ObservedSpectrum& obs, int n_targets, const ArrayGeometry& geom, const FitConfig& cfg);

} // namespace angvel
