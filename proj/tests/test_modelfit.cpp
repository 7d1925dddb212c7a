// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <chrono>

#include "angvel/errors.hpp"
#include "angvel/modelfit.hpp"
#include "angvel/synth.hpp"
#include "support.hpp"

using namespace angvel;

namespace {

ObservedSpectrum model_observation(const FitParams& truth, const ArrayGeometry& g, double gain = 1.0)
{
    ObservedSpectrum obs;
    obs.grid = FrequencyGrid{-960.0, 1920.0 / 8192.0, 8192};
    obs.kernel = LineKernel{WindowKind::Hann, 1024, 1920.0};
    std::vector<PointState> pts;
    for (std::size_t i = 0; i < truth.v_radial_mps.size(); ++i)
        pts.push_back({truth.v_radial_mps[i], truth.omega_radps[i], {0.0, 0.0}, 1.0});
    const LineList lines = full_response_lines(pts, g, AntennaPattern::isotropic());
    obs.magnitude = gain * rasterize_lines(lines.lines, obs.grid, obs.kernel);
    return obs;
}

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / double(v.size());
}

void check_recovered(const FitResult& r, FitParams truth)
{
    std::vector<std::pair<double, double>> t;
    for (std::size_t i = 0; i < truth.v_radial_mps.size(); ++i)
        t.emplace_back(truth.v_radial_mps[i], truth.omega_radps[i]);
    std::sort(t.begin(), t.end());
    REQUIRE(r.targets.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(std::abs(r.targets[i].first - t[i].first) <= 0.01);
        CHECK(std::abs(r.targets[i].second - t[i].second) <= 0.005);
    }
}

void check_monotone(const FitResult& r)
{
    REQUIRE_FALSE(r.loss_history.empty());
    CHECK(r.loss_history.front() == r.grid_loss);
    CHECK(r.loss_history.back() == r.loss);
    for (std::size_t i = 1; i < r.loss_history.size(); ++i)
        CHECK(r.loss_history[i] <= r.loss_history[i - 1]);
}

} // namespace

TEST_CASE("loss of the generating parameters is zero")
{
    const ArrayGeometry g = test::geom40();
    const FitParams truth{{-0.2, 0.3}, {0.05, -0.08}};
    const ObservedSpectrum obs = model_observation(truth, g, 3.7);
    CHECK(fit_loss(obs, truth, g) < 1e-9 * obs.magnitude.squaredNorm());
    const FitParams off{{-0.2, 0.3}, {0.06, -0.08}};
    CHECK(fit_loss(obs, off, g) > 1e-3 * obs.magnitude.squaredNorm());
    // Loss never exceeds the observed energy.
    const FitParams far{{-0.9, 0.9}, {0.2, 0.2}};
    CHECK(fit_loss(obs, far, g) <= obs.magnitude.squaredNorm());
}

TEST_CASE("single target recovery")
{
    const ArrayGeometry g = test::geom40();
    const FitParams truth{{0.3}, {0.0737}};
    const ObservedSpectrum obs = model_observation(truth, g);
    FitConfig cfg;
    cfg.mean_v_radial_mps = 0.3;
    const FitResult r = fit(obs, 1, g, cfg);
    check_recovered(r, truth);
    check_monotone(r);
    CHECK(r.grid_points == 41);
}

TEST_CASE("two target recovery")
{
    const ArrayGeometry g = test::geom40();
    const FitParams truth{{0.5, -0.5}, {0.072, -0.053}};
    const ObservedSpectrum obs = model_observation(truth, g);
    FitConfig cfg;
    const FitResult r = fit(obs, 2, g, cfg);
    check_recovered(r, truth);
    check_monotone(r);
}

TEST_CASE("tabulated model matches the exact rasterisation")
{
    const ArrayGeometry g = test::geom40();
    const FitParams truth{{0.123, -0.2}, {0.0311, -0.07}};
    const ObservedSpectrum obs = model_observation(truth, g);
    const RealVector m = model_spectrum(truth, g, obs);
    CHECK((m - obs.magnitude).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("two target recovery, off-grid truth")
{
    const ArrayGeometry g = test::geom40();
    const FitParams truth{{-0.213, 0.33}, {0.0537, -0.0781}};
    const ObservedSpectrum obs = model_observation(truth, g);
    FitConfig cfg;
    cfg.mean_v_radial_mps = mean(truth.v_radial_mps);
    const auto t0 = std::chrono::steady_clock::now();
    const FitResult r = fit(obs, 2, g, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    MESSAGE("two-target fit: " << secs << " s, " << r.grid_points << " grid points");
    check_recovered(r, truth);
    check_monotone(r);
    CHECK(r.loss <= r.grid_loss);
}

TEST_CASE("on-grid truth beats every grid point")
{
    const ArrayGeometry g = test::geom40();
    FitConfig cfg;
    cfg.mean_v_radial_mps = -0.25;
    const double w_true = cfg.omega.values()[24];
    const FitParams truth{{-0.25}, {w_true}};
    const ObservedSpectrum obs = model_observation(truth, g);
    const double at_truth = fit_loss(obs, truth, g);
    for (double w : cfg.omega.values())
        CHECK(at_truth <= fit_loss(obs, FitParams{{-0.25}, {w}}, g));
    const FitResult r = fit(obs, 1, g, cfg);
    CHECK(r.grid_loss == at_truth);
    CHECK(r.targets[0].second == w_true);
}

TEST_CASE("target labelling does not change the loss")
{
    const ArrayGeometry g = test::geom40();
    const FitParams a{{-0.2, 0.1, 0.4}, {0.05, -0.02, 0.09}};
    const FitParams b{{0.4, -0.2, 0.1}, {0.09, 0.05, -0.02}};
    const ObservedSpectrum obs = model_observation(FitParams{{-0.1, 0.2, 0.3}, {0.0, 0.03, -0.05}}, g);
    CHECK(fit_loss(obs, a, g) == fit_loss(obs, b, g));
}

TEST_CASE("fit on a synthesized interferometric spectrum")
{
    const ArrayGeometry g = test::geom40();
    const auto tr = test::polar(1, 6.0, -0.4, 0.0, 0.06, 0.0, 1.2);
    const IqCapture cap = synthesize(test::clean_scene({tr}, 1.2));
    const TimeFrequencyMap tf = interferometric_stft(cap, StftConfig{}, 8);
    const ObservedSpectrum obs = observed_frame(tf, 0);
    const KinematicState k = kinematics_at(tr, g, tf.frame_times_s[0]);
    FitConfig cfg;
    cfg.mean_v_radial_mps = k.v_radial_mps[0];
    const FitResult r = fit(obs, 1, g, cfg);
    CHECK(std::abs(r.targets[0].second - k.omega_radps[0]) <= 0.005);
    check_monotone(r);
}

TEST_CASE("fit argument errors")
{
    const ArrayGeometry g = test::geom40();
    const ObservedSpectrum obs = model_observation(FitParams{{0.0}, {0.0}}, g);
    FitConfig cfg;
    CHECK_THROWS_AS(fit(obs, 4, g, cfg), ValidationError);
    CHECK_THROWS_AS(fit(obs, 0, g, cfg), ValidationError);
    ObservedSpectrum empty = obs;
    empty.magnitude.resize(0);
    CHECK_THROWS_AS(fit(empty, 1, g, cfg), ValidationError);
    FitConfig bad = cfg;
    bad.omega.step = 0.0;
    CHECK_THROWS_AS(fit(obs, 1, g, bad), ValidationError);
    FitConfig huge = cfg;
    huge.max_grid_points = 100;
    CHECK_THROWS_AS(fit(obs, 2, g, huge), ValidationError);
    CHECK_THROWS_AS(fit_loss(obs, FitParams{{0.0, 1.0}, {0.0}}, g), ValidationError);
    TimeFrequencyMap tf;
    CHECK_THROWS_AS(observed_frame(tf, 0), RangeError);
}
