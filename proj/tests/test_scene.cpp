// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "angvel/errors.hpp"
#include "angvel/scene.hpp"
#include "support.hpp"

using namespace angvel;
using angvel::test::geom40;

namespace {

// TX and RX1 at the origin, RX2 one baseline to the left.
ArrayGeometry rx_at_origin()
{
    ArrayGeometry g = geom40();
    g.tx_position = Vec2::Zero();
    g.rx1_position = Vec2::Zero();
    g.rx2_position = Vec2(-g.baseline_m, 0.0);
    return g;
}

TargetTrajectory still(Vec2 p)
{
    TargetTrajectory t;
    t.samples = {{0.0, p.x(), p.y()}, {1.0, p.x(), p.y()}};
    return t;
}

} // namespace

TEST_CASE("geometry invariants")
{
    const ArrayGeometry g = geom40();
    CHECK_NOTHROW(g.validate());
    CHECK(g.wavelength_m == doctest::Approx(7.4948e-3).epsilon(1e-4));
    CHECK((g.rx1_position - g.rx2_position).norm() == doctest::Approx(g.baseline_m));

    ArrayGeometry bad = g;
    bad.wavelength_m *= 1.001;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = g;
    bad.rx2_position.x() -= 1e-6;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_THROWS_AS(ArrayGeometry::centered(40e9, 0.0).validate(), ValidationError);
    CHECK_THROWS_AS(ArrayGeometry::centered(-1.0, 0.1).validate(), ValidationError);
}

TEST_CASE("trajectory invariants")
{
    TargetTrajectory t;
    t.samples = {{0.0, 0.0, 1.0}};
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t.samples = {{0.0, 0.0, 1.0}, {0.0, 0.0, 2.0}};
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t.samples = {{0.0, 0.0, 1.0}, {1.0, 0.0, 2.0}};
    t.amplitude = 0.0;
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t.amplitude = 1.0;
    CHECK(t.position_at(0.25).y() == doctest::Approx(1.25));
    CHECK_THROWS_AS(t.position_at(1.5), RangeError);
}

TEST_CASE("static broadside target")
{
    const ArrayGeometry g = rx_at_origin();
    const KinematicState k = kinematics_at(still({0.0, 5.0}), g, 0.5);
    CHECK(k.v_radial_mps[0] == 0.0);
    CHECK(k.omega_radps[0] == 0.0);
    CHECK(k.theta_rad[0] == 0.0);
    CHECK(k.range_m[0] == doctest::Approx(5.0));
}

TEST_CASE("pure radial motion")
{
    const ArrayGeometry g = rx_at_origin();
    const auto tr = test::line(1, {0.0, 5.5}, {0.0, -0.5}, 0.0, 2.0, 120.0);
    const KinematicState k = kinematics_at(tr, g, 1.0);
    CHECK(k.v_radial_mps[0] == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(k.omega_radps[0] == 0.0);
    const ExpectedShifts s = expected_shifts(tr, g, 1.0);
    CHECK(s.doppler_hz == doctest::Approx(133.43).epsilon(1e-3));
    CHECK(s.interferometric_hz == 0.0);
}

TEST_CASE("circular motion about the receiver gives omega = v / r")
{
    const ArrayGeometry g = geom40();
    const double r = 5.0, v = 0.36;
    CircleSpec c{g.rx1_position, r, -0.3, v / r};
    const auto tr = test::sampled(c, 1, 0.0, 10.0, 120.0);
    for (double t : {0.5, 2.0, 4.0, 6.5, 9.5}) {
        const KinematicState k = kinematics_at(tr, g, t);
        CHECK(test::rel_diff(k.omega_radps[0], 0.072) < 1e-3);
        CHECK(std::abs(k.range_m[0] - r) < 1e-9);
    }
    // Mid-arc, the broadside form applies: omega D / lambda = 1.44 Hz.
    CHECK(expected_shifts(tr, g, 0.3 / 0.072).interferometric_hz == doctest::Approx(1.44).epsilon(1e-3));
}

TEST_CASE("circle about the array centre has near-zero radial velocity")
{
    const ArrayGeometry g = geom40();
    const auto tr = test::sampled(CircleSpec{Vec2::Zero(), 5.0, -0.2, 0.072}, 1, 0.0, 6.0, 120.0);
    const KinematicState k = kinematics_at(tr, g, 3.0);
    // RX1 sits D/2 off the centre, so its range oscillates by ~ (D/2) v / r.
    CHECK(std::abs(k.v_radial_mps[0]) < 0.5 * g.baseline_m * 0.36 / 5.0 * 1.1);
    CHECK(k.omega_radps[0] == doctest::Approx(0.072).epsilon(0.02));
}

TEST_CASE("tau is the round-trip path over c")
{
    const ArrayGeometry g = geom40();
    const KinematicState k = geometry_at({1.0, 4.0}, g);
    for (int i = 0; i < 2; ++i)
        CHECK(k.tau_s[i] == doctest::Approx((k.range_tx_m + k.range_m[i]) / kSpeedOfLight).epsilon(1e-15));
}

TEST_CASE("far-field angle consistency bound")
{
    const ArrayGeometry g = geom40();
    for (double x : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
        const KinematicState k = geometry_at({x, 8.0}, g);
        const double theta = std::atan2(x, 8.0);
        const double r = std::hypot(x, 8.0);
        // First-order bound, with second-order slack D / r.
        CHECK(std::abs(k.theta_rad[0] - k.theta_rad[1]) < g.baseline_m * std::cos(theta) / r * (1.0 + g.baseline_m / r));
    }
}

TEST_CASE("time reversal negates v_radial and omega")
{
    const ArrayGeometry g = geom40();
    const auto fwd = test::polar(1, 4.0, 0.3, -0.2, 0.05, 0.0, 4.0, 120.0);
    TargetTrajectory rev = fwd;
    rev.samples.clear();
    for (auto it = fwd.samples.rbegin(); it != fwd.samples.rend(); ++it)
        rev.samples.push_back({-it->t, it->x, it->y});
    for (double t : {0.5, 1.0, 2.0, 3.5}) {
        const KinematicState a = kinematics_at(fwd, g, t);
        const KinematicState b = kinematics_at(rev, g, -t);
        for (int i = 0; i < 2; ++i) {
            CHECK(std::abs(a.v_radial_mps[i] + b.v_radial_mps[i]) <= 1e-9 * std::abs(a.v_radial_mps[i]));
            CHECK(std::abs(a.omega_radps[i] + b.omega_radps[i]) <= 1e-9 * std::abs(a.omega_radps[i]));
        }
    }
}

TEST_CASE("tau positive and continuous along a trajectory")
{
    const ArrayGeometry g = geom40();
    const auto tr = test::polar(1, 3.0, 0.5, 0.3, -0.1, 0.0, 2.0, 120.0);
    double prev = geometry_at(tr.position_at(0.0), g).tau_s[0];
    for (const auto& s : tr.samples) {
        const double tau = geometry_at({s.x, s.y}, g).tau_s[0];
        CHECK(tau > 0.0);
        CHECK(std::abs(tau - prev) < 2.0 * 0.6 / 120.0 / kSpeedOfLight);
        prev = tau;
    }
}

TEST_CASE("mirroring across broadside negates angles and omega")
{
    const ArrayGeometry g = geom40();
    ArrayGeometry m = g;
    m.rx1_position.x() = -g.rx1_position.x();
    m.rx2_position.x() = -g.rx2_position.x();
    const auto tr = test::line(1, {1.0, 4.0}, {-0.3, 0.2}, 0.0, 3.0, 120.0);
    TargetTrajectory mir = tr;
    for (auto& s : mir.samples)
        s.x = -s.x;
    for (double t : {0.5, 1.5, 2.5}) {
        const KinematicState a = kinematics_at(tr, g, t);
        const KinematicState b = kinematics_at(mir, m, t);
        for (int i = 0; i < 2; ++i) {
            CHECK(b.theta_rad[i] == doctest::Approx(-a.theta_rad[i]).epsilon(1e-12));
            CHECK(b.omega_radps[i] == doctest::Approx(-a.omega_radps[i]).epsilon(1e-9));
            CHECK(b.range_m[i] == doctest::Approx(a.range_m[i]).epsilon(1e-12));
            CHECK(b.v_radial_mps[i] == doctest::Approx(a.v_radial_mps[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("kinematics outside the support")
{
    const auto tr = test::line(1, {0.0, 5.0}, {0.1, 0.0}, 0.0, 1.0, 120.0);
    CHECK_THROWS_AS(kinematics_at(tr, geom40(), 1.5), RangeError);
    CHECK_THROWS_AS(kinematics_at(tr, geom40(), -0.1), RangeError);
}

TEST_CASE("expected shift examples")
{
    CHECK(doppler_from_range_rate(-0.5, geom40().wavelength_m) == doctest::Approx(133.4).epsilon(1e-3));
    CHECK(doppler_from_range_rate(0.5, geom40().wavelength_m) == doctest::Approx(-133.4).epsilon(1e-3));
}

TEST_CASE("ground truth CSV")
{
    SUBCASE("two targets at 120 Hz")
    {
        std::stringstream ss;
        ss << "# mocap export\nt,target_id,x,y\n";
        for (int i = 0; i < 240; ++i)
            for (int id : {1, 2})
                ss << i / 120.0 << ',' << id << ',' << 0.01 * i * id << ",5\n";
        const auto trs = parse_ground_truth(ss);
        REQUIRE(trs.size() == 2);
        for (const auto& tr : trs) {
            CHECK(tr.samples.size() == 240);
            CHECK(1.0 / tr.mean_spacing() == doctest::Approx(120.0));
        }
        // Uniform motion survives presmoothing.
        CHECK(trs[1].samples[100].x == doctest::Approx(0.01 * 100 * 2).epsilon(1e-12));
    }
    SUBCASE("empty file")
    {
        std::stringstream ss("");
        CHECK_THROWS_AS(parse_ground_truth(ss), ValidationError);
    }
    SUBCASE("single row target")
    {
        std::stringstream ss("t,target_id,x,y\n0,1,0,5\n");
        CHECK_THROWS_AS(parse_ground_truth(ss), ValidationError);
    }
    SUBCASE("malformed row reports its line")
    {
        std::stringstream ss("t,target_id,x,y\n0,1,0,5\n0.1,1,zero,5\n");
        try {
            parse_ground_truth(ss);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("non-monotonic time")
    {
        std::stringstream ss("t,target_id,x,y\n0,1,0,5\n0.2,1,0,5\n0.1,1,0,5\n");
        CHECK_THROWS_AS(parse_ground_truth(ss), ValidationError);
    }
    SUBCASE("missing file")
    {
        CHECK_THROWS_AS(load_ground_truth("/nonexistent/truth.csv"), ValidationError);
    }
    SUBCASE("round trip")
    {
        const auto a = test::polar(3, 4.0, 0.1, 0.2, 0.05, 0.0, 1.0, 120.0);
        std::stringstream ss;
        write_ground_truth(ss, {a});
        const auto b = parse_ground_truth(ss, {1});
        REQUIRE(b.size() == 1);
        CHECK(b[0].target_id == 3);
        REQUIRE(b[0].samples.size() == a.samples.size());
        for (std::size_t i = 0; i < a.samples.size(); ++i)
            CHECK(b[0].samples[i].x == doctest::Approx(a.samples[i].x).epsilon(1e-11));
    }
}
