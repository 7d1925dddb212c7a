// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>

#include "angvel/errors.hpp"
#include "angvel/model.hpp"
#include "support.hpp"

using namespace angvel;

namespace {

PointState pt(double v, double w, double th = 0.0, double amp = 1.0)
{
    PointState p;
    p.v_radial_mps = v;
    p.omega_radps = w;
    p.theta_rad = {th, th};
    p.amplitude = amp;
    return p;
}

std::vector<std::pair<double, double>> multiset(const LineList& l)
{
    std::vector<std::pair<double, double>> m;
    for (const auto& s : l.lines)
        m.emplace_back(s.freq_hz, std::abs(s.amplitude));
    std::sort(m.begin(), m.end());
    return m;
}

} // namespace

TEST_CASE("single point")
{
    const ArrayGeometry g = test::geom40();
    const std::vector<PointState> p{pt(0.3, 0.072)};
    const LineList full = full_response_lines(p, g, AntennaPattern::isotropic());
    REQUIRE(full.lines.size() == 1);
    CHECK(full.lines[0].kind == LineKind::Self);
    CHECK(full.lines[0].freq_hz == doctest::Approx(1.44));
    const LineList dec = decomposed_response_lines(p, g, AntennaPattern::isotropic());
    REQUIRE(dec.lines.size() == 1);
    CHECK(dec.lines[0].freq_hz == full.lines[0].freq_hz);
}

TEST_CASE("two points")
{
    const ArrayGeometry g = test::geom40();
    const auto iso = AntennaPattern::isotropic();
    SUBCASE("equal radial velocity")
    {
        const std::vector<PointState> p{pt(-0.1, 0.059), pt(-0.1, -0.071)};
        for (const auto& l : full_response_lines(p, g, iso).lines)
            CHECK(l.freq_hz == doctest::Approx(p[std::size_t(l.k)].omega_radps * 20.0));
    }
    SUBCASE("opposed radial velocity, no rotation")
    {
        const std::vector<PointState> p{pt(0.5, 0.0), pt(-0.5, 0.0)};
        for (const auto& l : full_response_lines(p, g, iso).lines) {
            if (l.kind == LineKind::Self)
                CHECK(l.freq_hz == 0.0);
            else
                CHECK(std::abs(l.freq_hz) == doctest::Approx(266.8).epsilon(1e-3));
        }
    }
    SUBCASE("decomposed lines of the case-2 rates")
    {
        const std::vector<PointState> p{pt(-0.5, 0.072), pt(0.5, -0.053)};
        const LineList d = decomposed_response_lines(p, g, iso);
        REQUIRE(d.lines.size() == 2);
        CHECK(d.lines[0].freq_hz == doctest::Approx(1.44));
        CHECK(d.lines[1].freq_hz == doctest::Approx(-1.06));
    }
    SUBCASE("isotropic amplitudes")
    {
        const std::vector<PointState> p{pt(0.1, 0.0, 0.0, 2.0), pt(-0.2, 0.0, 0.0, 0.5)};
        const LineList d = decomposed_response_lines(p, g, iso);
        CHECK(d.lines[0].amplitude == Complex(4.0, 0.0));
        CHECK(d.lines[1].amplitude == Complex(0.25, 0.0));
    }
}

TEST_CASE("line counts")
{
    CHECK(line_count_check(0) == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(line_count_check(1) == std::pair<std::size_t, std::size_t>{1, 0});
    CHECK(line_count_check(2) == std::pair<std::size_t, std::size_t>{2, 2});
    CHECK(line_count_check(5) == std::pair<std::size_t, std::size_t>{5, 20});
    const ArrayGeometry g = test::geom40();
    for (std::size_t n = 1; n <= 5; ++n) {
        std::vector<PointState> p;
        for (std::size_t i = 0; i < n; ++i)
            p.push_back(pt(0.1 * double(i), 0.01 * double(i)));
        const LineList l = full_response_lines(p, g, AntennaPattern{});
        const auto self = std::count_if(l.lines.begin(), l.lines.end(),
                                        [](const SpectralLine& s) { return s.kind == LineKind::Self; });
        CHECK(std::size_t(self) == line_count_check(n).first);
        CHECK(l.lines.size() - std::size_t(self) == line_count_check(n).second);
    }
    CHECK_THROWS_AS(full_response_lines({}, g, AntennaPattern{}), ValidationError);
    CHECK_THROWS_AS(decomposed_response_lines({}, g, AntennaPattern{}), ValidationError);
}

TEST_CASE("line list properties over random point sets")
{
    const ArrayGeometry g = test::geom40();
    const AntennaPattern pat;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> v(-1.0, 1.0), w(-0.3, 0.3), th(-0.3, 0.3), a(0.2, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 4;
        std::vector<PointState> p;
        for (int i = 0; i < n; ++i) {
            PointState s = pt(v(rng), w(rng), th(rng), a(rng));
            s.theta_rad[1] = s.theta_rad[0] + 0.01;
            p.push_back(s);
        }
        const LineList full = full_response_lines(p, g, pat);
        const LineList dec = decomposed_response_lines(p, g, pat);

        // Self-term frequencies equal decomposed frequencies exactly.
        std::vector<double> fs, fd;
        for (const auto& l : full.lines)
            if (l.kind == LineKind::Self)
                fs.push_back(l.freq_hz);
        for (const auto& l : dec.lines)
            fd.push_back(l.freq_hz);
        std::sort(fs.begin(), fs.end());
        std::sort(fd.begin(), fd.end());
        CHECK(fs == fd);

        // f_nk + f_kn = (omega_n + omega_k) D / lambda.
        const double s = g.baseline_m / g.wavelength_m;
        for (const auto& l : full.lines) {
            const auto& m = full.lines[std::size_t(l.k * n + l.n)];
            const double expect = (p[std::size_t(l.n)].omega_radps + p[std::size_t(l.k)].omega_radps) * s;
            CHECK(std::abs(l.freq_hz + m.freq_hz - expect) < 1e-12 * (1.0 + std::abs(l.freq_hz)));
        }

        // Scaling amplitudes by gain scales every line by gain^2.
        std::vector<PointState> q = p;
        for (auto& x : q)
            x.amplitude *= 1.7;
        const LineList scaled = full_response_lines(q, g, pat);
        for (std::size_t i = 0; i < full.lines.size(); ++i)
            CHECK(std::abs(scaled.lines[i].amplitude - 1.7 * 1.7 * full.lines[i].amplitude) <
                  1e-12 * std::abs(scaled.lines[i].amplitude));

        // Exchanging points only relabels lines.
        if (n >= 2) {
            std::vector<PointState> r = p;
            std::swap(r[0], r[std::size_t(n - 1)]);
            CHECK(multiset(full_response_lines(r, g, pat)) == multiset(full));
        }
    }
}

TEST_CASE("approximation degraded flag")
{
    const ArrayGeometry g = test::geom40();
    const std::vector<PointState> ok{pt(0.0, 0.0, 0.3)};
    const std::vector<PointState> wide{pt(0.0, 0.0, 0.4)};
    CHECK_FALSE(full_response_lines(ok, g, AntennaPattern{}).approximation_degraded);
    CHECK(full_response_lines(wide, g, AntennaPattern{}).approximation_degraded);
    CHECK(decomposed_response_lines(wide, g, AntennaPattern{}).approximation_degraded);
    const std::vector<PointState> endfire{pt(0.0, 0.0, 1.6)};
    CHECK_THROWS_AS(full_response_lines(endfire, g, AntennaPattern{}), ValidationError);
}

TEST_CASE("line kernel matches the STFT of a tone")
{
    const double fs = 1920.0;
    const StftConfig cfg;
    const double f0 = 13.37;
    const TimeFrequencyMap tf = stft(test::tone(f0, fs, 1024), fs, cfg.zero_padded(8));
    const LineKernel ker{cfg.window, cfg.window_len, fs};
    CHECK(ker(0.0) == doctest::Approx(1.0));
    CHECK(ker(4.01 * ker.native_bin_hz()) == 0.0);
    const std::vector<SpectralLine> lines{{f0, Complex(1.0, 0.0), LineKind::Self, 0, 0}};
    const RealVector r = rasterize_lines(lines, FrequencyGrid::of(tf), ker);
    for (int k = 0; k < tf.n_bins(); ++k) {
        if (std::abs(tf.freq_axis_hz[k] - f0) < 3.9 * ker.native_bin_hz())
            CHECK(std::abs(r[k] - std::abs(tf.frames(0, k))) < 1e-9);
    }
}

TEST_CASE("rasterisation ignores line order")
{
    const FrequencyGrid grid{-50.0, 0.25, 400};
    const LineKernel ker;
    std::vector<SpectralLine> lines{{1.0, Complex(1.0, 0.5), LineKind::Self, 0, 0},
                                    {-3.3, Complex(0.2, 0.0), LineKind::Cross, 0, 1},
                                    {1.0, Complex(0.3, 0.0), LineKind::Cross, 1, 0},
                                    {7.1, Complex(0.0, 2.0), LineKind::Self, 1, 1}};
    const RealVector a = rasterize_lines(lines, grid, ker);
    std::reverse(lines.begin(), lines.end());
    const RealVector b = rasterize_lines(lines, grid, ker);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * std::size_t(a.size())) == 0);
}
