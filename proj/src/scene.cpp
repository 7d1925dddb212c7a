// SPDX-License-Identifier: Apache-2.0
#include "angvel/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "angvel/errors.hpp"

namespace angvel {

ArrayGeometry ArrayGeometry::centered(double carrier_hz, double baseline_m)
{
    ArrayGeometry g;
    g.carrier_hz = carrier_hz;
    g.wavelength_m = kSpeedOfLight / carrier_hz;
    g.baseline_m = baseline_m;
    g.tx_position = Vec2::Zero();
    g.rx1_position = Vec2(0.5 * baseline_m, 0.0);
    g.rx2_position = Vec2(-0.5 * baseline_m, 0.0);
    return g;
}

ArrayGeometry ArrayGeometry::centered_wavelengths(double carrier_hz, double baseline_wavelengths)
{
    return centered(carrier_hz, baseline_wavelengths * kSpeedOfLight / carrier_hz);
}

void ArrayGeometry::validate() const
{
    if (!(baseline_m > 0.0) || !(wavelength_m > 0.0) || !(carrier_hz > 0.0))
        throw ValidationError("geometry: baseline, wavelength and carrier must be positive");
    const double implied = kSpeedOfLight / carrier_hz;
    if (std::abs(implied - wavelength_m) / wavelength_m >= 1e-6)
        throw ValidationError("geometry: wavelength inconsistent with carrier frequency");
    if (std::abs((rx1_position - rx2_position).norm() - baseline_m) > 1e-9)
        throw ValidationError("geometry: receiver separation does not equal the baseline");
}

void TargetTrajectory::validate() const
{
    if (samples.size() < 2)
        throw ValidationError("trajectory " + std::to_string(target_id) + ": needs at least 2 samples");
    if (!(amplitude > 0.0))
        throw ValidationError("trajectory " + std::to_string(target_id) + ": amplitude must be positive");
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i].t > samples[i - 1].t))
            throw ValidationError("trajectory " + std::to_string(target_id) +
                                  ": timestamps must be strictly increasing");
    }
}

Vec2 TargetTrajectory::position_at(double t) const
{
    if (samples.empty() || t < t_begin() || t > t_end())
        throw RangeError("trajectory " + std::to_string(target_id) + ": time " + std::to_string(t) +
                         " outside support");
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const TrajectorySample& s) { return v < s.t; });
    if (it == samples.end())
        return {samples.back().x, samples.back().y};
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double u = (t - a.t) / (b.t - a.t);
    return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
}

KinematicState geometry_at(const Vec2& p, const ArrayGeometry& geom)
{
    KinematicState k;
    k.range_tx_m = (p - geom.tx_position).norm();
    for (int i = 0; i < 2; ++i) {
        const Vec2 d = p - geom.rx(i);
        k.range_m[i] = d.norm();
        k.theta_rad[i] = std::atan2(d.x(), d.y());
        k.tau_s[i] = (k.range_tx_m + k.range_m[i]) / kSpeedOfLight;
    }
    return k;
}

KinematicState kinematics_at(const TargetTrajectory& traj, const ArrayGeometry& geom, double t,
                             const KinematicsOptions& opts)
{
    traj.validate();
    if (!traj.covers(t))
        throw RangeError("kinematics: time " + std::to_string(t) + " outside trajectory " +
                         std::to_string(traj.target_id));

    KinematicState k = geometry_at(traj.position_at(t), geom);

    const double h = opts.step_s > 0.0 ? opts.step_s : traj.mean_spacing();
    const double t_lo = std::max(t - h, traj.t_begin());
    const double t_hi = std::min(t + h, traj.t_end());
    const KinematicState lo = geometry_at(traj.position_at(t_lo), geom);
    const KinematicState hi = geometry_at(traj.position_at(t_hi), geom);
    const double dt = t_hi - t_lo;
    for (int i = 0; i < 2; ++i) {
        const double half_path_hi = 0.5 * (hi.range_tx_m + hi.range_m[i]);
        const double half_path_lo = 0.5 * (lo.range_tx_m + lo.range_m[i]);
        k.v_radial_mps[i] = (half_path_hi - half_path_lo) / dt;
        k.omega_radps[i] = wrap_phase(hi.theta_rad[i] - lo.theta_rad[i]) / dt;
    }
    return k;
}

ExpectedShifts expected_shifts(const TargetTrajectory& traj, const ArrayGeometry& geom, double t,
                               const ShiftOptions& opts)
{
    const KinematicState k = kinematics_at(traj, geom, t, opts.kinematics);
    ExpectedShifts s;
    s.doppler_hz = doppler_from_range_rate(k.v_radial_mps[0], geom.wavelength_m);
    s.doppler_rx2_hz = doppler_from_range_rate(k.v_radial_mps[1], geom.wavelength_m);
    s.interferometric_hz = k.omega_radps[0] * geom.baseline_m / geom.wavelength_m;
    if (std::abs(k.theta_rad[0]) >= opts.small_angle_threshold_rad)
        s.interferometric_hz *= std::cos(k.theta_rad[0]);
    return s;
}

TargetTrajectory smooth_positions(const TargetTrajectory& traj, int width)
{
    if (width <= 1 || traj.samples.size() < 3)
        return traj;
    const int n = int(traj.samples.size());
    const int half = width / 2;
    TargetTrajectory out = traj;
    for (int i = 0; i < n; ++i) {
        const int h = std::min({half, i, n - 1 - i});
        double sx = 0.0, sy = 0.0;
        for (int j = i - h; j <= i + h; ++j) {
            sx += traj.samples[j].x;
            sy += traj.samples[j].y;
        }
        out.samples[i].x = sx / double(2 * h + 1);
        out.samples[i].y = sy / double(2 * h + 1);
    }
    return out;
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, std::size_t line, const char* name)
{
    const std::string f = trim(field);
    char* end = nullptr;
    const double v = std::strtod(f.c_str(), &end);
    if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v))
        throw ParseError(std::string("invalid ") + name + " '" + f + "'", line);
    return v;
}

} // namespace

std::vector<TargetTrajectory> parse_ground_truth(std::istream& in, const GroundTruthOptions& opts)
{
    std::map<int, TargetTrajectory> by_id;
    std::string raw;
    std::size_t line = 0;
    bool header_seen = false;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#')
            continue;
        if (!header_seen) {
            std::string compact;
            for (char c : s)
                if (c != ' ' && c != '\t')
                    compact += c;
            if (compact != "t,target_id,x,y")
                throw ParseError("expected header 't,target_id,x,y'", line);
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(s);
        std::string f;
        while (std::getline(ss, f, ','))
            fields.push_back(f);
        if (fields.size() != 4)
            throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line);
        const double t = parse_double(fields[0], line, "t");
        const double id_value = parse_double(fields[1], line, "target_id");
        if (id_value != std::floor(id_value))
            throw ParseError("target_id must be an integer", line);
        const int id = int(id_value);
        const double x = parse_double(fields[2], line, "x");
        const double y = parse_double(fields[3], line, "y");

        auto& traj = by_id[id];
        traj.target_id = id;
        if (!traj.samples.empty() && !(t > traj.samples.back().t))
            throw ValidationError("ground truth line " + std::to_string(line) + ": time for target " +
                                  std::to_string(id) + " is not increasing");
        traj.samples.push_back({t, x, y});
    }
    if (by_id.empty())
        throw ValidationError("ground truth: no data rows");

    std::vector<TargetTrajectory> out;
    for (auto& [id, traj] : by_id) {
        traj.validate();
        out.push_back(smooth_positions(traj, opts.presmooth_width));
    }
    return out;
}

std::vector<TargetTrajectory> load_ground_truth(const std::filesystem::path& path, const GroundTruthOptions& opts)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open ground truth file " + path.string());
    return parse_ground_truth(in, opts);
}

void write_ground_truth(std::ostream& out, const std::vector<TargetTrajectory>& trajectories)
{
    struct Row {
        double t;
        int id;
        double x, y;
    };
    std::vector<Row> rows;
    for (const auto& tr : trajectories)
        for (const auto& s : tr.samples)
            rows.push_back({s.t, tr.target_id, s.x, s.y});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.t < b.t || (a.t == b.t && a.id < b.id);
    });
    out << "t,target_id,x,y\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%d,%.12g,%.12g\n", r.t, r.id, r.x, r.y);
        out << buf;
    }
}

} // namespace angvel
