// SPDX-License-Identifier: Apache-2.0
#include "angvel/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "angvel/errors.hpp"

namespace angvel {

using nlohmann::json;

Vec2 evaluate(const LineSpec& s, double t)
{
    return s.start_m + s.velocity_mps * t;
}

Vec2 evaluate(const CircleSpec& s, double t)
{
    const double b = s.start_bearing_rad + s.rate_radps * t;
    return s.center_m + s.radius_m * Vec2(std::sin(b), std::cos(b));
}

Vec2 evaluate(const PolarSpec& s, double t)
{
    const double dt = t - s.t_ref_s;
    const double r = s.range_m + s.range_rate_mps * dt;
    const double b = s.bearing_rad + s.bearing_rate_radps * dt;
    return r * Vec2(std::sin(b), std::cos(b));
}

FrequencyMode frequency_mode_from_string(const std::string& s)
{
    if (s == "known")
        return FrequencyMode::Known;
    if (s == "detected")
        return FrequencyMode::Detected;
    throw ValidationError("unknown mode '" + s + "' (expected known|detected)");
}

std::string to_string(FrequencyMode mode)
{
    return mode == FrequencyMode::Known ? "known" : "detected";
}

namespace {

/// Object view that rejects unknown keys and reports paths in errors.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ValidationError(path_ + ": expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : j_.items())
            if (!ok.count(k))
                throw ValidationError(path_ + ": unknown field '" + k + "'");
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    double number(const char* key) const
    {
        const json& v = need(key);
        if (!v.is_number())
            throw ValidationError(field(key) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            throw ValidationError(field(key) + ": must be finite");
        return d;
    }
    double number(const char* key, double def) const { return has(key) ? number(key) : def; }

    int integer(const char* key, int def) const
    {
        if (!has(key))
            return def;
        const json& v = j_.at(key);
        if (!v.is_number_integer())
            throw ValidationError(field(key) + ": expected an integer");
        return v.get<int>();
    }

    std::string text(const char* key, const std::string& def) const
    {
        if (!has(key))
            return def;
        const json& v = j_.at(key);
        if (!v.is_string())
            throw ValidationError(field(key) + ": expected a string");
        return v.get<std::string>();
    }
    std::string text(const char* key) const
    {
        need(key);
        return text(key, "");
    }

    bool flag(const char* key, bool def) const
    {
        if (!has(key))
            return def;
        const json& v = j_.at(key);
        if (!v.is_boolean())
            throw ValidationError(field(key) + ": expected a boolean");
        return v.get<bool>();
    }

    std::array<double, 2> pair(const char* key, std::array<double, 2> def) const
    {
        if (!has(key))
            return def;
        const json& v = j_.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ValidationError(field(key) + ": expected [number, number]");
        return {v[0].get<double>(), v[1].get<double>()};
    }

    Section sub(const char* key) const { return Section(need(key), field(key)); }
    const json& raw(const char* key) const { return need(key); }
    std::string field(const char* key) const { return path_ + "." + key; }

private:
    const json& need(const char* key) const
    {
        if (!has(key))
            throw ValidationError(field(key) + ": required field missing");
        return j_.at(key);
    }

    const json& j_;
    std::string path_;
};

TrajectorySpec parse_trajectory(const Section& s, const std::filesystem::path& base_dir, int target_id)
{
    const std::string kind = s.text("kind");
    if (kind == "line") {
        s.allow({"kind", "start_m", "velocity_mps"});
        const auto p = s.pair("start_m", {0.0, 0.0});
        const auto v = s.pair("velocity_mps", {0.0, 0.0});
        return LineSpec{Vec2(p[0], p[1]), Vec2(v[0], v[1])};
    }
    if (kind == "circle") {
        s.allow({"kind", "center_m", "radius_m", "start_bearing_rad", "rate_radps"});
        const auto c = s.pair("center_m", {0.0, 0.0});
        CircleSpec spec{Vec2(c[0], c[1]), s.number("radius_m"), s.number("start_bearing_rad", 0.0),
                        s.number("rate_radps")};
        if (!(spec.radius_m > 0.0))
            throw ValidationError(s.field("radius_m") + ": must be positive");
        return spec;
    }
    if (kind == "polar") {
        s.allow({"kind", "range_m", "range_rate_mps", "bearing_rad", "bearing_rate_radps", "t_ref_s"});
        PolarSpec spec{s.number("range_m"), s.number("range_rate_mps", 0.0), s.number("bearing_rad", 0.0),
                       s.number("bearing_rate_radps", 0.0), s.number("t_ref_s", 0.0)};
        if (!(spec.range_m > 0.0))
            throw ValidationError(s.field("range_m") + ": must be positive");
        return spec;
    }
    if (kind == "waypoints_csv") {
        s.allow({"kind", "path", "target_id"});
        std::filesystem::path p = s.text("path");
        if (p.is_relative())
            p = base_dir / p;
        if (!std::filesystem::exists(p))
            throw ValidationError("trajectory file not found: " + p.string());
        return WaypointSpec{p, s.integer("target_id", target_id)};
    }
    throw ValidationError(s.field("kind") + ": unknown trajectory kind '" + kind + "'");
}

} // namespace

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario JSON: ") + e.what());
    }
    const Section top(root, "scenario");
    top.allow({"schema_version", "name", "geometry", "waveform", "pattern", "imbalance", "truth_rate_hz", "targets",
               "processing"});
    if (top.integer("schema_version", -1) != kScenarioSchemaVersion)
        throw ValidationError("scenario.schema_version: expected " + std::to_string(kScenarioSchemaVersion));

    Scenario sc;
    sc.name = top.text("name", "scenario");
    sc.base_dir = base_dir;
    json scene_part = root;
    scene_part.erase("processing");
    sc.canonical_json = scene_part.dump();

    {
        const Section g = top.sub("geometry");
        g.allow({"carrier_hz", "baseline_m", "baseline_wavelengths"});
        const double fc = g.number("carrier_hz");
        if (!(fc > 0.0))
            throw ValidationError("scenario.geometry.carrier_hz: must be positive");
        if (g.has("baseline_m") == g.has("baseline_wavelengths"))
            throw ValidationError("scenario.geometry: give exactly one of baseline_m, baseline_wavelengths");
        sc.geometry = g.has("baseline_m") ? ArrayGeometry::centered(fc, g.number("baseline_m"))
                                          : ArrayGeometry::centered_wavelengths(fc, g.number("baseline_wavelengths"));
        sc.geometry.validate();
    }
    {
        const Section w = top.sub("waveform");
        w.allow({"sample_rate_hz", "duration_s", "t0_s", "snr_db", "dc_offset", "seed"});
        sc.waveform.sample_rate_hz = w.number("sample_rate_hz", 1920.0);
        sc.waveform.duration_s = w.number("duration_s");
        sc.waveform.t0_s = w.number("t0_s", 0.0);
        if (w.has("snr_db"))
            sc.waveform.snr_db = w.number("snr_db");
        if (w.has("dc_offset")) {
            const json& d = w.raw("dc_offset");
            if (!d.is_array() || d.size() != 2)
                throw ValidationError(w.field("dc_offset") + ": expected [[re, im], [re, im]]");
            for (std::size_t i = 0; i < 2; ++i) {
                if (!d[i].is_array() || d[i].size() != 2 || !d[i][0].is_number() || !d[i][1].is_number())
                    throw ValidationError(w.field("dc_offset") + ": expected [[re, im], [re, im]]");
                sc.waveform.dc_offset[i] = Complex(d[i][0].get<double>(), d[i][1].get<double>());
            }
        }
        if (w.has("seed")) {
            const json& s = w.raw("seed");
            if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
                throw ValidationError(w.field("seed") + ": expected a non-negative integer");
            sc.waveform.rng_seed = s.get<std::uint64_t>();
        }
        sc.waveform.validate();
    }
    if (top.has("pattern")) {
        const Section p = top.sub("pattern");
        p.allow({"kind", "beamwidth_deg", "boresight_deg"});
        const std::string kind = p.text("kind", "gaussian");
        if (kind == "isotropic") {
            sc.pattern = AntennaPattern::isotropic();
        } else if (kind == "gaussian") {
            sc.pattern.kind = AntennaPattern::Kind::GaussianBeam;
            sc.pattern.beamwidth_rad = deg2rad(p.number("beamwidth_deg", 30.0));
            sc.pattern.boresight_rad = deg2rad(p.number("boresight_deg", 0.0));
        } else {
            throw ValidationError(p.field("kind") + ": expected isotropic|gaussian");
        }
        sc.pattern.validate();
    }
    if (top.has("imbalance")) {
        const Section im = top.sub("imbalance");
        im.allow({"gain_db", "phase_rad"});
        sc.imbalance_gain_db = im.pair("gain_db", {0.0, 0.0});
        sc.imbalance_phase_rad = im.pair("phase_rad", {0.0, 0.0});
    }
    sc.truth_rate_hz = top.number("truth_rate_hz", 120.0);
    if (!(sc.truth_rate_hz > 0.0))
        throw ValidationError("scenario.truth_rate_hz: must be positive");

    {
        const json& targets = top.raw("targets");
        if (!targets.is_array())
            throw ValidationError("scenario.targets: expected an array");
        std::set<int> ids;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const Section t(targets[i], "scenario.targets[" + std::to_string(i) + "]");
            t.allow({"id", "amplitude", "trajectory", "vibration"});
            TargetSpec spec;
            spec.id = t.integer("id", int(i) + 1);
            if (!ids.insert(spec.id).second)
                throw ValidationError(t.field("id") + ": duplicate target id");
            spec.amplitude = t.number("amplitude", 1.0);
            if (!(spec.amplitude > 0.0))
                throw ValidationError(t.field("amplitude") + ": must be positive");
            spec.trajectory = parse_trajectory(t.sub("trajectory"), base_dir, spec.id);
            if (t.has("vibration")) {
                const json& vib = t.raw("vibration");
                if (!vib.is_array())
                    throw ValidationError(t.field("vibration") + ": expected an array");
                for (std::size_t k = 0; k < vib.size(); ++k) {
                    const Section v(vib[k], t.field("vibration") + "[" + std::to_string(k) + "]");
                    v.allow({"freq_hz", "depth_rad", "phase_rad"});
                    spec.vibration.push_back({v.number("freq_hz"), v.number("depth_rad"), v.number("phase_rad", 0.0)});
                }
            }
            sc.targets.push_back(std::move(spec));
        }
    }

    if (top.has("processing")) {
        const Section p = top.sub("processing");
        p.allow({"highpass", "stft", "zero_pad", "mask_width_hz", "mask_mode", "mask_taper", "floor_db",
                 "smooth_frames", "mode", "gate_hz", "track_gate_hz", "full_cos_form", "small_angle_threshold_rad",
                 "presmooth_width", "detect_min_snr_db"});
        auto& pc = sc.processing;
        if (p.has("highpass")) {
            const Section h = p.sub("highpass");
            h.allow({"order", "cutoff_hz", "zero_phase"});
            pc.highpass.order = h.integer("order", pc.highpass.order);
            pc.highpass.cutoff_hz = h.number("cutoff_hz", pc.highpass.cutoff_hz);
            pc.highpass.zero_phase = h.flag("zero_phase", pc.highpass.zero_phase);
        }
        if (p.has("stft")) {
            const Section s = p.sub("stft");
            s.allow({"window_len", "fft_len", "overlap", "window"});
            auto& st = pc.decomp.stft;
            st.window_len = s.integer("window_len", st.window_len);
            st.fft_len = s.integer("fft_len", st.fft_len);
            st.overlap = s.integer("overlap", st.overlap);
            st.window = window_from_string(s.text("window", to_string(st.window)));
        }
        pc.decomp.zero_pad = p.integer("zero_pad", pc.decomp.zero_pad);
        pc.decomp.mask_width_hz = p.number("mask_width_hz", pc.decomp.mask_width_hz);
        const std::string mm = p.text("mask_mode", "shared");
        if (mm == "shared")
            pc.decomp.mask_mode = MaskMode::Shared;
        else if (mm == "per_antenna")
            pc.decomp.mask_mode = MaskMode::PerAntenna;
        else
            throw ValidationError(p.field("mask_mode") + ": expected shared|per_antenna");
        const std::string taper = p.text("mask_taper", "rect");
        if (taper == "rect")
            pc.decomp.mask.taper = MaskTaper::Rect;
        else if (taper == "tukey")
            pc.decomp.mask.taper = MaskTaper::Tukey;
        else
            throw ValidationError(p.field("mask_taper") + ": expected rect|tukey");
        pc.floor_db = p.number("floor_db", pc.floor_db);
        pc.smooth_frames = p.integer("smooth_frames", pc.smooth_frames);
        pc.mode = frequency_mode_from_string(p.text("mode", "known"));
        pc.decomp.gate_hz = p.number("gate_hz", pc.decomp.gate_hz);
        pc.decomp.track_gate_hz = p.number("track_gate_hz", pc.decomp.track_gate_hz);
        pc.full_cos_form = p.flag("full_cos_form", pc.full_cos_form);
        pc.shifts.small_angle_threshold_rad =
            p.number("small_angle_threshold_rad", pc.shifts.small_angle_threshold_rad);
        pc.truth.presmooth_width = p.integer("presmooth_width", pc.truth.presmooth_width);
        pc.decomp.detect.min_snr_db = p.number("detect_min_snr_db", pc.decomp.detect.min_snr_db);
    }
    auto& pc = sc.processing;
    pc.decomp.stft.validate();
    if (pc.decomp.zero_pad < 1)
        throw ValidationError("scenario.processing.zero_pad: must be >= 1");
    if (!(pc.decomp.mask_width_hz > 0.0))
        throw ValidationError("scenario.processing.mask_width_hz: must be positive");
    if (pc.smooth_frames < 1)
        throw ValidationError("scenario.processing.smooth_frames: must be >= 1");
    if (pc.floor_db > 0.0)
        throw ValidationError("scenario.processing.floor_db: must be <= 0");
    if (pc.truth.presmooth_width < 1)
        throw ValidationError("scenario.processing.presmooth_width: must be >= 1");
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::string scenario_hash(const Scenario& scenario)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : scenario.canonical_json) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

TargetTrajectory sample_target(const TargetSpec& spec, double t_begin, double t_end, double rate_hz,
                               const std::filesystem::path& base_dir)
{
    if (const auto* wp = std::get_if<WaypointSpec>(&spec.trajectory)) {
        (void)base_dir;
        for (auto& tr : load_ground_truth(wp->path, GroundTruthOptions{1})) {
            if (tr.target_id == wp->target_id) {
                tr.target_id = spec.id;
                tr.amplitude = spec.amplitude;
                return tr;
            }
        }
        throw ValidationError("trajectory file " + wp->path.string() + " has no target " +
                              std::to_string(wp->target_id));
    }
    if (!(t_end > t_begin) || !(rate_hz > 0.0))
        throw ValidationError("sample_target: empty time span or non-positive rate");
    TargetTrajectory tr;
    tr.target_id = spec.id;
    tr.amplitude = spec.amplitude;
    const auto n = std::size_t(std::ceil((t_end - t_begin) * rate_hz - 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t_begin + double(i) / rate_hz;
        const Vec2 p = std::visit(
            [t](const auto& s) -> Vec2 {
                if constexpr (std::is_same_v<std::decay_t<decltype(s)>, WaypointSpec>)
                    return Vec2::Zero();
                else
                    return evaluate(s, t);
            },
            spec.trajectory);
        tr.samples.push_back({t, p.x(), p.y()});
    }
    return tr;
}

Scene build_scene(const Scenario& scenario)
{
    Scene scene;
    scene.geometry = scenario.geometry;
    scene.pattern = scenario.pattern;
    scene.waveform = scenario.waveform;
    const double t0 = scenario.waveform.t0_s;
    const double t1 = t0 + scenario.waveform.duration_s;
    for (const auto& spec : scenario.targets) {
        SceneTarget st;
        st.trajectory = sample_target(spec, t0, t1, scenario.waveform.sample_rate_hz, scenario.base_dir);
        st.vibration = spec.vibration;
        scene.targets.push_back(std::move(st));
    }
    return scene;
}

std::vector<TargetTrajectory> truth_trajectories(const Scenario& scenario)
{
    std::vector<TargetTrajectory> out;
    const double t0 = scenario.waveform.t0_s;
    const double t1 = t0 + scenario.waveform.duration_s;
    for (const auto& spec : scenario.targets)
        out.push_back(sample_target(spec, t0, t1, scenario.truth_rate_hz, scenario.base_dir));
    return out;
}

IqCapture simulate(const Scenario& scenario, const WarningSink& warn)
{
    IqCapture cap = synthesize(build_scene(scenario), warn);
    if (scenario.imbalance_gain_db != std::array<double, 2>{0.0, 0.0} ||
        scenario.imbalance_phase_rad != std::array<double, 2>{0.0, 0.0})
        cap = add_channel_imbalance(std::move(cap), scenario.imbalance_gain_db, scenario.imbalance_phase_rad);
    return cap;
}

} // namespace angvel
