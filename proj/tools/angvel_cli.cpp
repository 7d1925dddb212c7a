// SPDX-License-Identifier: Apache-2.0
// angvel: simulate, process, oracle, fit and eval front end.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "angvel/errors.hpp"
#include "angvel/estimate.hpp"
#include "angvel/io.hpp"
#include "angvel/model.hpp"
#include "angvel/modelfit.hpp"
#include "angvel/pipeline.hpp"
#include "angvel/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace angvel;

namespace {

constexpr int kExitPipeline = 1;
constexpr int kExitValidation = 2;

struct Overrides {
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<double> mask_width_hz;
    std::optional<double> floor_db;
    std::optional<int> smooth_frames;
    std::optional<int> zero_pad;
};

/// Loads a scenario and applies command-line overrides before validation.
Scenario load_with_overrides(const fs::path& path, const Overrides& o)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open scenario file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    if (!j.is_object())
        throw ValidationError(path.string() + ": expected a JSON object");
    if (o.seed)
        j["waveform"]["seed"] = *o.seed;
    if (o.mode)
        j["processing"]["mode"] = *o.mode;
    if (o.mask_width_hz)
        j["processing"]["mask_width_hz"] = *o.mask_width_hz;
    if (o.floor_db)
        j["processing"]["floor_db"] = *o.floor_db;
    if (o.smooth_frames)
        j["processing"]["smooth_frames"] = *o.smooth_frames;
    if (o.zero_pad)
        j["processing"]["zero_pad"] = *o.zero_pad;
    const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    return parse_scenario(j.dump(), base);
}

fs::path ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw PipelineError("io", "cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

std::ofstream open_out(const fs::path& p)
{
    std::ofstream out(p, std::ios::trunc);
    if (!out)
        throw PipelineError("io", "cannot write " + p.string());
    return out;
}

json stats_json(const std::optional<EstimateStats>& s)
{
    if (!s)
        return nullptr;
    return {{"mu_true_radps", s->mu_true_radps},
            {"mu_est_radps", s->mu_est_radps},
            {"abs_error_radps", std::abs(s->mu_est_radps - s->mu_true_radps)},
            {"std_radps", s->std_radps},
            {"n_valid_frames", s->n_valid_frames}};
}

void warn_stderr(std::string_view msg)
{
    std::cerr << "warning: " << msg << '\n';
}

// ---------------------------------------------------------------------------

int cmd_simulate(const fs::path& scenario_path, const fs::path& out_dir, const Overrides& o, bool csv)
{
    const Scenario sc = load_with_overrides(scenario_path, o);
    const IqCapture cap = simulate(sc, warn_stderr);
    ensure_dir(out_dir);
    write_capture(cap, out_dir / "capture.iq", {sc.waveform.rng_seed, scenario_hash(sc)});
    {
        auto out = open_out(out_dir / "truth.csv");
        write_ground_truth(out, truth_trajectories(sc));
    }
    if (csv) {
        auto out = open_out(out_dir / "capture.csv");
        write_capture_csv(cap, out);
    }
    std::cout << "simulate: " << sc.name << ", " << cap.size() << " samples, " << sc.targets.size()
              << " targets -> " << out_dir.string() << '\n';
    return 0;
}

int cmd_process(const fs::path& scenario_path, const fs::path& capture_path, const fs::path& out_dir,
                const Overrides& o, const std::string& truth_csv, std::optional<int> n_targets, bool tf_csv)
{
    const Scenario sc = load_with_overrides(scenario_path, o);
    CaptureMeta meta;
    const IqCapture cap = read_capture(capture_path, &meta);
    if (!meta.scenario_hash.empty() && meta.scenario_hash != scenario_hash(sc))
        warn_stderr("capture was produced from a different scenario (hash " + meta.scenario_hash + ")");
    if (std::abs(cap.sample_rate_hz - sc.waveform.sample_rate_hz) > 1e-9)
        throw ValidationError("capture sample rate does not match the scenario");

    const std::vector<TargetTrajectory> truth =
        truth_csv.empty() ? truth_trajectories(sc) : load_ground_truth(truth_csv, sc.processing.truth);
    const auto& pc = sc.processing;
    std::cerr << "smoothing: " << pc.smooth_frames << " frames = "
              << double(pc.smooth_frames * pc.decomp.stft.hop()) / cap.sample_rate_hz << " s\n";

    const ProcessResult res = process_capture(cap, sc.geometry, pc, truth, n_targets);

    ensure_dir(out_dir);
    write_tf_binary(res.doppler[0], out_dir / "doppler_rx1.tf");
    write_tf_binary(res.doppler[1], out_dir / "doppler_rx2.tf");
    write_tf_binary(res.interferometric, out_dir / "interferometric.tf");
    for (std::size_t t = 0; t < res.decomposed.n_tracks(); ++t)
        write_tf_binary(res.decomposed.tracks[t], out_dir / ("track" + std::to_string(t) + ".tf"));
    if (tf_csv) {
        auto w = [&](const TimeFrequencyMap& tf, const std::string& name) {
            auto out = open_out(out_dir / name);
            write_tf_csv(tf, out);
        };
        w(res.doppler[0], "doppler_rx1.csv");
        w(res.doppler[1], "doppler_rx2.csv");
        w(res.interferometric, "interferometric.csv");
        for (std::size_t t = 0; t < res.decomposed.n_tracks(); ++t)
            w(res.decomposed.tracks[t], "track" + std::to_string(t) + ".csv");
    }
    {
        auto out = open_out(out_dir / "association.jsonl");
        write_association_jsonl(res.decomposed.association, out);
    }
    json tracks = json::array();
    for (const auto& rep : res.tracks) {
        const std::string stem = "estimates_track" + std::to_string(rep.track_id);
        {
            auto out = open_out(out_dir / (stem + "_raw.csv"));
            write_estimates_csv(rep.raw, out);
        }
        {
            auto out = open_out(out_dir / (stem + "_smoothed.csv"));
            write_estimates_csv(rep.smoothed, out);
        }
        tracks.push_back({{"track_id", rep.track_id},
                          {"target_id", rep.target_id},
                          {"n_valid_frames", rep.raw.n_valid()},
                          {"raw", stats_json(rep.stats_raw)},
                          {"smoothed", stats_json(rep.stats_smoothed)}});
    }
    json st{{"scenario", sc.name},
            {"scenario_hash", scenario_hash(sc)},
            {"mode", to_string(res.mode)},
            {"smooth_frames", pc.smooth_frames},
            {"smooth_s", double(pc.smooth_frames * pc.decomp.stft.hop()) / cap.sample_rate_hz},
            {"n_frames", res.interferometric.n_frames()},
            {"tracks", tracks}};
    {
        auto out = open_out(out_dir / "stats.json");
        out << st.dump(2) << '\n';
    }
    for (const auto& rep : res.tracks) {
        std::cout << "track " << rep.track_id << " (target " << rep.target_id << ")";
        if (rep.stats_smoothed)
            std::cout << ": mu_true " << rep.stats_smoothed->mu_true_radps << " mu_est "
                      << rep.stats_smoothed->mu_est_radps << " std " << rep.stats_smoothed->std_radps;
        std::cout << '\n';
    }
    return 0;
}

std::vector<PointState> states_at(const Scenario& sc, const std::vector<TargetTrajectory>& truth, double t)
{
    std::vector<PointState> pts;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!truth[i].covers(t))
            throw ValidationError("time " + std::to_string(t) + " s is outside the scenario support");
        pts.push_back(point_state(kinematics_at(truth[i], sc.geometry, t, sc.processing.shifts.kinematics),
                                  truth[i].amplitude));
    }
    return pts;
}

int cmd_oracle(const fs::path& scenario_path, double t, const std::string& out_path, const Overrides& o)
{
    const Scenario sc = load_with_overrides(scenario_path, o);
    const auto truth = truth_trajectories(sc);
    const auto pts = states_at(sc, truth, t);
    const LineList full = full_response_lines(pts, sc.geometry, sc.pattern);
    const LineList dec = decomposed_response_lines(pts, sc.geometry, sc.pattern);
    json j{{"t_s", t},
           {"n_targets", pts.size()},
           {"approximation_degraded", full.approximation_degraded},
           {"full", json::parse(lines_to_json(full))},
           {"decomposed", json::parse(lines_to_json(dec))}};
    if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        auto out = open_out(out_path);
        out << j.dump(2) << '\n';
    }
    return 0;
}

int cmd_fit(const fs::path& scenario_path, const fs::path& capture_path, double t, const std::string& out_path,
            const Overrides& o, const FitConfig& base_cfg)
{
    const Scenario sc = load_with_overrides(scenario_path, o);
    const IqCapture cap = highpass(read_capture(capture_path), sc.processing.highpass);
    const TimeFrequencyMap tf = interferometric_stft(cap, sc.processing.decomp.stft, sc.processing.decomp.zero_pad);
    if (tf.n_frames() == 0)
        throw ValidationError("capture too short for one STFT frame");
    int frame = 0;
    for (int j = 1; j < tf.n_frames(); ++j)
        if (std::abs(tf.frame_times_s[j] - t) < std::abs(tf.frame_times_s[frame] - t))
            frame = j;

    const auto truth = truth_trajectories(sc);
    FitConfig cfg = base_cfg;
    const auto pts = states_at(sc, truth, tf.frame_times_s[frame]);
    if (!pts.empty()) {
        double m = 0.0;
        for (const auto& p : pts)
            m += p.v_radial_mps;
        cfg.mean_v_radial_mps = m / double(pts.size());
    }
    const FitResult r = fit(observed_frame(tf, frame), int(sc.targets.size()), sc.geometry, cfg);

    json cands = json::array();
    for (const auto& [v, w] : r.targets)
        cands.push_back({{"v_radial_mps", v}, {"omega_radps", w}});
    json truth_j = json::array();
    for (const auto& p : pts)
        truth_j.push_back({{"v_radial_mps", p.v_radial_mps}, {"omega_radps", p.omega_radps}});
    json j{{"frame", frame},
           {"frame_time_s", tf.frame_times_s[frame]},
           {"candidates", cands},
           {"truth", truth_j},
           {"loss", r.loss},
           {"grid_loss", r.grid_loss},
           {"grid",
            {{"points", r.grid_points},
             {"omega_radps", {cfg.omega.min, cfg.omega.max, cfg.omega.step}},
             {"v_radial_mps", {cfg.v_radial.min, cfg.v_radial.max, cfg.v_radial.step}},
             {"mean_v_radial_mps", cfg.mean_v_radial_mps}}},
           {"iterations", r.iterations},
           {"loss_history", r.loss_history}};
    if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        auto out = open_out(out_path);
        out << j.dump(2) << '\n';
    }
    return 0;
}

EstimateSeries read_estimates(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open estimates file " + path.string());
    EstimateSeries s;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (n == 1) {
            if (line != "frame_time_s,f_hz,omega_radps,valid")
                throw ParseError("unexpected estimates header", n);
            continue;
        }
        if (line.empty())
            continue;
        std::stringstream ss(line);
        EstimatePoint p;
        char c1, c2, c3;
        int valid = 0;
        if (!(ss >> p.t_s >> c1 >> p.f_hz >> c2 >> p.omega_radps >> c3 >> valid) || c1 != ',' || c2 != ',' ||
            c3 != ',')
            throw ParseError("malformed estimates row", n);
        p.valid = valid != 0;
        s.points.push_back(p);
    }
    return s;
}

int cmd_eval(const fs::path& scenario_path, const fs::path& estimates_path, const std::string& truth_csv,
             int target_id, const Overrides& o)
{
    const Scenario sc = load_with_overrides(scenario_path, o);
    const auto truth = truth_csv.empty() ? truth_trajectories(sc) : load_ground_truth(truth_csv, sc.processing.truth);
    const TargetTrajectory* tr = nullptr;
    for (const auto& t : truth)
        if (t.target_id == target_id)
            tr = &t;
    if (!tr)
        throw ValidationError("no ground truth for target " + std::to_string(target_id));
    const EstimateStats s = stats(read_estimates(estimates_path), truth_omega(*tr, sc.geometry));
    std::cout << stats_json(s).dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Interferometric radar angular-velocity toolkit"};
    app.require_subcommand(1);

    const char* env_out = std::getenv("ANGVEL_OUT_DIR");
    std::string out_dir = env_out && *env_out ? env_out : ".";
    std::string scenario;
    Overrides ov;
    std::string mode;
    std::uint64_t seed = 0;
    double mask_width = 0.0, floor_db = 0.0;
    int smooth_frames = 0, zero_pad = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory (default $ANGVEL_OUT_DIR or .)");
        sub->add_option("--mode", mode, "known | detected")->check(CLI::IsMember({"known", "detected"}));
        sub->add_option("--seed", seed, "Override the noise seed");
        sub->add_option("--mask-width-hz", mask_width, "Decomposition mask width");
        sub->add_option("--floor-db", floor_db, "Peak validity floor relative to the track maximum");
        sub->add_option("--smooth-frames", smooth_frames, "Moving-average length in frames");
        sub->add_option("--zero-pad", zero_pad, "Interferometric DFT zero-pad factor");
    };

    auto* sim = app.add_subcommand("simulate", "Synthesise a two-channel capture and ground truth");
    common(sim);
    bool capture_csv = false;
    sim->add_flag("--csv", capture_csv, "Also write capture.csv");

    auto* proc = app.add_subcommand("process", "Run the decomposition and estimation chain");
    common(proc);
    std::string capture, truth_csv;
    std::optional<int> n_targets;
    bool tf_csv = false;
    proc->add_option("--capture", capture, "Capture file (default <out>/capture.iq)");
    proc->add_option("--truth", truth_csv, "Ground-truth CSV (default: from the scenario)");
    proc->add_option("--n-targets", n_targets, "Number of targets to decompose");
    proc->add_flag("--tf-csv", tf_csv, "Also write time-frequency maps as CSV");

    auto* ora = app.add_subcommand("oracle", "Closed-form line lists at one instant");
    common(ora);
    double t_s = 0.0;
    std::string ora_out;
    ora->add_option("--t", t_s, "Time in seconds")->required();
    ora->add_option("--json", ora_out, "Write to this file instead of stdout");

    auto* fitc = app.add_subcommand("fit", "Model-based fit of one interferometric frame");
    common(fitc);
    FitConfig fit_cfg;
    std::string fit_out;
    fitc->add_option("--capture", capture, "Capture file (default <out>/capture.iq)");
    fitc->add_option("--t", t_s, "Frame time in seconds")->required();
    fitc->add_option("--json", fit_out, "Write to this file instead of stdout");
    fitc->add_option("--omega-step", fit_cfg.omega.step, "Grid step for omega (rad/s)");
    fitc->add_option("--v-step", fit_cfg.v_radial.step, "Grid step for radial velocity (m/s)");

    auto* ev = app.add_subcommand("eval", "Statistics of an estimates CSV against ground truth");
    common(ev);
    std::string estimates;
    int target_id = 0;
    ev->add_option("--estimates", estimates, "Estimates CSV")->required();
    ev->add_option("--truth", truth_csv, "Ground-truth CSV (default: from the scenario)");
    ev->add_option("--target-id", target_id, "Target to compare against")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    auto set = [](CLI::App* sub, const char* name, auto& dst, const auto& value) {
        if (sub->count(name) > 0)
            dst = value;
    };
    CLI::App* active = app.get_subcommands().front();
    set(active, "--mode", ov.mode, mode);
    set(active, "--seed", ov.seed, seed);
    set(active, "--mask-width-hz", ov.mask_width_hz, mask_width);
    set(active, "--floor-db", ov.floor_db, floor_db);
    set(active, "--smooth-frames", ov.smooth_frames, smooth_frames);
    set(active, "--zero-pad", ov.zero_pad, zero_pad);
    const fs::path capture_path = capture.empty() ? fs::path(out_dir) / "capture.iq" : fs::path(capture);

    try {
        if (active == sim)
            return cmd_simulate(scenario, out_dir, ov, capture_csv);
        if (active == proc)
            return cmd_process(scenario, capture_path, out_dir, ov, truth_csv, n_targets, tf_csv);
        if (active == ora)
            return cmd_oracle(scenario, t_s, ora_out, ov);
        if (active == fitc)
            return cmd_fit(scenario, capture_path, t_s, fit_out, ov, fit_cfg);
        if (active == ev)
            return cmd_eval(scenario, estimates, truth_csv, target_id, ov);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const PipelineError& e) {
        std::cerr << "error in stage " << e.stage() << ": " << e.what() << '\n';
        return kExitPipeline;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPipeline;
    }
    return kExitPipeline;
}
