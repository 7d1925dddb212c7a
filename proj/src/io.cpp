// SPDX-License-Identifier: Apache-2.0
#include "angvel/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "angvel/errors.hpp"

namespace angvel {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_f32(std::vector<char>& buf, double v)
{
    float f = float(v);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    for (int b = 0; b < 4; ++b)
        buf.push_back(char((u >> (8 * b)) & 0xffu));
}

float get_f32(const char* p)
{
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b)
        u |= std::uint32_t(static_cast<unsigned char>(p[b])) << (8 * b);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

void write_bytes(const std::filesystem::path& path, const std::vector<char>& buf)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw PipelineError("io", "cannot write " + path.string());
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out)
        throw PipelineError("io", "write failed for " + path.string());
}

std::vector<char> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw PipelineError("io", "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& data_path)
{
    std::filesystem::path p = data_path;
    p.replace_extension(".json");
    return p;
}

void write_capture(const IqCapture& capture, const std::filesystem::path& path, const CaptureMeta& meta)
{
    capture.validate();
    if (sidecar_path(path) == path)
        throw ValidationError("capture path must not end in .json");
    std::vector<char> buf;
    buf.reserve(capture.size() * 16);
    for (std::size_t k = 0; k < capture.size(); ++k) {
        put_f32(buf, capture.ch1[Eigen::Index(k)].real());
        put_f32(buf, capture.ch1[Eigen::Index(k)].imag());
        put_f32(buf, capture.ch2[Eigen::Index(k)].real());
        put_f32(buf, capture.ch2[Eigen::Index(k)].imag());
    }
    write_bytes(path, buf);
    json side;
    side["format"] = "iq_f32le_interleaved";
    side["channels"] = json::array({"rx1", "rx2"});
    side["sample_rate_hz"] = capture.sample_rate_hz;
    side["t0_s"] = capture.t0_s;
    side["n_samples"] = capture.size();
    side["seed"] = meta.seed;
    side["scenario_hash"] = meta.scenario_hash;
    write_json(sidecar_path(path), side);
}

IqCapture read_capture(const std::filesystem::path& path, CaptureMeta* meta)
{
    const std::vector<char> buf = read_bytes(path);
    const json side = read_json(sidecar_path(path));
    IqCapture cap;
    std::size_t n = 0;
    try {
        cap.sample_rate_hz = side.at("sample_rate_hz").get<double>();
        cap.t0_s = side.at("t0_s").get<double>();
        n = side.at("n_samples").get<std::size_t>();
        if (meta) {
            meta->seed = side.value("seed", std::uint64_t(0));
            meta->scenario_hash = side.value("scenario_hash", std::string());
        }
    } catch (const json::exception& e) {
        throw ValidationError(sidecar_path(path).string() + ": " + e.what());
    }
    if (buf.size() != n * 16)
        throw ValidationError(path.string() + ": size does not match n_samples in sidecar");
    cap.ch1.resize(Eigen::Index(n));
    cap.ch2.resize(Eigen::Index(n));
    for (std::size_t k = 0; k < n; ++k) {
        const char* p = buf.data() + 16 * k;
        cap.ch1[Eigen::Index(k)] = Complex(get_f32(p), get_f32(p + 4));
        cap.ch2[Eigen::Index(k)] = Complex(get_f32(p + 8), get_f32(p + 12));
    }
    cap.validate();
    return cap;
}

void write_capture_csv(const IqCapture& capture, std::ostream& out)
{
    out << "t_s,i1,q1,i2,q2\n";
    for (std::size_t k = 0; k < capture.size(); ++k) {
        const auto i = Eigen::Index(k);
        out << fmt(capture.t0_s + double(k) / capture.sample_rate_hz) << ',' << fmt(capture.ch1[i].real()) << ','
            << fmt(capture.ch1[i].imag()) << ',' << fmt(capture.ch2[i].real()) << ',' << fmt(capture.ch2[i].imag())
            << '\n';
    }
}

void write_tf_csv(const TimeFrequencyMap& tf, std::ostream& out, std::optional<std::pair<double, double>> band_hz)
{
    out << "frame_time_s,freq_hz,magnitude_db,phase_rad\n";
    for (int j = 0; j < tf.n_frames(); ++j) {
        for (int k = 0; k < tf.n_bins(); ++k) {
            const double f = tf.freq_axis_hz[k];
            if (band_hz && (f < band_hz->first || f > band_hz->second))
                continue;
            const Complex v = tf.frames(j, k);
            const double mag = std::abs(v);
            const double db = mag > 0.0 ? 20.0 * std::log10(mag) : -400.0;
            out << fmt(tf.frame_times_s[j]) << ',' << fmt(f) << ',' << fmt(db) << ',' << fmt(std::arg(v)) << '\n';
        }
    }
}

void write_tf_binary(const TimeFrequencyMap& tf, const std::filesystem::path& path)
{
    std::vector<char> buf;
    buf.reserve(std::size_t(tf.n_frames()) * std::size_t(tf.n_bins()) * 8);
    for (int j = 0; j < tf.n_frames(); ++j) {
        for (int k = 0; k < tf.n_bins(); ++k) {
            put_f32(buf, tf.frames(j, k).real());
            put_f32(buf, tf.frames(j, k).imag());
        }
    }
    write_bytes(path, buf);
    json side;
    side["format"] = "complex_f32le_row_major";
    side["label"] = tf.label;
    side["n_frames"] = tf.n_frames();
    side["n_bins"] = tf.n_bins();
    side["sample_rate_hz"] = tf.sample_rate_hz;
    side["window_len"] = tf.window_len;
    side["hop"] = tf.hop;
    side["window"] = to_string(tf.window);
    side["freq_start_hz"] = tf.n_bins() > 0 ? tf.freq_axis_hz[0] : 0.0;
    side["freq_step_hz"] = tf.n_bins() > 1 ? tf.freq_axis_hz[1] - tf.freq_axis_hz[0] : 0.0;
    std::vector<double> times(tf.frame_times_s.data(), tf.frame_times_s.data() + tf.frame_times_s.size());
    side["frame_times_s"] = times;
    write_json(sidecar_path(path), side);
}

TimeFrequencyMap read_tf_binary(const std::filesystem::path& path)
{
    const std::vector<char> buf = read_bytes(path);
    const json side = read_json(sidecar_path(path));
    TimeFrequencyMap tf;
    try {
        const int nf = side.at("n_frames").get<int>();
        const int nb = side.at("n_bins").get<int>();
        if (buf.size() != std::size_t(nf) * std::size_t(nb) * 8)
            throw ValidationError(path.string() + ": size does not match sidecar shape");
        tf.label = side.value("label", std::string());
        tf.sample_rate_hz = side.at("sample_rate_hz").get<double>();
        tf.window_len = side.at("window_len").get<int>();
        tf.hop = side.at("hop").get<int>();
        tf.window = window_from_string(side.at("window").get<std::string>());
        tf.freq_axis_hz = centered_frequency_axis(nb, tf.sample_rate_hz);
        const auto times = side.at("frame_times_s").get<std::vector<double>>();
        if (int(times.size()) != nf)
            throw ValidationError(path.string() + ": frame time count mismatch");
        tf.frame_times_s = Eigen::Map<const RealVector>(times.data(), Eigen::Index(times.size()));
        tf.frames.resize(nf, nb);
        for (int j = 0; j < nf; ++j) {
            for (int k = 0; k < nb; ++k) {
                const char* p = buf.data() + (std::size_t(j) * std::size_t(nb) + std::size_t(k)) * 8;
                tf.frames(j, k) = Complex(get_f32(p), get_f32(p + 4));
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(sidecar_path(path).string() + ": " + e.what());
    }
    return tf;
}

std::string lines_to_json(const LineList& lines)
{
    json arr = json::array();
    for (const auto& l : lines.lines) {
        arr.push_back({{"freq_hz", l.freq_hz},
                       {"amp_re", l.amplitude.real()},
                       {"amp_im", l.amplitude.imag()},
                       {"kind", l.kind == LineKind::Self ? "self" : "cross"},
                       {"n", l.n},
                       {"k", l.k}});
    }
    return arr.dump(2);
}

void write_estimates_csv(const EstimateSeries& series, std::ostream& out)
{
    out << "frame_time_s,f_hz,omega_radps,valid\n";
    for (const auto& p : series.points)
        out << fmt(p.t_s) << ',' << fmt(p.f_hz) << ',' << fmt(p.omega_radps) << ',' << (p.valid ? 1 : 0) << '\n';
}

void write_association_jsonl(const AssociationMap& map, std::ostream& out)
{
    for (const auto& fa : map) {
        json pairs = json::array();
        for (const auto& pr : fa.pairs)
            pairs.push_back({pr.first, pr.second, pr.track_id});
        json row{{"frame", fa.frame_index}, {"pairs", pairs}, {"cost", fa.cost}};
        out << row.dump() << '\n';
    }
}

} // namespace angvel
