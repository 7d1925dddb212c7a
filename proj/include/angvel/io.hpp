// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include "angvel/decomp.hpp"
#include "angvel/dsp.hpp"
#include "angvel/estimate.hpp"
#include "angvel/model.hpp"
#include "angvel/synth.hpp"

namespace angvel {

struct CaptureMeta {
    std::uint64_t seed = 0;
    std::string scenario_hash;
};

/// Sidecar path: same stem, `.json` extension.
std::filesystem::path sidecar_path(const std::filesystem::path& data_path);

/// Little-endian float32 frames [I1 Q1 I2 Q2] plus a JSON sidecar with
/// sample_rate_hz, t0_s, n_samples, seed and scenario_hash.
void write_capture(const IqCapture& capture, const std::filesystem::path& path, const CaptureMeta& meta);
IqCapture read_capture(const std::filesystem::path& path, CaptureMeta* meta = nullptr);

/// Debug dump: `t_s,i1,q1,i2,q2`.
void write_capture_csv(const IqCapture& capture, std::ostream& out);

/// `frame_time_s,freq_hz,magnitude_db,phase_rad`, optionally restricted to a band.
void write_tf_csv(const TimeFrequencyMap& tf, std::ostream& out,
                  std::optional<std::pair<double, double>> band_hz = std::nullopt);

/// Little-endian complex float32 frames, row-major, plus a JSON sidecar.
void write_tf_binary(const TimeFrequencyMap& tf, const std::filesystem::path& path);
TimeFrequencyMap read_tf_binary(const std::filesystem::path& path);

/// `[{freq_hz, amp_re, amp_im, kind, n, k}]`
std::string lines_to_json(const LineList& lines);

/// `frame_time_s,f_hz,omega_radps,valid`
void write_estimates_csv(const EstimateSeries& series, std::ostream& out);

/// One JSON object per frame: {frame, pairs: [[w1, w2, track], ...], cost}.
void write_association_jsonl(const AssociationMap& map, std::ostream& out);

} // namespace angvel
