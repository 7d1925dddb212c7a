// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <string>
#include <vector>

#include "angvel/synth.hpp"
#include "angvel/types.hpp"

namespace angvel {

// ---------------------------------------------------------------------------
// Windows

enum class WindowKind { Rect, Hann, Hamming, Blackman };

WindowKind window_from_string(const std::string& name);
std::string to_string(WindowKind kind);

/// Periodic (DFT-even) window of length n.
RealVector make_window(WindowKind kind, int n);

/// Closed-form DTFT of the periodic window at `nu` bins (fs/n units) from DC.
Complex window_dtft(WindowKind kind, int n, double nu);

// ---------------------------------------------------------------------------
// IIR filtering

/// One biquad, a0 normalised to 1: y = b0 x + b1 x1 + b2 x2 - a1 y1 - a2 y2.
template <typename Scalar>
struct Biquad {
    Scalar b0{1}, b1{0}, b2{0}, a1{0}, a2{0};
};

/// Cascade of second-order sections in transposed direct form II.
template <typename Scalar>
class SosCascade {
public:
    SosCascade() = default;
    explicit SosCascade(std::vector<Biquad<Scalar>> sections) : sections_(std::move(sections)) {}

    const std::vector<Biquad<Scalar>>& sections() const { return sections_; }

    /// Butterworth high-pass via bilinear transform with pre-warping.
    static SosCascade butterworth_highpass(int order, Scalar cutoff_hz, Scalar sample_rate_hz);

    /// |H(e^{j 2 pi f / fs})|.
    Scalar magnitude(Scalar freq_hz, Scalar sample_rate_hz) const;

    /// Filters in place from zero initial state; T may be real or complex.
    template <typename T>
    void apply(T* data, std::size_t n) const
    {
        for (const auto& s : sections_) {
            T z1{0}, z2{0};
            for (std::size_t k = 0; k < n; ++k) {
                const T x = data[k];
                const T y = s.b0 * x + z1;
                z1 = s.b1 * x - s.a1 * y + z2;
                z2 = s.b2 * x - s.a2 * y;
                data[k] = y;
            }
        }
    }

private:
    std::vector<Biquad<Scalar>> sections_;
};

struct HighpassConfig {
    int order = 3;
    double cutoff_hz = 1.0;
    bool zero_phase = false; ///< forward-backward instead of single causal pass
};

/// Applies the Butterworth high-pass to each channel independently.
IqCapture highpass(const IqCapture& capture, const HighpassConfig& cfg = {});

// ---------------------------------------------------------------------------
// Spectral analysis

/// Forward/inverse DFT helpers with DC-centred (fftshift) ordering.
ComplexVector fft(const ComplexVector& x, int n);           ///< zero-pads/truncates to n
ComplexVector ifft(const ComplexVector& x);                 ///< scaled by 1/n
ComplexVector fftshift(const ComplexVector& x);
ComplexVector ifftshift(const ComplexVector& x);

/// Two-sided, DC-centred frequency axis for an n-point DFT.
RealVector centered_frequency_axis(int n, double sample_rate_hz);

struct StftConfig {
    int window_len = 1024;
    int fft_len = 1024;
    int overlap = 960;
    WindowKind window = WindowKind::Hann;

    int hop() const { return window_len - overlap; }
    void validate() const;
    /// Same framing with the DFT length multiplied by `factor`.
    StftConfig zero_padded(int factor) const;
};

/// Complex STFT frames [n_frames x fft_len], DC-centred, normalised by the
/// window's coherent gain so a unit complex exponential peaks at 1.
struct TimeFrequencyMap {
    ComplexFrames<double> frames;
    RealVector frame_times_s;
    RealVector freq_axis_hz;
    double sample_rate_hz = 0.0;
    int window_len = 0;
    int hop = 0;
    WindowKind window = WindowKind::Hann;
    std::string label;

    int n_frames() const { return int(frames.rows()); }
    int n_bins() const { return int(frames.cols()); }
    double bin_hz() const { return sample_rate_hz / double(n_bins()); }
    /// Index of the bin nearest to `freq_hz`, clamped to the axis.
    int nearest_bin(double freq_hz) const;
};

std::size_t stft_frame_count(std::size_t n_samples, const StftConfig& cfg);
RealVector stft_frame_times(std::size_t n_samples, double sample_rate_hz, const StftConfig& cfg,
                            double t0_s = 0.0);

TimeFrequencyMap stft(const ComplexVector& x, double sample_rate_hz, const StftConfig& cfg,
                      double t0_s = 0.0, std::string label = {});

/// |X|^2 of a single windowed DFT over the whole sequence, DC-centred.
RealVector periodogram(const ComplexVector& x, WindowKind window = WindowKind::Rect);

/// r[k] = ch1[k] * conj(ch2[k]).
ComplexVector interferometric_response(const IqCapture& capture);

/// STFT of the interferometric response with the DFT zero-padded by `zero_pad`.
TimeFrequencyMap interferometric_stft(const IqCapture& capture, const StftConfig& cfg, int zero_pad);

/// Fractional offset in (-0.5, 0.5) of a 3-point parabola through mags[k-1..k+1].
double quadratic_peak_offset(double left, double center, double right);

struct SpectralPeak {
    int bin = 0;
    double freq_hz = 0.0;
    double magnitude = 0.0;
};

/// Interpolated maximum of |row|.
SpectralPeak find_peak(const Eigen::Ref<const ComplexVector>& row, const RealVector& freq_axis_hz);

} // namespace angvel
