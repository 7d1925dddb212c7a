// SPDX-License-Identifier: Apache-2.0
#include "angvel/dsp.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "angvel/errors.hpp"

namespace angvel {

// ---------------------------------------------------------------------------
// Windows

namespace {

/// w[n] = sum_m (-1)^m a_m cos(2 pi m n / N)
std::vector<double> cosine_terms(WindowKind kind)
{
    switch (kind) {
    case WindowKind::Rect: return {1.0};
    case WindowKind::Hann: return {0.5, 0.5};
    case WindowKind::Hamming: return {0.54, 0.46};
    case WindowKind::Blackman: return {0.42, 0.5, 0.08};
    }
    return {1.0};
}

/// sum_{n<N} exp(-j 2 pi x n / N)
Complex dirichlet(double x, int n)
{
    const double s = std::sin(kPi * x / double(n));
    const Complex rot = std::polar(1.0, -kPi * x * double(n - 1) / double(n));
    if (std::abs(s) < 1e-14)
        return rot * double(n) * std::cos(kPi * x) / std::cos(kPi * x / double(n));
    return rot * (std::sin(kPi * x) / s);
}

} // namespace

WindowKind window_from_string(const std::string& name)
{
    if (name == "rect" || name == "rectangular")
        return WindowKind::Rect;
    if (name == "hann" || name == "hanning")
        return WindowKind::Hann;
    if (name == "hamming")
        return WindowKind::Hamming;
    if (name == "blackman")
        return WindowKind::Blackman;
    throw ValidationError("unknown window '" + name + "'");
}

std::string to_string(WindowKind kind)
{
    switch (kind) {
    case WindowKind::Rect: return "rect";
    case WindowKind::Hann: return "hann";
    case WindowKind::Hamming: return "hamming";
    case WindowKind::Blackman: return "blackman";
    }
    return "rect";
}

RealVector make_window(WindowKind kind, int n)
{
    const auto a = cosine_terms(kind);
    RealVector w(n);
    for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (std::size_t m = 0; m < a.size(); ++m)
            v += (m % 2 ? -1.0 : 1.0) * a[m] * std::cos(2.0 * kPi * double(m) * double(i) / double(n));
        w[i] = v;
    }
    return w;
}

Complex window_dtft(WindowKind kind, int n, double nu)
{
    const auto a = cosine_terms(kind);
    Complex sum = a[0] * dirichlet(nu, n);
    for (std::size_t m = 1; m < a.size(); ++m) {
        const double sign = (m % 2 ? -1.0 : 1.0);
        sum += sign * 0.5 * a[m] * (dirichlet(nu - double(m), n) + dirichlet(nu + double(m), n));
    }
    return sum;
}

// ---------------------------------------------------------------------------
// IIR

template <typename Scalar>
SosCascade<Scalar> SosCascade<Scalar>::butterworth_highpass(int order, Scalar cutoff_hz, Scalar sample_rate_hz)
{
    if (order < 1)
        throw ValidationError("butterworth: order must be >= 1");
    if (!(cutoff_hz > 0) || !(cutoff_hz < sample_rate_hz / 2))
        throw ValidationError("butterworth: cutoff must lie in (0, Nyquist)");

    const double k = 2.0 * double(sample_rate_hz);
    const double wc = k * std::tan(kPi * double(cutoff_hz) / double(sample_rate_hz));
    std::vector<Biquad<Scalar>> sections;

    for (int i = 0; i < order / 2; ++i) {
        const double re = std::cos(kPi * double(2 * i + order + 1) / double(2 * order));
        const double b = -2.0 * re * wc;
        const double a0 = k * k + b * k + wc * wc;
        Biquad<Scalar> s;
        s.b0 = Scalar(k * k / a0);
        s.b1 = Scalar(-2.0 * k * k / a0);
        s.b2 = Scalar(k * k / a0);
        s.a1 = Scalar((2.0 * wc * wc - 2.0 * k * k) / a0);
        s.a2 = Scalar((k * k - b * k + wc * wc) / a0);
        sections.push_back(s);
    }
    if (order % 2) {
        const double a0 = k + wc;
        Biquad<Scalar> s;
        s.b0 = Scalar(k / a0);
        s.b1 = Scalar(-k / a0);
        s.a1 = Scalar((wc - k) / a0);
        sections.push_back(s);
    }
    return SosCascade(std::move(sections));
}

template <typename Scalar>
Scalar SosCascade<Scalar>::magnitude(Scalar freq_hz, Scalar sample_rate_hz) const
{
    const std::complex<double> z1 = std::polar(1.0, -2.0 * kPi * double(freq_hz) / double(sample_rate_hz));
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h(1.0, 0.0);
    for (const auto& s : sections_) {
        const auto num = double(s.b0) + double(s.b1) * z1 + double(s.b2) * z2;
        const auto den = 1.0 + double(s.a1) * z1 + double(s.a2) * z2;
        h *= num / den;
    }
    return Scalar(std::abs(h));
}

template class SosCascade<double>;
template class SosCascade<float>;

IqCapture highpass(const IqCapture& capture, const HighpassConfig& cfg)
{
    capture.validate();
    const auto sos = SosCascade<double>::butterworth_highpass(cfg.order, cfg.cutoff_hz, capture.sample_rate_hz);
    IqCapture out = capture;
    for (ComplexVector* ch : {&out.ch1, &out.ch2}) {
        sos.apply(ch->data(), std::size_t(ch->size()));
        if (cfg.zero_phase) {
            ch->reverseInPlace();
            sos.apply(ch->data(), std::size_t(ch->size()));
            ch->reverseInPlace();
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectral analysis

ComplexVector fft(const ComplexVector& x, int n)
{
    ComplexVector in = ComplexVector::Zero(n);
    const Eigen::Index m = std::min<Eigen::Index>(n, x.size());
    in.head(m) = x.head(m);
    Eigen::FFT<double> engine;
    ComplexVector out(n);
    engine.fwd(out, in);
    return out;
}

ComplexVector ifft(const ComplexVector& x)
{
    Eigen::FFT<double> engine;
    ComplexVector out(x.size());
    engine.inv(out, x);
    return out;
}

ComplexVector fftshift(const ComplexVector& x)
{
    const Eigen::Index n = x.size();
    ComplexVector out(n);
    for (Eigen::Index k = 0; k < n; ++k)
        out[k] = x[(k - n / 2 + n) % n];
    return out;
}

ComplexVector ifftshift(const ComplexVector& x)
{
    const Eigen::Index n = x.size();
    ComplexVector out(n);
    for (Eigen::Index k = 0; k < n; ++k)
        out[(k - n / 2 + n) % n] = x[k];
    return out;
}

RealVector centered_frequency_axis(int n, double sample_rate_hz)
{
    RealVector f(n);
    for (int k = 0; k < n; ++k)
        f[k] = double(k - n / 2) * sample_rate_hz / double(n);
    return f;
}

void StftConfig::validate() const
{
    if (!(0 <= overlap && overlap < window_len && window_len <= fft_len))
        throw ValidationError("stft: require 0 <= overlap < window_len <= fft_len");
}

StftConfig StftConfig::zero_padded(int factor) const
{
    if (factor < 1)
        throw ValidationError("stft: zero-pad factor must be >= 1");
    StftConfig c = *this;
    c.fft_len = fft_len * factor;
    return c;
}

int TimeFrequencyMap::nearest_bin(double freq_hz) const
{
    const double idx = std::round((freq_hz - freq_axis_hz[0]) / bin_hz());
    return int(std::clamp(idx, 0.0, double(n_bins() - 1)));
}

std::size_t stft_frame_count(std::size_t n_samples, const StftConfig& cfg)
{
    if (n_samples < std::size_t(cfg.window_len))
        return 0;
    return (n_samples - std::size_t(cfg.window_len)) / std::size_t(cfg.hop()) + 1;
}

RealVector stft_frame_times(std::size_t n_samples, double sample_rate_hz, const StftConfig& cfg, double t0_s)
{
    const auto n = Eigen::Index(stft_frame_count(n_samples, cfg));
    RealVector t(n);
    for (Eigen::Index j = 0; j < n; ++j)
        t[j] = t0_s + (double(j * cfg.hop()) + 0.5 * double(cfg.window_len)) / sample_rate_hz;
    return t;
}

TimeFrequencyMap stft(const ComplexVector& x, double sample_rate_hz, const StftConfig& cfg, double t0_s,
                      std::string label)
{
    cfg.validate();
    if (x.size() < cfg.window_len)
        throw ValidationError("stft: sequence shorter than one window");

    const RealVector w = make_window(cfg.window, cfg.window_len);
    const double gain = w.sum();
    const auto n_frames = Eigen::Index(stft_frame_count(std::size_t(x.size()), cfg));

    TimeFrequencyMap tf;
    tf.frames.resize(n_frames, cfg.fft_len);
    tf.frame_times_s = stft_frame_times(std::size_t(x.size()), sample_rate_hz, cfg, t0_s);
    tf.freq_axis_hz = centered_frequency_axis(cfg.fft_len, sample_rate_hz);
    tf.sample_rate_hz = sample_rate_hz;
    tf.window_len = cfg.window_len;
    tf.hop = cfg.hop();
    tf.window = cfg.window;
    tf.label = std::move(label);

    Eigen::FFT<double> engine;
    ComplexVector seg = ComplexVector::Zero(cfg.fft_len);
    ComplexVector spec(cfg.fft_len);
    const Eigen::Index n = cfg.fft_len;
    for (Eigen::Index j = 0; j < n_frames; ++j) {
        seg.head(cfg.window_len) = x.segment(j * cfg.hop(), cfg.window_len).cwiseProduct(w.cast<Complex>());
        engine.fwd(spec, seg);
        for (Eigen::Index k = 0; k < n; ++k)
            tf.frames(j, k) = spec[(k - n / 2 + n) % n] / gain;
    }
    return tf;
}

RealVector periodogram(const ComplexVector& x, WindowKind window)
{
    const RealVector w = make_window(window, int(x.size()));
    const ComplexVector spec = fftshift(fft(x.cwiseProduct(w.cast<Complex>()), int(x.size())));
    return spec.cwiseAbs2();
}

ComplexVector interferometric_response(const IqCapture& capture)
{
    if (capture.ch1.size() != capture.ch2.size())
        throw ValidationError("interferometric response: channel lengths differ");
    return capture.ch1.cwiseProduct(capture.ch2.conjugate());
}

TimeFrequencyMap interferometric_stft(const IqCapture& capture, const StftConfig& cfg, int zero_pad)
{
    return stft(interferometric_response(capture), capture.sample_rate_hz, cfg.zero_padded(zero_pad), capture.t0_s,
                "interferometric");
}

double quadratic_peak_offset(double left, double center, double right)
{
    const double denom = left - 2.0 * center + right;
    if (!(denom < 0.0))
        return 0.0;
    return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

SpectralPeak find_peak(const Eigen::Ref<const ComplexVector>& row, const RealVector& freq_axis_hz)
{
    SpectralPeak p;
    const Eigen::Index n = row.size();
    if (n == 0)
        return p;
    Eigen::Index best = 0;
    double best_mag = std::abs(row[0]);
    for (Eigen::Index k = 1; k < n; ++k) {
        const double m = std::abs(row[k]);
        if (m > best_mag) {
            best_mag = m;
            best = k;
        }
    }
    p.bin = int(best);
    p.freq_hz = freq_axis_hz[best];
    p.magnitude = best_mag;
    if (best > 0 && best + 1 < n) {
        const double l = std::abs(row[best - 1]);
        const double r = std::abs(row[best + 1]);
        const double delta = quadratic_peak_offset(l, best_mag, r);
        const double step = freq_axis_hz[1] - freq_axis_hz[0];
        p.freq_hz += delta * step;
        p.magnitude = best_mag - 0.25 * (l - r) * delta;
    }
    return p;
}

} // namespace angvel
