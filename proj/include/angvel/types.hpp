// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Core>

namespace angvel {

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kPi = std::numbers::pi;

using Complex = std::complex<double>;

template <typename Scalar>
using ComplexVectorX = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Row-major so that one STFT frame is a contiguous row.
template <typename Scalar>
using ComplexFrames = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ComplexVector = ComplexVectorX<double>;
using RealVector = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps to (-pi, pi].
inline double wrap_phase(double phase)
{
    double w = std::remainder(phase, 2.0 * kPi);
    if (w <= -kPi)
        w += 2.0 * kPi;
    return w;
}

} // namespace angvel
