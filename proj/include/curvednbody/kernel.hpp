#pragma once

// Scalar-generic right-hand side of the equations of motion. The integrator
// instantiates it with binary128 to keep round-off below the growth of the
// unstable modes of the relative equilibria it is benchmarked on.

#include "curvednbody/errors.hpp"
#include "curvednbody/geometry.hpp"

#include <quadmath.h>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace cnb::kernel {

using quad = __float128;

template <class T>
using Vec = std::array<T, 4>;

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr double epsilon = 2.220446049250313e-16;
    static double sqrt(double x) { return std::sqrt(x); }
};

template <>
struct ScalarTraits<quad> {
    static constexpr double epsilon = 1.925929944387236e-34;
    static quad sqrt(quad x) { return sqrtq(x); }
};

/// Positions and velocities of every body.
template <class T>
struct Phase {
    std::vector<Vec<T>> q;
    std::vector<Vec<T>> v;
};

template <class T>
T inner(const Vec<T>& a, const Vec<T>& b, Sigma sigma) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + sign(sigma) * (a[3] * b[3]);
}

template <class T>
Vec<T> from_eigen(const Vec4& v) {
    return {T(v[0]), T(v[1]), T(v[2]), T(v[3])};
}

template <class T>
Vec4 to_eigen(const Vec<T>& v) {
    return Vec4(double(v[0]), double(v[1]), double(v[2]), double(v[3]));
}

/// [σ − σ c²]^{3/2} for c = qi ⊙ qj, or SingularityError below the threshold.
template <class T>
T pair_denominator(const Vec<T>& qi, const Vec<T>& qj, Sigma sigma, std::size_t i, std::size_t j,
                   double threshold) {
    const double s = sign(sigma);
    const T c = inner(qi, qj, sigma);
    const T bracket = s - s * c * c;
    if (!(bracket >= threshold)) {
        const auto kind = (sigma == Sigma::Sphere && c < 0) ? SingularityKind::Antipodal : SingularityKind::Collision;
        throw SingularityError(kind, i, j, double(bracket));
    }
    return bracket * ScalarTraits<T>::sqrt(bracket);
}

/// q̈_i = Σ_{j≠i} m_j [q_j − σ(q_i⊙q_j) q_i] / [σ − σ(q_i⊙q_j)²]^{3/2} − σ(q̇_i⊙q̇_i) q_i,
/// summed in ascending j.
template <class T>
void acceleration(std::span<const Vec<T>> q, std::span<const Vec<T>> v, std::span<const double> m, Sigma sigma,
                  double threshold, std::span<Vec<T>> out) {
    const double s = sign(sigma);
    const std::size_t n = q.size();
    for (std::size_t i = 0; i < n; ++i) {
        Vec<T> a{};
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const T c = inner(q[i], q[j], sigma);
            const T scale = m[j] / pair_denominator(q[i], q[j], sigma, i, j, threshold);
            for (int k = 0; k < 4; ++k) a[k] += scale * (q[j][k] - s * c * q[i][k]);
        }
        const T kinetic = s * inner(v[i], v[i], sigma);
        for (int k = 0; k < 4; ++k) out[i][k] = a[k] - kinetic * q[i][k];
    }
}

}  // namespace cnb::kernel
