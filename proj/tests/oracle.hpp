#pragma once

// Brute-force reference formulas in long double over plain arrays. Shares no
// code with the library: no Eigen, no curvednbody headers.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using R = long double;
using P4 = std::array<R, 4>;

inline R dot(const P4& a, const P4& b, int sigma) {
    R s = 0;
    for (int k = 0; k < 3; ++k) s += a[k] * b[k];
    return s + sigma * a[3] * b[3];
}

inline R bracket(const P4& a, const P4& b, int sigma) {
    const R c = dot(a, b, sigma);
    return sigma - sigma * c * c;
}

inline R denominator(const P4& a, const P4& b, int sigma) { return std::pow(bracket(a, b, sigma), 1.5L); }

// Net pull of `bodies` on the point p, each body j contributing
// m_j (q_j − σ (p⊙q_j) p) / den, summed one pair at a time.
inline P4 field(const P4& p, const std::vector<P4>& bodies, const std::vector<R>& masses, int sigma,
                std::size_t skip = static_cast<std::size_t>(-1)) {
    P4 f{0, 0, 0, 0};
    for (std::size_t j = 0; j < bodies.size(); ++j) {
        if (j == skip) continue;
        const R c = dot(p, bodies[j], sigma);
        const R d = denominator(p, bodies[j], sigma);
        for (int k = 0; k < 4; ++k) f[k] += masses[j] * (bodies[j][k] - sigma * c * p[k]) / d;
    }
    return f;
}

inline std::vector<P4> acceleration(const std::vector<P4>& q, const std::vector<P4>& v, const std::vector<R>& m,
                                    int sigma) {
    std::vector<P4> a(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        a[i] = field(q[i], q, m, sigma, i);
        const R vv = dot(v[i], v[i], sigma);
        for (int k = 0; k < 4; ++k) a[i][k] -= sigma * vv * q[i][k];
    }
    return a;
}

inline R force_function(const std::vector<P4>& q, const std::vector<R>& m, int sigma) {
    R u = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = i + 1; j < q.size(); ++j)
            u += sigma * m[i] * m[j] * dot(q[i], q[j], sigma) / denominator(q[i], q[j], sigma);
    return u;
}

inline R kinetic(const std::vector<P4>& q, const std::vector<P4>& v, const std::vector<R>& m, int sigma) {
    R t = 0;
    for (std::size_t i = 0; i < q.size(); ++i) t += m[i] * dot(v[i], v[i], sigma) * sigma * dot(q[i], q[i], sigma);
    return t / 2;
}

inline std::array<R, 6> wedge(const std::vector<P4>& q, const std::vector<P4>& v, const std::vector<R>& m) {
    std::array<R, 6> c{};
    const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (std::size_t i = 0; i < q.size(); ++i)
        for (int k = 0; k < 6; ++k) {
            const int a = pairs[k][0], b = pairs[k][1];
            c[k] += m[i] * (q[i][a] * v[i][b] - q[i][b] * v[i][a]);
        }
    return c;
}

// Textbook distances, adequate away from 0 and π.
inline R sphere_distance(const P4& a, const P4& b) { return std::acos(dot(a, b, 1)); }
inline R hyperbolic_distance(const P4& a, const P4& b) { return std::acosh(-dot(a, b, -1)); }

inline std::array<R, 3> hopf(const P4& p) {
    const R w = p[0], x = p[1], y = p[2], z = p[3];
    return {w * w + x * x - y * y - z * z, 2 * (w * z + x * y), 2 * (x * z - w * y)};
}

inline R norm(const P4& a) { return std::sqrt(dot(a, a, 1)); }

inline const R kPi = std::acos(R(-1));

// Regular polygon on the (w,x) plane (plane = 0) or the (y,z) plane (plane = 2).
inline std::vector<P4> polygon(int n, int plane, R phase = 0) {
    std::vector<P4> out;
    for (int k = 0; k < n; ++k) {
        P4 p{0, 0, 0, 0};
        const R a = phase + 2 * kPi * k / n;
        p[plane] = std::cos(a);
        p[plane + 1] = std::sin(a);
        out.push_back(p);
    }
    return out;
}

}  // namespace oracle
