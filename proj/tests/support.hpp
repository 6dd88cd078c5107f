#pragma once

#include "curvednbody/dynamics.hpp"
#include "oracle.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <random>
#include <vector>

namespace testing_support {

inline oracle::P4 to_p4(const cnb::Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

inline std::vector<oracle::P4> positions(const cnb::SystemState& s) {
    std::vector<oracle::P4> out;
    for (const auto& b : s.bodies()) out.push_back(to_p4(b.position.coords()));
    return out;
}

inline std::vector<oracle::P4> velocities(const cnb::SystemState& s) {
    std::vector<oracle::P4> out;
    for (const auto& b : s.bodies()) out.push_back(to_p4(b.velocity));
    return out;
}

inline std::vector<oracle::R> masses(const cnb::SystemState& s) {
    std::vector<oracle::R> out;
    for (const auto& b : s.bodies()) out.push_back(b.mass);
    return out;
}

inline double max_abs_diff(const oracle::P4& a, const cnb::Vec4& b) {
    double d = 0.0;
    for (int k = 0; k < 4; ++k) d = std::max(d, static_cast<double>(std::abs(a[k] - b[k])));
    return d;
}

inline cnb::Vec4 gaussian4(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return cnb::Vec4(g(rng), g(rng), g(rng), g(rng));
}

// Random rotation of R^4: QR of a Gaussian matrix, signs fixed, det forced to +1.
inline cnb::Mat4 random_rotation(std::mt19937_64& rng) {
    cnb::Mat4 g;
    for (int c = 0; c < 4; ++c) g.col(c) = gaussian4(rng);
    Eigen::HouseholderQR<cnb::Mat4> qr(g);
    cnb::Mat4 q = qr.householderQ();
    const cnb::Mat4 r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < 4; ++c)
        if (r(c, c) < 0) q.col(c) = -q.col(c);
    if (q.determinant() < 0) q.col(0) = -q.col(0);
    return q;
}

// Lorentz boost mixing x and z by rapidity s, composed with a rotation of (w,y).
inline cnb::Mat4 lorentz_transform(double s, double angle) {
    cnb::Mat4 b = cnb::Mat4::Identity();
    b(1, 1) = std::cosh(s);
    b(1, 3) = std::sinh(s);
    b(3, 1) = std::sinh(s);
    b(3, 3) = std::cosh(s);
    cnb::Mat4 r = cnb::Mat4::Identity();
    r(0, 0) = std::cos(angle);
    r(0, 2) = -std::sin(angle);
    r(2, 0) = std::sin(angle);
    r(2, 2) = std::cos(angle);
    return r * b;
}

}  // namespace testing_support
