#include "curvednbody/geometry.hpp"

#include "curvednbody/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace cnb {

Sigma sigma_from_int(int s) {
    if (s == 1) return Sigma::Sphere;
    if (s == -1) return Sigma::Hyperbolic;
    throw DomainError("sigma must be +1 or -1, got " + std::to_string(s));
}

double inner(const Vec4& a, const Vec4& b, Sigma sigma) noexcept {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + sign(sigma) * a[3] * b[3];
}

ManifoldPoint::ManifoldPoint(const Vec4& coords, Sigma sigma) : coords_(coords), sigma_(sigma) {
    if (!coords.allFinite()) throw ConstraintViolation("non-finite point coordinates");
    const double n2 = inner(coords, coords, sigma);
    if (sigma == Sigma::Sphere) {
        if (!(n2 > 0.0)) throw ConstraintViolation("cannot place the zero vector on S3");
    } else {
        if (!(coords[3] > 0.0)) {
            std::ostringstream msg;
            msg << "hyperbolic point has z = " << coords[3] << " <= 0 (outside the upper sheet)";
            throw ConstraintViolation(msg.str());
        }
        if (!(n2 < 0.0)) throw ConstraintViolation("vector is not timelike; cannot place it on H3");
    }
    // Already-normalized input is kept bit-for-bit, so states survive a
    // decimal round trip unchanged.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, coords.squaredNorm());
    if (std::abs(n2 - sign(sigma)) > slack) coords_ /= std::sqrt(std::abs(n2));
}

Vec4 tangent_project(const Vec4& p, const Vec4& v, Sigma sigma) noexcept {
    return v - sign(sigma) * inner(p, v, sigma) * p;
}

TangentVector tangent_project(const ManifoldPoint& p, const Vec4& v) {
    return TangentVector{p, tangent_project(p.coords(), v, p.sigma())};
}

double distance(const ManifoldPoint& a, const ManifoldPoint& b) {
    if (a.sigma() != b.sigma()) throw DomainError("distance between points of different manifolds");
    const double c = inner(a.coords(), b.coords(), a.sigma());
    if (a.sigma() == Sigma::Sphere) {
        if (c > 1.0 + kDistanceClampTolerance || c < -1.0 - kDistanceClampTolerance) {
            std::ostringstream msg;
            msg << "spherical inner product " << c << " outside [-1, 1]";
            throw ConstraintViolation(msg.str());
        }
        // Equal to arccos(a·b) on the sphere, without its loss of accuracy near 0 and π.
        return 2.0 * std::atan2((a.coords() - b.coords()).norm(), (a.coords() + b.coords()).norm());
    }
    const double ch = -c;
    if (ch < 1.0 - kDistanceClampTolerance) {
        std::ostringstream msg;
        msg << "hyperbolic cosh-distance " << ch << " below 1";
        throw ConstraintViolation(msg.str());
    }
    if (ch >= 2.0) return std::acosh(ch);
    // Short distances: 2 asinh(|a-b|/2) with the Lorentz norm of the chord equals
    // arccosh(-a⊡b) and stays accurate where arccosh is ill-conditioned.
    const Vec4 chord = a.coords() - b.coords();
    return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, inner(chord, chord, Sigma::Hyperbolic))));
}

Vec3 hopf(const ManifoldPoint& p) {
    if (p.sigma() != Sigma::Sphere) throw DomainError("the Hopf map is defined on S3 only");
    const double w = p[0], x = p[1], y = p[2], z = p[3];
    return Vec3(w * w + x * x - y * y - z * z, 2.0 * (w * z + x * y), 2.0 * (x * z - w * y));
}

ManifoldPoint GreatCircle::at(double s) const {
    return ManifoldPoint(std::cos(s) * u + std::sin(s) * v, Sigma::Sphere);
}

std::pair<GreatCircle, GreatCircle> complementary_pair() {
    GreatCircle c1{Vec4(0, 0, 1, 0), Vec4(0, 0, 0, 1)};
    GreatCircle c2{Vec4(1, 0, 0, 0), Vec4(0, 1, 0, 0)};
    return {c1, c2};
}

Eigen::Matrix<double, 3, 4> equatorial_basis(const Vec4& pole) {
    const Vec4 n = pole.normalized();
    int skip = 0;
    n.cwiseAbs().maxCoeff(&skip);
    Eigen::Matrix<double, 3, 4> basis;
    int row = 0;
    for (int axis = 0; axis < 4; ++axis) {
        if (axis == skip) continue;
        Vec4 e = Vec4::Unit(axis);
        e -= e.dot(n) * n;
        for (int k = 0; k < row; ++k) e -= e.dot(basis.row(k).transpose()) * basis.row(k).transpose();
        basis.row(row++) = e.normalized().transpose();
    }
    return basis;
}

namespace {

inline constexpr double kPoleTolerance = 1e-9;

}  // namespace

Vec3 stereographic(const ManifoldPoint& p, const ManifoldPoint& pole) {
    if (p.sigma() != Sigma::Sphere || pole.sigma() != Sigma::Sphere)
        throw DomainError("stereographic projection is defined on S3 only");
    if ((p.coords() - pole.coords()).norm() < kPoleTolerance)
        throw ProjectionSingularity("point coincides with the projection pole");
    const double c = p.coords().dot(pole.coords());
    const Vec4 equatorial = p.coords() - c * pole.coords();
    return equatorial_basis(pole.coords()) * equatorial / (1.0 - c);
}

ManifoldPoint inverse_stereographic(const Vec3& s, const ManifoldPoint& pole) {
    if (pole.sigma() != Sigma::Sphere) throw DomainError("stereographic projection is defined on S3 only");
    const double s2 = s.squaredNorm();
    const Vec4 lifted = equatorial_basis(pole.coords()).transpose() * s;
    return ManifoldPoint((2.0 * lifted + (s2 - 1.0) * pole.coords()) / (s2 + 1.0), Sigma::Sphere);
}

}  // namespace cnb
