#pragma once

#include <Eigen/Core>

#include <utility>

namespace cnb {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Sign of the curvature: +1 selects S³ with the Euclidean inner product,
/// -1 selects the upper sheet of H³ with the Lorentz inner product (+,+,+,-).
enum class Sigma : int { Sphere = 1, Hyperbolic = -1 };

constexpr double sign(Sigma s) noexcept { return static_cast<double>(static_cast<int>(s)); }

Sigma sigma_from_int(int s);

/// Clamp window for arccos/arccosh arguments before a constraint violation is raised.
inline constexpr double kDistanceClampTolerance = 1e-9;

/// The σ-signed inner product: w w' + x x' + y y' + σ z z'.
double inner(const Vec4& a, const Vec4& b, Sigma sigma) noexcept;

/// A point of S³ (σ=+1) or of the upper sheet of H³ (σ=-1).
///
/// Construction normalizes the coordinates so that q ⊙ q = σ, unless they are
/// already within a few ulps of it, in which case they are kept. Hyperbolic points
/// with z <= 0, or vectors whose σ-norm has the wrong sign, are rejected.
class ManifoldPoint {
public:
    ManifoldPoint(const Vec4& coords, Sigma sigma);
    ManifoldPoint(double w, double x, double y, double z, Sigma sigma = Sigma::Sphere)
        : ManifoldPoint(Vec4(w, x, y, z), sigma) {}

    const Vec4& coords() const noexcept { return coords_; }
    Sigma sigma() const noexcept { return sigma_; }
    double operator[](int i) const { return coords_[i]; }

private:
    Vec4 coords_;
    Sigma sigma_;
};

/// A vector tangent to the manifold at `base`, i.e. base ⊙ coords = 0.
struct TangentVector {
    ManifoldPoint base;
    Vec4 coords;
};

/// Removes the ⊙-component of v along p: v - σ (p ⊙ v) p.
TangentVector tangent_project(const ManifoldPoint& p, const Vec4& v);
Vec4 tangent_project(const Vec4& p, const Vec4& v, Sigma sigma) noexcept;

/// Geodesic distance: arccos(a·b) on S³, arccosh(-a⊡b) on H³.
double distance(const ManifoldPoint& a, const ManifoldPoint& b);

/// Hopf map S³ → S²: (w²+x²-y²-z², 2(wz+xy), 2(xz-wy)).
Vec3 hopf(const ManifoldPoint& p);

/// A great circle of S³, {cos(s) u + sin(s) v} with u, v orthonormal.
struct GreatCircle {
    Vec4 u;
    Vec4 v;

    ManifoldPoint at(double s) const;
};

/// C1 = {w = x = 0} and C2 = {y = z = 0}, in that order.
std::pair<GreatCircle, GreatCircle> complementary_pair();

/// Stereographic projection of S³ from `pole` onto the 3-space through the
/// origin orthogonal to the pole. Coordinates are taken in the orthonormal
/// basis returned by `equatorial_basis(pole)`.
Vec3 stereographic(const ManifoldPoint& p, const ManifoldPoint& pole);
ManifoldPoint inverse_stereographic(const Vec3& s, const ManifoldPoint& pole);

/// Rows are an orthonormal basis of the orthogonal complement of `pole`,
/// built by Gram-Schmidt over the standard axes, skipping the axis most
/// aligned with the pole. For pole = (0,0,0,1) this is (e_w, e_x, e_y).
Eigen::Matrix<double, 3, 4> equatorial_basis(const Vec4& pole);

}  // namespace cnb
