#pragma once

#include "curvednbody/geometry.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace cnb {

/// Below this value of the bracket σ - σ(qi ⊙ qj)² the pair is treated as singular.
inline constexpr double kSingularityThreshold = 1e-13;

/// Tolerance used when validating a SystemState built from caller data.
inline constexpr double kStateTolerance = 1e-9;

struct Body {
    double mass;
    ManifoldPoint position;
    Vec4 velocity;
};

/// Phase point of the N-body system on S³ or H³.
///
/// The constructor checks that every mass is positive, every velocity is
/// tangent to its position and that no pair of bodies is collisional or
/// (on S³) antipodal.
class SystemState {
public:
    SystemState(Sigma sigma, std::vector<Body> bodies, double time = 0.0);

    Sigma sigma() const noexcept { return sigma_; }
    double time() const noexcept { return time_; }
    std::size_t size() const noexcept { return bodies_.size(); }
    const std::vector<Body>& bodies() const noexcept { return bodies_; }
    const Body& operator[](std::size_t i) const { return bodies_[i]; }

    double total_mass() const noexcept;

    std::vector<Vec4> positions() const;
    std::vector<Vec4> velocities() const;
    std::vector<double> masses() const;

private:
    Sigma sigma_;
    std::vector<Body> bodies_;
    double time_;
};

/// Wedge components in the order (wx, wy, wz, xy, xz, yz).
using AngularMomentum = std::array<double, 6>;

enum WedgeIndex : int { kWX = 0, kWY, kWZ, kXY, kXZ, kYZ };

struct ConservedQuantities {
    double energy;
    AngularMomentum angular_momentum;
};

/// [σ - σ(qi ⊙ qj)²]^{3/2}. Throws SingularityError when the bracket is below
/// kSingularityThreshold; on S³ the error says whether the pair is colliding
/// or antipodal.
double pair_denominator(const Vec4& qi, const Vec4& qj, Sigma sigma);

/// Raw right-hand side of the equations of motion. Positions need not lie on
/// the manifold (Runge-Kutta stages evaluate off it). Summation runs over
/// bodies in ascending index order.
void acceleration(std::span<const Vec4> positions, std::span<const Vec4> velocities,
                  std::span<const double> masses, Sigma sigma, std::span<Vec4> out);

std::vector<Vec4> acceleration(const SystemState& state);

/// Gravitational part of the acceleration only (no velocity-dependent term).
std::vector<Vec4> gravitational_acceleration(const SystemState& state);

/// Field felt by a massless test particle at `test`; tangent at `test`.
TangentVector gravitational_field(const SystemState& state, const ManifoldPoint& test);

/// Force function U (the potential is -U).
double force_function(const SystemState& state);
double kinetic_energy(const SystemState& state);
double energy(const SystemState& state);
AngularMomentum angular_momentum(const SystemState& state);
ConservedQuantities conserved_quantities(const SystemState& state);

/// Largest scale-relative constraint residual over all bodies:
/// |q⊙q - σ| / max(1, |q|²) and |q⊙v| / max(1, |q||v|), Euclidean norms.
/// On S³ with moderate speeds this is the plain absolute residual; on H³ the
/// scaling keeps it meaningful far from the vertex of the hyperboloid.
double constraint_residual(std::span<const Vec4> positions, std::span<const Vec4> velocities,
                           Sigma sigma);
double constraint_residual(const SystemState& state);

/// A state together with independently known second derivatives, e.g. from
/// differentiating a closed-form trajectory.
struct AnalyticSample {
    SystemState state;
    std::vector<Vec4> acceleration;
};

/// max over bodies of ‖q̈_known − acceleration(state)‖∞.
double residual(const AnalyticSample& sample);

}  // namespace cnb
