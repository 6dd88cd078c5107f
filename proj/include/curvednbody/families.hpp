#pragma once

#include "curvednbody/dynamics.hpp"
#include "curvednbody/geometry.hpp"
#include "curvednbody/kernel.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace cnb {

enum class FamilyKind {
    LagrangianElliptic,
    EulerianHyperbolic,
    ComplementarySixBody,
    ComplementaryPolygonPair,
    // Reserved for unequal-mass (scalene) polygon pairs. No constructor exists.
    UnequalMassPolygonPair,
};

std::string_view to_string(FamilyKind kind) noexcept;

/// Rotating equilateral triangle on S³: bodies at (r cos(ωt+φk), r sin(ωt+φk), y, z).
struct LagrangianParams {
    double mass = 1.0;
    double r = 0.5;
    double y = 0.0;
    double z = 0.0;
    double omega = 0.0;
};

/// Three bodies on a hyperbolically rotating geodesic of H³.
struct EulerianParams {
    double mass = 1.0;
    double eta = 2.0;
    double x = 0.0;
    double beta = 0.0;
};

/// N bodies on the (w,x) circle at frequency alpha and M bodies on the (y,z)
/// circle at frequency beta, both regular polygons of equal masses.
struct PolygonPairParams {
    int n = 3;  // bodies on {y = z = 0}
    int m = 3;  // bodies on {w = x = 0}
    double mass = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double phase_n = 0.0;
    double phase_m = 0.0;
};

using FamilyParams = std::variant<LagrangianParams, EulerianParams, PolygonPairParams>;

/// Which closed form for β² solved the equations when an Eulerian family was built.
enum class MassScaling {
    Literal,     // β² = (1+4η²) / (4η³(η²−1)^{3/2})
    MassScaled,  // the same expression multiplied by m
};

std::string_view to_string(MassScaling s) noexcept;

double lagrangian_omega_squared(double mass, double r);
double eulerian_beta_squared(double eta, double mass_factor = 1.0);

/// Maximum residual accepted when validating a closed-form family.
inline constexpr double kFamilyResidualTolerance = 1e-10;

/// Closed-form positions, velocities and second derivatives. No validation
/// beyond what SystemState itself enforces; use this to probe candidates
/// (e.g. perturbed frequencies) that are not solutions.
AnalyticSample evaluate_candidate(const FamilyParams& params, double t);
double candidate_residual(const FamilyParams& params, double t);

/// A closed-form orbit that has been checked, by substitution, to solve the
/// equations of motion. Only the factory functions below create one.
class OrbitFamily {
public:
    FamilyKind kind() const noexcept { return kind_; }
    const FamilyParams& params() const noexcept { return params_; }
    Sigma sigma() const noexcept;
    std::size_t body_count() const noexcept;
    double mass() const noexcept;

    SystemState state(double t) const;
    AnalyticSample sample(double t) const;

    /// Positions and velocities at t evaluated in binary128 and normalized in
    /// binary128, for seeding extended-precision integration.
    kernel::Phase<kernel::quad> extended_phase(double t) const;

    /// Largest residual seen at the construction sample times.
    double validation_residual() const noexcept { return validation_residual_; }

    /// Set for Eulerian families: which β² variant passed validation.
    std::optional<MassScaling> mass_scaling() const noexcept { return mass_scaling_; }

    /// Rotation frequencies in the (w,x) and (y,z) planes for S³ families.
    /// Empty for the hyperbolic family.
    std::optional<std::pair<double, double>> plane_frequencies() const;

    friend OrbitFamily validate_family(FamilyKind kind, const FamilyParams& params);
    friend OrbitFamily eulerian_hyperbolic(double mass, double eta, int sign);

private:
    OrbitFamily(FamilyKind kind, FamilyParams params, double residual)
        : kind_(kind), params_(std::move(params)), validation_residual_(residual) {}

    FamilyKind kind_;
    FamilyParams params_;
    double validation_residual_;
    std::optional<MassScaling> mass_scaling_;
};

/// Validates a fully specified candidate (frequency included) at t = 0, 0.1, …, 1
/// and, for polygon pairs, asserts the per-body force cancellation.
/// Throws FamilyValidationError carrying the max residual on failure.
OrbitFamily validate_family(FamilyKind kind, const FamilyParams& params);

/// sign chooses the direction of rotation (ω = sign·√ω²).
OrbitFamily lagrangian_elliptic(double mass, double r, double y, double z, int sign = 1);

/// Tries the literal β² first and the mass-scaled variant second; records
/// which one solved the equations in mass_scaling().
OrbitFamily eulerian_hyperbolic(double mass, double eta, int sign = 1);

OrbitFamily complementary_six_body(double mass, double alpha, double beta);
OrbitFamily complementary_polygon_pair(const PolygonPairParams& params);

double residual(const OrbitFamily& family, double t);
double max_residual(const OrbitFamily& family, std::span<const double> times);

/// n equally spaced check times: [0, 10] for S³ families, [0, 1] for the
/// hyperbolic family, whose coordinates grow like e^{βt} and lose binary64
/// digits to cancellation in the force sum.
std::vector<double> check_times(const OrbitFamily& family, std::size_t n = 100);

/// n equally spaced times covering [t0, t1] inclusive.
std::vector<double> linspace(double t0, double t1, std::size_t n);

/// A point on the fixed circle {w = x = 0} of a Lagrangian family, with the
/// outcome of the two centre-of-mass checks.
struct CircleComCandidate {
    ManifoldPoint point;
    double field_norm;          // max over sampled times
    double distance;            // common distance to the bodies at t = 0
    double distance_spread;     // max |d(q0, qi(t)) − distance| over bodies and times
    bool field_vanishes;        // field_norm <= 1e-12
    bool equidistant;           // distance_spread <= 1e-12
};

/// Samples n points (0, 0, cos s, sin s), s = 2πk/n, over one revolution of the
/// triangle and evaluates both the field-cancellation and equidistance checks.
std::vector<CircleComCandidate> com_examples_lagrangian(const OrbitFamily& family, std::size_t n);

/// Uniform motion (w*, 0, ρ* sinh βt, ρ* cosh βt) along the geodesic {w = w*, x = 0}
/// of an Eulerian family.
class EulerianComTrack {
public:
    EulerianComTrack(double w_star, double beta);

    ManifoldPoint at(double t) const;
    double w_star() const noexcept { return w_star_; }
    double rho_star() const noexcept { return rho_star_; }

private:
    double w_star_;
    double rho_star_;
    double beta_;
};

struct EulerianComCertificate {
    EulerianComTrack track;
    double expected_distance_body1;    // arccosh ρ*
    double expected_distance_others;   // arccosh(η ρ*)
    double max_deviation;              // over t ∈ [0, 5] and all three bodies
};

/// Builds the track and certifies that its distances to the bodies stay at
/// arccosh ρ* and arccosh(η ρ*) to 1e-10 over t ∈ [0, 5].
EulerianComCertificate com_example_eulerian(const OrbitFamily& family, double w_star);

}  // namespace cnb
