#pragma once

#include "curvednbody/families.hpp"
#include "curvednbody/geometry.hpp"
#include "curvednbody/integrators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cnb {

/// One-parameter subgroup of SO(4): rotation by γt in one invariant plane and
/// by δt in the orthogonal one.
///
/// `frame` maps standard coordinates to the block basis (u1, v1, u2, v2); its
/// rows are those basis vectors. The realized matrix is
/// A(t) = frameᵀ · diag(R(γt), R(δt)) · frame, with R(θ) = [[cos, −sin], [sin, cos]].
struct RotationAction {
    double gamma = 0.0;
    double delta = 0.0;
    Mat4 frame = Mat4::Identity();

    Mat4 matrix(double t) const;
    /// Generator Ω with A(t) = exp(tΩ).
    Mat4 generator() const;
};

/// The action that carries an S³ family's configuration at time 0 to time t:
/// γ, δ equal the family's (w,x)- and (y,z)-plane frequencies in the standard frame.
RotationAction action_for(const OrbitFamily& family);

ManifoldPoint apply_action(const RotationAction& action, const ManifoldPoint& p, double t);

/// Maximum reconstruction error accepted by fit_action.
inline constexpr double kRigidRotationTolerance = 1e-6;

struct FittedAction {
    RotationAction action;
    double reconstruction_error;  // max-norm over bodies and samples
};

/// Recovers the rotation generator from recorded positions and velocities by
/// least squares on q̇ = Ω q over all samples, then reduces Ω to block form.
/// Throws NotRigidRotation when A(t − t0) q(t0) misses the record by more than
/// kRigidRotationTolerance.
FittedAction fit_action(const TrajectoryRecord& trajectory);

/// Hyperplane through the origin, A w + B x + C y + D z = 0, unit normal.
struct GeodesicPlane {
    Vec4 normal;
};

enum class ComVerdict { Fixed, UniformGeodesic, Neither };

std::string_view to_string(ComVerdict v) noexcept;

struct ComClassification {
    ComVerdict verdict;
    std::optional<GeodesicPlane> witness;
    double max_deviation;
};

struct ClassifyOptions {
    double window = 50.0;
    double tolerance = 1e-6;
    std::size_t samples = 512;
};

/// Classifies the orbit t ↦ A(t)p over [0, window]:
///  Fixed            if max d(A(t)p, p) <= tolerance;
///  UniformGeodesic  if the orbit lies on a great circle (both of the two
///                   smallest singular directions of the samples×4 matrix fit
///                   every sample to within tolerance) at constant speed;
///  Neither          otherwise.
/// For UniformGeodesic the witness is the smallest singular direction and
/// max_deviation the larger of the two plane residuals. For Neither,
/// max_deviation is the singular value that failed the bound.
ComClassification classify_point(const RotationAction& action, const ManifoldPoint& p,
                                 const ClassifyOptions& options = {});

/// Geodesic distance on S³ from p to the nearer of C1 = {w = x = 0} and C2 = {y = z = 0}.
double distance_to_complementary_circles(const Vec4& p);

/// Result of testing a point moving under an action against every body.
struct EquidistanceCheck {
    bool passed;
    double spread;  // max over bodies and times of |d(p(t), q_i(t)) − d(p(0), q_0(0))|
};

EquidistanceCheck equidistance_test(const OrbitFamily& family, const RotationAction& action,
                                    const ManifoldPoint& p, const ClassifyOptions& options = {});

/// True iff the gravitational field at p(t) stays below tolerance at every
/// sample, where p(t) = A(t)p when an action is given and p otherwise.
/// Singular samples raise SingularityError stamped with their time.
bool field_com_test(const OrbitFamily& family, const ManifoldPoint& p, const ClassifyOptions& options,
                    const std::optional<RotationAction>& action = std::nullopt);

/// Largest field norm seen by field_com_test's sampling.
double max_field_norm(const OrbitFamily& family, const ManifoldPoint& p, const ClassifyOptions& options,
                      const std::optional<RotationAction>& action = std::nullopt);

struct ResonanceGuard {
    bool triggered = false;
    long long numerator = 0;
    long long denominator = 0;
    double ratio = 0.0;
};

/// Flags γ/δ within 1e-6 of p/q with q <= 20. Never triggers when δ = 0.
ResonanceGuard resonance_guard(double gamma, double delta);

struct SearchOptions {
    std::size_t samples = 10000;
    ClassifyOptions classify{};
    std::uint64_t seed = 20240917;
    // Points placed exactly on the action's invariant circles in addition to
    // the random draws, so that the geodesic branch is always exercised.
    std::size_t probes_per_circle = 16;
    // Also require the gravitational field to vanish along the candidate's motion.
    bool field_test = false;
    double field_tolerance = 1e-12;
};

struct Candidate {
    std::size_t index;
    bool probe;
    ManifoldPoint point;
    ComClassification classification;
    double circle_distance;
    std::optional<EquidistanceCheck> equidistance;
    std::optional<double> field_norm;
    bool survivor;
};

struct SearchReport {
    std::string family;
    SearchOptions options;
    RotationAction action;
    ResonanceGuard resonance;
    std::vector<std::string> warnings;

    std::size_t fixed = 0;
    std::size_t uniform_geodesic = 0;
    std::size_t neither = 0;

    // Every Fixed or UniformGeodesic candidate; these are the only ones that
    // go through the equidistance filter.
    std::vector<Candidate> motion_hits;
    std::vector<Candidate> survivors;

    // log10(max_deviation) histograms, one per verdict, bins [-17, 1) of width 1.
    std::vector<std::size_t> histogram_fixed;
    std::vector<std::size_t> histogram_geodesic;
    std::vector<std::size_t> histogram_neither;
};

/// Uniform points on S³ from normalized standard-Gaussian 4-vectors.
std::vector<ManifoldPoint> sample_sphere(std::size_t n, std::uint64_t seed);

/// Searches S³ for centre-of-mass-like points of an S³ family: each sampled
/// point is classified under the family's action; those at rest or moving on a
/// geodesic are then required to stay equidistant from every body (and, with
/// field_test, to feel no net force). Survivors are the points passing all
/// filters. This is a finite-window numerical certificate, not a proof.
SearchReport search_com(const OrbitFamily& family, const SearchOptions& options = {});
SearchReport search_com(const OrbitFamily& family, const RotationAction& action, const SearchOptions& options);

}  // namespace cnb
