#include "curvednbody/com_analysis.hpp"

#include "curvednbody/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace cnb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kHistogramLow = -17;
constexpr std::size_t kHistogramBins = 18;

Eigen::Matrix2d planar(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

void bump(std::vector<std::size_t>& histogram, double deviation) {
    if (histogram.empty()) histogram.assign(kHistogramBins, 0);
    int bin = 0;
    if (deviation > 0.0) bin = static_cast<int>(std::floor(std::log10(deviation))) - kHistogramLow;
    histogram[static_cast<std::size_t>(std::clamp(bin, 0, static_cast<int>(kHistogramBins) - 1))]++;
}

void require_sphere(const ManifoldPoint& p) {
    if (p.sigma() != Sigma::Sphere) throw DomainError("rotation actions act on S3 only");
}

}  // namespace

Mat4 RotationAction::matrix(double t) const {
    Mat4 block = Mat4::Zero();
    block.topLeftCorner<2, 2>() = planar(gamma * t);
    block.bottomRightCorner<2, 2>() = planar(delta * t);
    return frame.transpose() * block * frame;
}

Mat4 RotationAction::generator() const {
    Mat4 block = Mat4::Zero();
    block(0, 1) = -gamma;
    block(1, 0) = gamma;
    block(2, 3) = -delta;
    block(3, 2) = delta;
    return frame.transpose() * block * frame;
}

RotationAction action_for(const OrbitFamily& family) {
    const auto freqs = family.plane_frequencies();
    if (!freqs) throw DomainError("only S3 families carry an SO(4) rotation action");
    return RotationAction{freqs->first, freqs->second, Mat4::Identity()};
}

ManifoldPoint apply_action(const RotationAction& action, const ManifoldPoint& p, double t) {
    require_sphere(p);
    return ManifoldPoint(action.matrix(t) * p.coords(), Sigma::Sphere);
}

FittedAction fit_action(const TrajectoryRecord& trajectory) {
    if (trajectory.states.empty()) throw ValidationError("trajectory", "cannot fit an action to an empty record");
    if (trajectory.states.front().sigma() != Sigma::Sphere) throw DomainError("fit_action needs an S3 trajectory");

    // Unknowns are the upper-triangular entries of Ω in wedge order (wx, wy, wz, xy, xz, yz).
    constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    Eigen::Matrix<double, 6, 6> normal = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
    for (const SystemState& state : trajectory.states) {
        for (const Body& b : state.bodies()) {
            const Vec4& q = b.position.coords();
            Eigen::Matrix<double, 4, 6> rows = Eigen::Matrix<double, 4, 6>::Zero();
            for (int k = 0; k < 6; ++k) {
                const int a = pairs[k][0], c = pairs[k][1];
                rows(a, k) = q[c];
                rows(c, k) = -q[a];
            }
            normal += rows.transpose() * rows;
            rhs += rows.transpose() * b.velocity;
        }
    }
    const Eigen::Matrix<double, 6, 1> omega = normal.completeOrthogonalDecomposition().solve(rhs);
    Mat4 generator = Mat4::Zero();
    for (int k = 0; k < 6; ++k) {
        generator(pairs[k][0], pairs[k][1]) = omega[k];
        generator(pairs[k][1], pairs[k][0]) = -omega[k];
    }

    // -Ω² is symmetric with eigenvalues γ², γ², δ², δ²; pair each eigenvector u
    // with Ωu / |Ωu| to obtain the invariant planes.
    const Mat4 squared = generator.transpose() * generator;
    Eigen::SelfAdjointEigenSolver<Mat4> eig(squared);
    const double scale = std::max(1.0, std::sqrt(std::max(0.0, eig.eigenvalues()[3])));

    std::vector<Vec4> basis;
    std::vector<double> rates;
    auto orthogonalized = [&](Vec4 e) {
        for (const Vec4& b : basis) e -= e.dot(b) * b;
        return e;
    };
    for (int k = 3; k >= 0 && basis.size() < 4; --k) {
        Vec4 u = orthogonalized(eig.eigenvectors().col(k));
        if (u.norm() < 0.5) continue;
        u.normalize();
        const double rate = std::sqrt(std::max(0.0, eig.eigenvalues()[k]));
        Vec4 v = orthogonalized(generator * u);
        if (rate > 1e-12 * scale && v.norm() > 0.5 * rate) {
            basis.push_back(u);
            basis.push_back(v.normalized());
            rates.push_back(rate);
        } else {
            // Zero rate: the plane is whatever remains.
            basis.push_back(u);
            for (int j = 3; j >= 0; --j) {
                Vec4 w = orthogonalized(eig.eigenvectors().col(j));
                if (w.norm() > 0.5) {
                    basis.push_back(w.normalized());
                    break;
                }
            }
            rates.push_back(0.0);
        }
    }
    if (basis.size() != 4) throw NotRigidRotation(std::numeric_limits<double>::infinity(), kRigidRotationTolerance);

    // Put the plane closest to the standard (w,x) plane first.
    auto wx_weight = [](const Vec4& a, const Vec4& b) { return a.head<2>().squaredNorm() + b.head<2>().squaredNorm(); };
    if (wx_weight(basis[2], basis[3]) > wx_weight(basis[0], basis[1])) {
        std::swap(basis[0], basis[2]);
        std::swap(basis[1], basis[3]);
        std::swap(rates[0], rates[1]);
    }

    RotationAction action;
    action.gamma = rates[0];
    action.delta = rates[1];
    for (int r = 0; r < 4; ++r) action.frame.row(r) = basis[static_cast<std::size_t>(r)].transpose();

    const double t0 = trajectory.times.front();
    const SystemState& start = trajectory.states.front();
    double error = 0.0;
    for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
        const Mat4 a = action.matrix(trajectory.times[k] - t0);
        const SystemState& s = trajectory.states[k];
        for (std::size_t i = 0; i < s.size(); ++i)
            error = std::max(error, (a * start[i].position.coords() - s[i].position.coords()).cwiseAbs().maxCoeff());
    }
    if (!(error <= kRigidRotationTolerance)) throw NotRigidRotation(error, kRigidRotationTolerance);
    return FittedAction{action, error};
}

std::string_view to_string(ComVerdict v) noexcept {
    switch (v) {
        case ComVerdict::Fixed: return "fixed";
        case ComVerdict::UniformGeodesic: return "uniform-geodesic";
        case ComVerdict::Neither: return "neither";
    }
    return "unknown";
}

ComClassification classify_point(const RotationAction& action, const ManifoldPoint& p,
                                 const ClassifyOptions& options) {
    require_sphere(p);
    const auto times = linspace(0.0, options.window, options.samples);
    const std::size_t n = times.size();
    Eigen::MatrixX4d orbit(static_cast<Eigen::Index>(n), 4);
    double displacement = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec4 x = action.matrix(times[k]) * p.coords();
        orbit.row(static_cast<Eigen::Index>(k)) = x.transpose();
        displacement = std::max(displacement, distance(ManifoldPoint(x, Sigma::Sphere), p));
    }
    if (displacement <= options.tolerance) return ComClassification{ComVerdict::Fixed, std::nullopt, displacement};

    Eigen::JacobiSVD<Eigen::MatrixX4d> svd(orbit, Eigen::ComputeFullV);
    const Vec4 normal = svd.matrixV().col(3);
    const Vec4 second = svd.matrixV().col(2);
    const double plane_residual = (orbit * normal).cwiseAbs().maxCoeff();
    const double second_residual = (orbit * second).cwiseAbs().maxCoeff();
    const double smallest = svd.singularValues()[3];
    const double bound = options.tolerance * std::sqrt(static_cast<double>(n));

    const bool on_great_sphere = smallest <= bound && plane_residual <= options.tolerance;
    const bool on_great_circle =
        on_great_sphere && svd.singularValues()[2] <= bound && second_residual <= options.tolerance;
    if (!on_great_circle) {
        const double deviation = on_great_sphere ? svd.singularValues()[2] : smallest;
        return ComClassification{ComVerdict::Neither, std::nullopt, deviation};
    }

    // Speed along the orbit is |Ω A(t) p|, constant for a rotation; check it anyway.
    const Mat4 generator = action.generator();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Eigen::Index k = 0; k < orbit.rows(); ++k) {
        const double speed = (generator * orbit.row(k).transpose()).norm();
        lo = std::min(lo, speed);
        hi = std::max(hi, speed);
    }
    if (hi - lo > options.tolerance) return ComClassification{ComVerdict::Neither, std::nullopt, hi - lo};

    return ComClassification{ComVerdict::UniformGeodesic, GeodesicPlane{normal},
                             std::max(plane_residual, second_residual)};
}

double distance_to_complementary_circles(const Vec4& p) {
    const Vec4 u = p.normalized();
    const double to_c1 = std::asin(std::min(1.0, u.head<2>().norm()));  // C1 = {w = x = 0}
    const double to_c2 = std::asin(std::min(1.0, u.tail<2>().norm()));  // C2 = {y = z = 0}
    return std::min(to_c1, to_c2);
}

EquidistanceCheck equidistance_test(const OrbitFamily& family, const RotationAction& action,
                                    const ManifoldPoint& p, const ClassifyOptions& options) {
    require_sphere(p);
    const double reference = distance(p, family.state(0.0)[0].position);
    double spread = 0.0;
    for (double t : linspace(0.0, options.window, options.samples)) {
        const SystemState state = family.state(t);
        const ManifoldPoint moved = apply_action(action, p, t);
        for (const Body& b : state.bodies()) spread = std::max(spread, std::abs(distance(moved, b.position) - reference));
    }
    return EquidistanceCheck{spread <= options.tolerance, spread};
}

double max_field_norm(const OrbitFamily& family, const ManifoldPoint& p, const ClassifyOptions& options,
                      const std::optional<RotationAction>& action) {
    double worst = 0.0;
    for (double t : linspace(0.0, options.window, options.samples)) {
        const SystemState state = family.state(t);
        const ManifoldPoint moved = action ? apply_action(*action, p, t) : p;
        worst = std::max(worst, gravitational_field(state, moved).coords.norm());
    }
    return worst;
}

bool field_com_test(const OrbitFamily& family, const ManifoldPoint& p, const ClassifyOptions& options,
                    const std::optional<RotationAction>& action) {
    return max_field_norm(family, p, options, action) <= options.tolerance;
}

ResonanceGuard resonance_guard(double gamma, double delta) {
    ResonanceGuard guard;
    if (gamma == 0.0 || delta == 0.0) return guard;
    guard.ratio = gamma / delta;
    for (long long q = 1; q <= 20; ++q) {
        const double p = std::round(guard.ratio * static_cast<double>(q));
        if (std::abs(guard.ratio - p / static_cast<double>(q)) < 1e-6) {
            guard.triggered = true;
            guard.numerator = static_cast<long long>(p);
            guard.denominator = q;
            break;
        }
    }
    return guard;
}

std::vector<ManifoldPoint> sample_sphere(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<ManifoldPoint> out;
    out.reserve(n);
    while (out.size() < n) {
        const Vec4 g(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
        if (g.norm() < 1e-12) continue;
        out.emplace_back(g, Sigma::Sphere);
    }
    return out;
}

SearchReport search_com(const OrbitFamily& family, const SearchOptions& options) {
    return search_com(family, action_for(family), options);
}

SearchReport search_com(const OrbitFamily& family, const RotationAction& action, const SearchOptions& options) {
    if (family.sigma() != Sigma::Sphere) throw DomainError("the centre-of-mass search runs on S3 families only");

    SearchReport report;
    report.family = std::string(to_string(family.kind()));
    report.options = options;
    report.action = action;
    report.resonance = resonance_guard(action.gamma, action.delta);
    if (report.resonance.triggered) {
        std::ostringstream msg;
        msg << "frequency ratio " << report.resonance.ratio << " is within 1e-6 of "
            << report.resonance.numerator << "/" << report.resonance.denominator
            << "; the irrationality hypothesis is numerically fragile";
        report.warnings.push_back(msg.str());
    }
    report.histogram_fixed.assign(kHistogramBins, 0);
    report.histogram_geodesic.assign(kHistogramBins, 0);
    report.histogram_neither.assign(kHistogramBins, 0);

    std::vector<std::pair<ManifoldPoint, bool>> points;
    for (auto& p : sample_sphere(options.samples, options.seed)) points.emplace_back(std::move(p), false);
    for (std::size_t k = 0; k < options.probes_per_circle; ++k) {
        const double s = kTwoPi * static_cast<double>(k) / static_cast<double>(options.probes_per_circle);
        for (int plane : {0, 2}) {
            const Vec4 x = std::cos(s) * action.frame.row(plane).transpose() +
                           std::sin(s) * action.frame.row(plane + 1).transpose();
            points.emplace_back(ManifoldPoint(x, Sigma::Sphere), true);
        }
    }

    for (std::size_t index = 0; index < points.size(); ++index) {
        const auto& [p, probe] = points[index];
        const ComClassification cls = classify_point(action, p, options.classify);
        switch (cls.verdict) {
            case ComVerdict::Fixed:
                report.fixed++;
                bump(report.histogram_fixed, cls.max_deviation);
                break;
            case ComVerdict::UniformGeodesic:
                report.uniform_geodesic++;
                bump(report.histogram_geodesic, cls.max_deviation);
                break;
            case ComVerdict::Neither:
                report.neither++;
                bump(report.histogram_neither, cls.max_deviation);
                continue;
        }

        Candidate c{index, probe, p, cls, distance_to_complementary_circles(p.coords()), std::nullopt, std::nullopt,
                    false};
        c.equidistance = equidistance_test(family, action, p, options.classify);
        bool survives = c.equidistance->passed;
        if (options.field_test) {
            try {
                c.field_norm = max_field_norm(family, p, options.classify, action);
            } catch (const SingularityError&) {
                c.field_norm = std::numeric_limits<double>::infinity();
            }
            survives = survives && *c.field_norm <= options.field_tolerance;
        }
        c.survivor = survives;
        if (survives) report.survivors.push_back(c);
        report.motion_hits.push_back(std::move(c));
    }
    return report;
}

}  // namespace cnb
