#include "curvednbody/families.hpp"

#include "curvednbody/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace cnb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCancellationTolerance = 1e-12;
constexpr double kEtaMargin = 1e-6;

struct Kinematics {
    Vec4 q, v, a;
};

Kinematics circular(int plane, double amplitude, double rate, double angle, const Vec4& offset) {
    const double c = std::cos(angle), s = std::sin(angle);
    Kinematics k{offset, Vec4::Zero(), Vec4::Zero()};
    k.q[plane] += amplitude * c;
    k.q[plane + 1] += amplitude * s;
    k.v[plane] = -amplitude * rate * s;
    k.v[plane + 1] = amplitude * rate * c;
    k.a[plane] = -rate * rate * amplitude * c;
    k.a[plane + 1] = -rate * rate * amplitude * s;
    return k;
}

Kinematics hyperbolic(double offset_x, double scale, double rate, double t) {
    const double sh = std::sinh(rate * t), ch = std::cosh(rate * t);
    return Kinematics{Vec4(0.0, offset_x, scale * sh, scale * ch),
                      Vec4(0.0, 0.0, scale * rate * ch, scale * rate * sh),
                      Vec4(0.0, 0.0, rate * rate * scale * sh, rate * rate * scale * ch)};
}

AnalyticSample assemble(Sigma sigma, double mass, const std::vector<Kinematics>& ks, double t) {
    std::vector<Body> bodies;
    std::vector<Vec4> acc;
    bodies.reserve(ks.size());
    acc.reserve(ks.size());
    for (const Kinematics& k : ks) {
        bodies.push_back(Body{mass, ManifoldPoint(k.q, sigma), k.v});
        acc.push_back(k.a);
    }
    return AnalyticSample{SystemState(sigma, std::move(bodies), t), std::move(acc)};
}

AnalyticSample evaluate(const LagrangianParams& p, double t) {
    std::vector<Kinematics> ks;
    for (int k = 0; k < 3; ++k)
        ks.push_back(circular(0, p.r, p.omega, p.omega * t + kTwoPi * k / 3.0, Vec4(0.0, 0.0, p.y, p.z)));
    return assemble(Sigma::Sphere, p.mass, ks, t);
}

AnalyticSample evaluate(const EulerianParams& p, double t) {
    std::vector<Kinematics> ks{hyperbolic(0.0, 1.0, p.beta, t), hyperbolic(p.x, p.eta, p.beta, t),
                               hyperbolic(-p.x, p.eta, p.beta, t)};
    return assemble(Sigma::Hyperbolic, p.mass, ks, t);
}

AnalyticSample evaluate(const PolygonPairParams& p, double t) {
    std::vector<Kinematics> ks;
    for (int k = 0; k < p.n; ++k)
        ks.push_back(circular(0, 1.0, p.alpha, p.alpha * t + p.phase_n + kTwoPi * k / p.n, Vec4::Zero()));
    for (int k = 0; k < p.m; ++k)
        ks.push_back(circular(2, 1.0, p.beta, p.beta * t + p.phase_m + kTwoPi * k / p.m, Vec4::Zero()));
    return assemble(Sigma::Sphere, p.mass, ks, t);
}

using kernel::quad;

void push_circular(kernel::Phase<quad>& out, int plane, quad amplitude, quad rate, quad angle,
                   const kernel::Vec<quad>& offset) {
    kernel::Vec<quad> q = offset, v{};
    q[plane] += amplitude * cosq(angle);
    q[plane + 1] += amplitude * sinq(angle);
    v[plane] = -amplitude * rate * sinq(angle);
    v[plane + 1] = amplitude * rate * cosq(angle);
    out.q.push_back(q);
    out.v.push_back(v);
}

void push_hyperbolic(kernel::Phase<quad>& out, quad offset_x, quad scale, quad rate, quad t) {
    out.q.push_back({0, offset_x, scale * sinhq(rate * t), scale * coshq(rate * t)});
    out.v.push_back({0, 0, scale * rate * coshq(rate * t), scale * rate * sinhq(rate * t)});
}

kernel::Phase<quad> extended(const LagrangianParams& p, double t) {
    const quad two_pi = 2 * acosq(-1);
    kernel::Phase<quad> out;
    for (int k = 0; k < 3; ++k)
        push_circular(out, 0, p.r, p.omega, quad(p.omega) * t + two_pi * k / 3, {0, 0, p.y, p.z});
    return out;
}

kernel::Phase<quad> extended(const EulerianParams& p, double t) {
    kernel::Phase<quad> out;
    push_hyperbolic(out, 0, 1, p.beta, t);
    push_hyperbolic(out, p.x, p.eta, p.beta, t);
    push_hyperbolic(out, -quad(p.x), p.eta, p.beta, t);
    return out;
}

kernel::Phase<quad> extended(const PolygonPairParams& p, double t) {
    const quad two_pi = 2 * acosq(-1);
    kernel::Phase<quad> out;
    for (int k = 0; k < p.n; ++k)
        push_circular(out, 0, 1, p.alpha, quad(p.alpha) * t + p.phase_n + two_pi * k / p.n, {0, 0, 0, 0});
    for (int k = 0; k < p.m; ++k)
        push_circular(out, 2, 1, p.beta, quad(p.beta) * t + p.phase_m + two_pi * k / p.m, {0, 0, 0, 0});
    return out;
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

void check_parameters(FamilyKind kind, const FamilyParams& params) {
    std::vector<std::string> bad;
    std::ostringstream why;
    auto fail = [&](const char* field, const std::string& reason) {
        bad.emplace_back(field);
        if (why.tellp() > 0) why << "; ";
        why << reason;
    };

    switch (kind) {
        case FamilyKind::LagrangianElliptic: {
            const auto* p = std::get_if<LagrangianParams>(&params);
            if (!p) throw ValidationError("kind", "parameters do not match a Lagrangian family");
            if (!positive(p->mass)) fail("mass", "mass must be positive");
            if (!(p->r > 0.0 && p->r < 1.0)) fail("r", "r must lie in the open interval (0, 1)");
            if (!(std::abs(p->r * p->r + p->y * p->y + p->z * p->z - 1.0) <= 1e-12))
                fail("y", "r^2 + y^2 + z^2 must equal 1");
            if (!std::isfinite(p->omega) || p->omega == 0.0) fail("omega", "omega must be nonzero");
            break;
        }
        case FamilyKind::EulerianHyperbolic: {
            const auto* p = std::get_if<EulerianParams>(&params);
            if (!p) throw ValidationError("kind", "parameters do not match an Eulerian family");
            if (!positive(p->mass)) fail("mass", "mass must be positive");
            if (!(p->eta >= 1.0 + kEtaMargin)) fail("eta", "eta must exceed 1 (beta^2 has a pole at eta = 1)");
            else if (!(std::abs(p->x * p->x - p->eta * p->eta + 1.0) <= 1e-12 * p->eta * p->eta))
                fail("x", "x^2 - eta^2 must equal -1");
            if (!std::isfinite(p->beta) || p->beta == 0.0) fail("beta", "beta must be nonzero");
            break;
        }
        case FamilyKind::ComplementarySixBody:
        case FamilyKind::ComplementaryPolygonPair: {
            const auto* p = std::get_if<PolygonPairParams>(&params);
            if (!p) throw ValidationError("kind", "parameters do not match a polygon-pair family");
            if (kind == FamilyKind::ComplementarySixBody && (p->n != 3 || p->m != 3))
                fail("N", "the six-body family has three bodies on each circle");
            auto odd_count = [&](int count, const char* field) {
                if (count < 3) fail(field, std::string(field) + " must be at least 3");
                else if (count % 2 == 0)
                    fail(field, std::string(field) +
                                    " must be odd: an even regular polygon contains antipodal pairs, "
                                    "which are singular");
            };
            odd_count(p->n, "N");
            odd_count(p->m, "M");
            if (!positive(p->mass)) fail("mass", "mass must be positive");
            if (!std::isfinite(p->alpha) || p->alpha == 0.0) fail("alpha", "alpha must be nonzero");
            if (!std::isfinite(p->beta) || p->beta == 0.0) fail("beta", "beta must be nonzero");
            break;
        }
        case FamilyKind::UnequalMassPolygonPair:
            throw ValidationError("kind", "unequal-mass polygon pairs are not implemented");
    }
    if (!bad.empty()) throw ValidationError(std::move(bad), why.str());
}

double construction_residual(const FamilyParams& params) {
    double worst = 0.0;
    for (double t : linspace(0.0, 1.0, 11)) worst = std::max(worst, candidate_residual(params, t));
    return worst;
}

}  // namespace

std::string_view to_string(FamilyKind kind) noexcept {
    switch (kind) {
        case FamilyKind::LagrangianElliptic: return "lagrangian";
        case FamilyKind::EulerianHyperbolic: return "eulerian";
        case FamilyKind::ComplementarySixBody: return "six-body";
        case FamilyKind::ComplementaryPolygonPair: return "polygon-pair";
        case FamilyKind::UnequalMassPolygonPair: return "unequal-polygon-pair";
    }
    return "unknown";
}

std::string_view to_string(MassScaling s) noexcept {
    return s == MassScaling::Literal ? "literal" : "mass-scaled";
}

double lagrangian_omega_squared(double mass, double r) {
    return 8.0 * mass / (std::sqrt(3.0) * r * r * r * std::pow(4.0 - 3.0 * r * r, 1.5));
}

double eulerian_beta_squared(double eta, double mass_factor) {
    return mass_factor * (1.0 + 4.0 * eta * eta) / (4.0 * eta * eta * eta * std::pow(eta * eta - 1.0, 1.5));
}

AnalyticSample evaluate_candidate(const FamilyParams& params, double t) {
    return std::visit([t](const auto& p) { return evaluate(p, t); }, params);
}

double candidate_residual(const FamilyParams& params, double t) {
    return residual(evaluate_candidate(params, t));
}

Sigma OrbitFamily::sigma() const noexcept {
    return kind_ == FamilyKind::EulerianHyperbolic ? Sigma::Hyperbolic : Sigma::Sphere;
}

std::size_t OrbitFamily::body_count() const noexcept {
    if (const auto* p = std::get_if<PolygonPairParams>(&params_)) return static_cast<std::size_t>(p->n + p->m);
    return 3;
}

double OrbitFamily::mass() const noexcept {
    return std::visit([](const auto& p) { return p.mass; }, params_);
}

SystemState OrbitFamily::state(double t) const { return sample(t).state; }

AnalyticSample OrbitFamily::sample(double t) const { return evaluate_candidate(params_, t); }

kernel::Phase<kernel::quad> OrbitFamily::extended_phase(double t) const {
    auto y = std::visit([t](const auto& p) { return extended(p, t); }, params_);
    const Sigma sg = sigma();
    const double s = sign(sg);
    for (std::size_t i = 0; i < y.q.size(); ++i) {
        const quad scale = sqrtq(s * kernel::inner(y.q[i], y.q[i], sg));
        for (auto& c : y.q[i]) c /= scale;
        const quad along = s * kernel::inner(y.q[i], y.v[i], sg);
        for (int k = 0; k < 4; ++k) y.v[i][k] -= along * y.q[i][k];
    }
    return y;
}

std::optional<std::pair<double, double>> OrbitFamily::plane_frequencies() const {
    if (const auto* p = std::get_if<LagrangianParams>(&params_)) return std::pair{p->omega, 0.0};
    if (const auto* p = std::get_if<PolygonPairParams>(&params_)) return std::pair{p->alpha, p->beta};
    return std::nullopt;
}

OrbitFamily validate_family(FamilyKind kind, const FamilyParams& params) {
    check_parameters(kind, params);
    double worst = 0.0;
    try {
        worst = construction_residual(params);
    } catch (const SingularityError& e) {
        throw FamilyValidationError(std::string("candidate orbit is singular: ") + e.what(),
                                    std::numeric_limits<double>::infinity());
    }
    if (!(worst <= kFamilyResidualTolerance)) {
        std::ostringstream msg;
        msg << to_string(kind) << " candidate does not solve the equations of motion: max residual " << worst;
        throw FamilyValidationError(msg.str(), worst);
    }
    if (std::holds_alternative<PolygonPairParams>(params)) {
        for (double t : linspace(0.0, 1.0, 11)) {
            const auto grav = gravitational_acceleration(evaluate_candidate(params, t).state);
            for (std::size_t i = 0; i < grav.size(); ++i) {
                const double norm = grav[i].norm();
                if (!(norm <= kCancellationTolerance)) {
                    std::ostringstream msg;
                    msg << "net gravitational force on body " << i << " does not cancel (norm " << norm << ")";
                    throw FamilyValidationError(msg.str(), worst);
                }
            }
        }
    }
    return OrbitFamily(kind, params, worst);
}

OrbitFamily lagrangian_elliptic(double mass, double r, double y, double z, int sign) {
    LagrangianParams p{mass, r, y, z, 0.0};
    if (sign != 1 && sign != -1) throw ValidationError("sign", "sign must be +1 or -1");
    if (positive(mass) && r > 0.0 && r < 1.0) p.omega = sign * std::sqrt(lagrangian_omega_squared(mass, r));
    else p.omega = 1.0;  // let check_parameters report the real offenders
    return validate_family(FamilyKind::LagrangianElliptic, p);
}

OrbitFamily eulerian_hyperbolic(double mass, double eta, int sign) {
    if (sign != 1 && sign != -1) throw ValidationError("sign", "sign must be +1 or -1");
    EulerianParams p{mass, eta, 0.0, 1.0};
    if (eta >= 1.0 + kEtaMargin) p.x = std::sqrt(eta * eta - 1.0);
    check_parameters(FamilyKind::EulerianHyperbolic, p);

    p.beta = sign * std::sqrt(eulerian_beta_squared(eta));
    double literal_residual = 0.0;
    try {
        OrbitFamily family = validate_family(FamilyKind::EulerianHyperbolic, p);
        family.mass_scaling_ = MassScaling::Literal;
        return family;
    } catch (const FamilyValidationError& e) {
        literal_residual = e.max_residual();
    }
    p.beta = sign * std::sqrt(eulerian_beta_squared(eta, mass));
    try {
        OrbitFamily family = validate_family(FamilyKind::EulerianHyperbolic, p);
        family.mass_scaling_ = MassScaling::MassScaled;
        return family;
    } catch (const FamilyValidationError& e) {
        std::ostringstream msg;
        msg << "neither beta^2 variant solves the equations (literal residual " << literal_residual
            << ", mass-scaled residual " << e.max_residual() << ")";
        throw FamilyValidationError(msg.str(), std::min(literal_residual, e.max_residual()));
    }
}

OrbitFamily complementary_six_body(double mass, double alpha, double beta) {
    return validate_family(FamilyKind::ComplementarySixBody, PolygonPairParams{3, 3, mass, alpha, beta, 0.0, 0.0});
}

OrbitFamily complementary_polygon_pair(const PolygonPairParams& params) {
    return validate_family(FamilyKind::ComplementaryPolygonPair, params);
}

double residual(const OrbitFamily& family, double t) { return residual(family.sample(t)); }

double max_residual(const OrbitFamily& family, std::span<const double> times) {
    double worst = 0.0;
    for (double t : times) worst = std::max(worst, residual(family, t));
    return worst;
}

std::vector<double> check_times(const OrbitFamily& family, std::size_t n) {
    return linspace(0.0, family.sigma() == Sigma::Sphere ? 10.0 : 1.0, n);
}

std::vector<double> linspace(double t0, double t1, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = t0;
        return out;
    }
    for (std::size_t k = 0; k < n; ++k)
        out[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n - 1);
    return out;
}

std::vector<CircleComCandidate> com_examples_lagrangian(const OrbitFamily& family, std::size_t n) {
    const auto* p = std::get_if<LagrangianParams>(&family.params());
    if (!p) throw DomainError("com_examples_lagrangian needs a Lagrangian family");
    const double period = kTwoPi / std::abs(p->omega);
    const auto times = linspace(0.0, period, 64);

    std::vector<CircleComCandidate> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
        const ManifoldPoint q0(0.0, 0.0, std::cos(s), std::sin(s));
        const SystemState start = family.state(0.0);
        const double reference = distance(q0, start[0].position);
        double field = 0.0, spread = 0.0;
        for (double t : times) {
            const SystemState state = family.state(t);
            field = std::max(field, gravitational_field(state, q0).coords.norm());
            for (const Body& b : state.bodies())
                spread = std::max(spread, std::abs(distance(q0, b.position) - reference));
        }
        out.push_back(CircleComCandidate{q0, field, reference, spread, field <= kCancellationTolerance,
                                         spread <= kCancellationTolerance});
    }
    return out;
}

EulerianComTrack::EulerianComTrack(double w_star, double beta)
    : w_star_(w_star), rho_star_(std::sqrt(1.0 + w_star * w_star)), beta_(beta) {}

ManifoldPoint EulerianComTrack::at(double t) const {
    return ManifoldPoint(Vec4(w_star_, 0.0, rho_star_ * std::sinh(beta_ * t), rho_star_ * std::cosh(beta_ * t)),
                         Sigma::Hyperbolic);
}

EulerianComCertificate com_example_eulerian(const OrbitFamily& family, double w_star) {
    const auto* p = std::get_if<EulerianParams>(&family.params());
    if (!p) throw DomainError("com_example_eulerian needs an Eulerian family");
    EulerianComTrack track(w_star, p->beta);
    const double d1 = std::acosh(track.rho_star());
    const double d23 = std::acosh(p->eta * track.rho_star());
    double worst = 0.0;
    for (double t : linspace(0.0, 5.0, 101)) {
        const SystemState state = family.state(t);
        const ManifoldPoint q = track.at(t);
        worst = std::max(worst, std::abs(distance(q, state[0].position) - d1));
        worst = std::max(worst, std::abs(distance(q, state[1].position) - d23));
        worst = std::max(worst, std::abs(distance(q, state[2].position) - d23));
    }
    if (!(worst <= kFamilyResidualTolerance)) {
        std::ostringstream msg;
        msg << "track w*=" << w_star << " is not equidistant in time (deviation " << worst << ")";
        throw FamilyValidationError(msg.str(), worst);
    }
    return EulerianComCertificate{track, d1, d23, worst};
}

}  // namespace cnb
