#include "curvednbody/dynamics.hpp"

#include "curvednbody/errors.hpp"
#include "curvednbody/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace cnb {

namespace {

double denominator_for_pair(const Vec4& qi, const Vec4& qj, Sigma sigma, std::size_t i, std::size_t j) {
    return kernel::pair_denominator(kernel::from_eigen<double>(qi), kernel::from_eigen<double>(qj), sigma, i, j,
                                    kSingularityThreshold);
}

std::vector<kernel::Vec<double>> to_arrays(std::span<const Vec4> vs) {
    std::vector<kernel::Vec<double>> out;
    out.reserve(vs.size());
    for (const Vec4& v : vs) out.push_back(kernel::from_eigen<double>(v));
    return out;
}

}  // namespace

SystemState::SystemState(Sigma sigma, std::vector<Body> bodies, double time)
    : sigma_(sigma), bodies_(std::move(bodies)), time_(time) {
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
        const Body& b = bodies_[i];
        if (!(b.mass > 0.0) || !std::isfinite(b.mass))
            throw ValidationError("bodies[" + std::to_string(i) + "].mass", "masses must be positive");
        if (b.position.sigma() != sigma)
            throw DomainError("body " + std::to_string(i) + " lives on a different manifold");
        const Vec4& q = b.position.coords();
        const double scale = std::max(1.0, q.norm() * b.velocity.norm());
        const double tangency = std::abs(inner(q, b.velocity, sigma)) / scale;
        if (tangency > kStateTolerance) {
            std::ostringstream msg;
            msg << "velocity of body " << i << " is not tangent (q.v = " << tangency << ")";
            throw ConstraintViolation(msg.str());
        }
    }
    for (std::size_t i = 0; i < bodies_.size(); ++i)
        for (std::size_t j = i + 1; j < bodies_.size(); ++j)
            (void)denominator_for_pair(bodies_[i].position.coords(), bodies_[j].position.coords(), sigma, i, j);
}

double SystemState::total_mass() const noexcept {
    double m = 0.0;
    for (const Body& b : bodies_) m += b.mass;
    return m;
}

std::vector<Vec4> SystemState::positions() const {
    std::vector<Vec4> out;
    out.reserve(bodies_.size());
    for (const Body& b : bodies_) out.push_back(b.position.coords());
    return out;
}

std::vector<Vec4> SystemState::velocities() const {
    std::vector<Vec4> out;
    out.reserve(bodies_.size());
    for (const Body& b : bodies_) out.push_back(b.velocity);
    return out;
}

std::vector<double> SystemState::masses() const {
    std::vector<double> out;
    out.reserve(bodies_.size());
    for (const Body& b : bodies_) out.push_back(b.mass);
    return out;
}

double pair_denominator(const Vec4& qi, const Vec4& qj, Sigma sigma) {
    try {
        return denominator_for_pair(qi, qj, sigma, 0, 0);
    } catch (const SingularityError& e) {
        throw SingularityError(e.kind(), std::nullopt, std::nullopt, e.bracket());
    }
}

void acceleration(std::span<const Vec4> q, std::span<const Vec4> v, std::span<const double> m, Sigma sigma,
                  std::span<Vec4> out) {
    const auto qa = to_arrays(q);
    const auto va = to_arrays(v);
    std::vector<kernel::Vec<double>> acc(q.size());
    kernel::acceleration<double>(qa, va, m, sigma, kSingularityThreshold, acc);
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = kernel::to_eigen(acc[i]);
}

std::vector<Vec4> acceleration(const SystemState& state) {
    const auto q = state.positions();
    const auto v = state.velocities();
    const auto m = state.masses();
    std::vector<Vec4> out(q.size());
    acceleration(q, v, m, state.sigma(), out);
    return out;
}

std::vector<Vec4> gravitational_acceleration(const SystemState& state) {
    const auto q = state.positions();
    const auto m = state.masses();
    const std::vector<Vec4> still(q.size(), Vec4::Zero());
    std::vector<Vec4> out(q.size());
    acceleration(q, still, m, state.sigma(), out);
    return out;
}

TangentVector gravitational_field(const SystemState& state, const ManifoldPoint& test) {
    if (test.sigma() != state.sigma()) throw DomainError("test point lives on a different manifold");
    const double s = sign(state.sigma());
    const Vec4& p = test.coords();
    Vec4 field = Vec4::Zero();
    for (std::size_t j = 0; j < state.size(); ++j) {
        const Vec4& qj = state[j].position.coords();
        double den = 0.0;
        try {
            den = pair_denominator(p, qj, state.sigma());
        } catch (const SingularityError& e) {
            throw SingularityError(e.kind(), std::nullopt, j, e.bracket(), state.time());
        }
        field += state[j].mass * (qj - s * inner(p, qj, state.sigma()) * p) / den;
    }
    return TangentVector{test, field};
}

double force_function(const SystemState& state) {
    const double s = sign(state.sigma());
    double u = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        for (std::size_t j = i + 1; j < state.size(); ++j) {
            const Vec4& qi = state[i].position.coords();
            const Vec4& qj = state[j].position.coords();
            u += s * state[i].mass * state[j].mass * inner(qi, qj, state.sigma()) /
                 denominator_for_pair(qi, qj, state.sigma(), i, j);
        }
    }
    return u;
}

double kinetic_energy(const SystemState& state) {
    const double s = sign(state.sigma());
    double t = 0.0;
    for (const Body& b : state.bodies()) {
        const Vec4& q = b.position.coords();
        t += b.mass * inner(b.velocity, b.velocity, state.sigma()) * (s * inner(q, q, state.sigma()));
    }
    return 0.5 * t;
}

double energy(const SystemState& state) { return kinetic_energy(state) - force_function(state); }

AngularMomentum angular_momentum(const SystemState& state) {
    AngularMomentum c{};
    for (const Body& b : state.bodies()) {
        const Vec4& q = b.position.coords();
        const Vec4& v = b.velocity;
        int k = 0;
        for (int a = 0; a < 4; ++a)
            for (int bb = a + 1; bb < 4; ++bb) c[k++] += b.mass * (q[a] * v[bb] - q[bb] * v[a]);
    }
    return c;
}

ConservedQuantities conserved_quantities(const SystemState& state) {
    return ConservedQuantities{energy(state), angular_momentum(state)};
}

double constraint_residual(std::span<const Vec4> q, std::span<const Vec4> v, Sigma sigma) {
    double worst = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double qn = q[i].norm();
        const double pos = std::abs(inner(q[i], q[i], sigma) - sign(sigma)) / std::max(1.0, qn * qn);
        const double vel = std::abs(inner(q[i], v[i], sigma)) / std::max(1.0, qn * v[i].norm());
        worst = std::max({worst, pos, vel});
    }
    return worst;
}

double constraint_residual(const SystemState& state) {
    const auto q = state.positions();
    const auto v = state.velocities();
    return constraint_residual(q, v, state.sigma());
}

double residual(const AnalyticSample& sample) {
    const auto numeric = acceleration(sample.state);
    double worst = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i)
        worst = std::max(worst, (numeric[i] - sample.acceleration[i]).cwiseAbs().maxCoeff());
    return worst;
}

}  // namespace cnb
