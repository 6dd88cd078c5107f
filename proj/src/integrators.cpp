#include "curvednbody/integrators.hpp"

#include "curvednbody/errors.hpp"
#include "curvednbody/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <string>

namespace cnb {

namespace {

using kernel::ScalarTraits;

template <class T>
using Vecs = std::vector<kernel::Vec<T>>;

using kernel::Phase;

template <class T>
struct Rates {
    Vecs<T> dq;
    Vecs<T> dv;
};

template <class T>
class System {
public:
    System(std::vector<double> masses, Sigma sigma) : masses_(std::move(masses)), sigma_(sigma) {}

    Rates<T> rates(const Phase<T>& y) const {
        Rates<T> r{y.v, Vecs<T>(y.q.size())};
        kernel::acceleration<T>(y.q, y.v, masses_, sigma_, kSingularityThreshold, r.dv);
        return r;
    }

    Sigma sigma() const { return sigma_; }
    const std::vector<double>& masses() const { return masses_; }

private:
    std::vector<double> masses_;
    Sigma sigma_;
};

// y + h Σ c_k r_k
template <class T>
Phase<T> advance(const Phase<T>& y, double h, std::initializer_list<std::pair<double, const Rates<T>*>> terms) {
    Phase<T> out = y;
    const T step = h;
    for (std::size_t i = 0; i < y.q.size(); ++i) {
        for (int k = 0; k < 4; ++k) {
            T dq = 0, dv = 0;
            for (const auto& [c, r] : terms) {
                dq += c * r->dq[i][k];
                dv += c * r->dv[i][k];
            }
            out.q[i][k] += step * dq;
            out.v[i][k] += step * dv;
        }
    }
    return out;
}

template <class T>
Phase<T> rk4(const System<T>& sys, const Phase<T>& y, double h) {
    const Rates<T> k1 = sys.rates(y);
    const Rates<T> k2 = sys.rates(advance<T>(y, 0.5 * h, {{1.0, &k1}}));
    const Rates<T> k3 = sys.rates(advance<T>(y, 0.5 * h, {{1.0, &k2}}));
    const Rates<T> k4 = sys.rates(advance<T>(y, h, {{1.0, &k3}}));
    Phase<T> out = y;
    const T sixth = T(h) / 6;
    for (std::size_t i = 0; i < y.q.size(); ++i) {
        for (int k = 0; k < 4; ++k) {
            out.q[i][k] += sixth * (k1.dq[i][k] + 2 * k2.dq[i][k] + 2 * k3.dq[i][k] + k4.dq[i][k]);
            out.v[i][k] += sixth * (k1.dv[i][k] + 2 * k2.dv[i][k] + 2 * k3.dv[i][k] + k4.dv[i][k]);
        }
    }
    return out;
}

template <class T>
double max_abs(const T& x) {
    return std::abs(double(x));
}

// Y = y + h f((y + Y) / 2), by fixed-point iteration.
template <class T>
Phase<T> implicit_midpoint(const System<T>& sys, const Phase<T>& y, double h) {
    const Rates<T> f0 = sys.rates(y);
    Phase<T> next = advance<T>(y, h, {{1.0, &f0}});
    double scale = 1.0;
    for (std::size_t i = 0; i < y.q.size(); ++i)
        for (int k = 0; k < 4; ++k) scale = std::max({scale, max_abs(y.q[i][k]), max_abs(y.v[i][k])});
    const double stop = 8.0 * ScalarTraits<T>::epsilon * scale;

    for (int iter = 0; iter < 200; ++iter) {
        Phase<T> mid = y;
        for (std::size_t i = 0; i < y.q.size(); ++i) {
            for (int k = 0; k < 4; ++k) {
                mid.q[i][k] = (y.q[i][k] + next.q[i][k]) / 2;
                mid.v[i][k] = (y.v[i][k] + next.v[i][k]) / 2;
            }
        }
        const Rates<T> f = sys.rates(mid);
        Phase<T> candidate = advance<T>(y, h, {{1.0, &f}});
        double change = 0.0;
        for (std::size_t i = 0; i < y.q.size(); ++i) {
            for (int k = 0; k < 4; ++k) {
                change = std::max(change, max_abs(T(candidate.q[i][k] - next.q[i][k])));
                change = std::max(change, max_abs(T(candidate.v[i][k] - next.v[i][k])));
            }
        }
        next = std::move(candidate);
        if (change <= stop) break;
    }
    return next;
}

template <class T>
Phase<T> triple_jump(const System<T>& sys, const Phase<T>& y, double h) {
    const double cbrt2 = std::cbrt(2.0);
    const double outer = 1.0 / (2.0 - cbrt2);
    const double middle = -cbrt2 / (2.0 - cbrt2);
    Phase<T> out = implicit_midpoint(sys, y, outer * h);
    out = implicit_midpoint(sys, out, middle * h);
    return implicit_midpoint(sys, out, outer * h);
}

template <class T>
double constraint_residual_of(const Phase<T>& y, Sigma sigma) {
    double worst = 0.0;
    for (std::size_t i = 0; i < y.q.size(); ++i) {
        const Vec4 qd = kernel::to_eigen(y.q[i]);
        const Vec4 vd = kernel::to_eigen(y.v[i]);
        const double qn = qd.norm();
        const double pos = max_abs(T(kernel::inner(y.q[i], y.q[i], sigma) - sign(sigma))) / std::max(1.0, qn * qn);
        const double vel = max_abs(kernel::inner(y.q[i], y.v[i], sigma)) / std::max(1.0, qn * vd.norm());
        worst = std::max({worst, pos, vel});
    }
    return worst;
}

// Renormalizes each position onto the manifold and removes the normal
// component of its velocity.
template <class T>
void project(Phase<T>& y, Sigma sigma) {
    const double s = sign(sigma);
    for (std::size_t i = 0; i < y.q.size(); ++i) {
        auto& q = y.q[i];
        if (sigma == Sigma::Hyperbolic && !(q[3] > 0))
            throw ConstraintViolation("integration left the upper sheet of H3");
        const T n2 = kernel::inner(q, q, sigma);
        if (!(s * n2 > 0)) throw ConstraintViolation("position cannot be renormalized onto the manifold");
        const T scale = ScalarTraits<T>::sqrt(s * n2);
        for (auto& c : q) c /= scale;
        const T along = s * kernel::inner(q, y.v[i], sigma);
        for (int k = 0; k < 4; ++k) y.v[i][k] -= along * q[k];
    }
}

template <class T>
Phase<T> phase_of(const SystemState& state) {
    Phase<T> y;
    for (const Body& b : state.bodies()) {
        y.q.push_back(kernel::from_eigen<T>(b.position.coords()));
        y.v.push_back(kernel::from_eigen<T>(b.velocity));
    }
    return y;
}

template <class T>
SystemState state_of(const Phase<T>& y, const System<T>& sys, double time) {
    std::vector<Body> bodies;
    bodies.reserve(y.q.size());
    for (std::size_t i = 0; i < y.q.size(); ++i) {
        ManifoldPoint q(kernel::to_eigen(y.q[i]), sys.sigma());
        Vec4 v = tangent_project(q.coords(), kernel::to_eigen(y.v[i]), sys.sigma());
        bodies.push_back(Body{sys.masses()[i], q, v});
    }
    try {
        return SystemState(sys.sigma(), std::move(bodies), time);
    } catch (const SingularityError& e) {
        throw e.at_time(time);
    }
}

// Energy and angular momentum evaluated in working precision; far out on H³
// the binary64 state alone loses digits to cancellation between large terms.
template <class T>
ConservedQuantities conserved_of(const Phase<T>& y, std::span<const double> m, Sigma sigma) {
    const double s = sign(sigma);
    T kinetic = 0, force = 0;
    std::array<T, 6> c{};
    constexpr int planes[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (std::size_t i = 0; i < y.q.size(); ++i) {
        kinetic += m[i] * kernel::inner(y.v[i], y.v[i], sigma) * (s * kernel::inner(y.q[i], y.q[i], sigma));
        for (std::size_t j = i + 1; j < y.q.size(); ++j)
            force += s * m[i] * m[j] * kernel::inner(y.q[i], y.q[j], sigma) /
                     kernel::pair_denominator(y.q[i], y.q[j], sigma, i, j, kSingularityThreshold);
        for (int k = 0; k < 6; ++k) {
            const int a = planes[k][0], b = planes[k][1];
            c[k] += m[i] * (y.q[i][a] * y.v[i][b] - y.q[i][b] * y.v[i][a]);
        }
    }
    ConservedQuantities out{double(kinetic / 2 - force), {}};
    for (int k = 0; k < 6; ++k) out.angular_momentum[k] = double(c[k]);
    return out;
}

template <class T>
void record_sample(TrajectoryRecord& record, SystemState state, const Phase<T>& y, const System<T>& sys,
                   double drift) {
    record.append(state, drift);
    record.conserved.back() = conserved_of(y, sys.masses(), sys.sigma());
}

// One step in working precision; returns the pre-projection drift.
template <class T>
double advance_in_place(const System<T>& sys, Phase<T>& y, const IntegratorConfig& config, double h, double t_start) {
    Phase<T> next;
    try {
        next = config.method == Method::RK4Projected ? rk4(sys, y, h) : triple_jump(sys, y, h);
    } catch (const SingularityError& e) {
        throw e.at_time(t_start);
    }
    const double drift = constraint_residual_of(next, sys.sigma());
    if (!(drift <= config.max_constraint_drift)) throw StepRejected(drift, config.max_constraint_drift, t_start);
    project(next, sys.sigma());
    const double after = constraint_residual_of(next, sys.sigma());
    if (!(after <= config.projection_tolerance)) {
        std::ostringstream msg;
        msg << "projection left a constraint residual of " << after << " after the step from t=" << t_start;
        throw ConstraintViolation(msg.str());
    }
    y = std::move(next);
    return drift;
}

template <class T>
StepResult step_impl(const SystemState& state, const IntegratorConfig& config) {
    System<T> sys(state.masses(), state.sigma());
    Phase<T> y = phase_of<T>(state);
    const double drift = advance_in_place(sys, y, config, config.step, state.time());
    return StepResult{state_of(y, sys, state.time() + config.step), drift};
}

template <class T>
TrajectoryRecord integrate_impl(const SystemState& initial, Phase<T> y, double t_end, const IntegratorConfig& config,
                                double sampling) {
    const double t0 = initial.time();
    const double h = config.step;
    const auto n_steps = static_cast<long long>(std::ceil((t_end - t0) / h - 1e-9));
    const long long every = std::max(1LL, std::llround(sampling / h));

    System<T> sys(initial.masses(), initial.sigma());

    TrajectoryRecord record;
    record_sample(record, initial, y, sys, constraint_residual(initial));

    double t = t0;
    double drift_since_sample = 0.0;
    try {
        for (long long k = 1; k <= n_steps; ++k) {
            const double t_next = (k == n_steps) ? t_end : t0 + static_cast<double>(k) * h;
            drift_since_sample = std::max(drift_since_sample, advance_in_place(sys, y, config, t_next - t, t));
            t = t_next;
            if (k % every == 0 || k == n_steps) {
                record_sample(record, state_of(y, sys, t), y, sys, drift_since_sample);
                drift_since_sample = 0.0;
            }
        }
    } catch (const SingularityError& e) {
        throw IntegrationFailure(e, std::move(record));
    } catch (const StepRejected& e) {
        throw IntegrationFailure(e, std::move(record));
    }
    return record;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
    return m == Method::RK4Projected ? "rk4-projected" : "symmetric-projected";
}

std::string_view to_string(Arithmetic a) noexcept {
    return a == Arithmetic::Binary64 ? "binary64" : "binary128";
}

void IntegratorConfig::validate() const {
    std::vector<std::string> bad;
    if (!(step > 0.0) || !std::isfinite(step)) bad.emplace_back("step");
    if (!(projection_tolerance > 0.0)) bad.emplace_back("projection_tolerance");
    if (!(max_constraint_drift > 0.0)) bad.emplace_back("max_constraint_drift");
    if (!bad.empty()) throw ValidationError(std::move(bad), "integrator step and tolerances must be positive");
}

void TrajectoryRecord::append(const SystemState& state, double drift) {
    times.push_back(state.time());
    conserved.push_back(conserved_quantities(state));
    states.push_back(state);
    constraint_drift.push_back(drift);
}

StepResult step(const SystemState& state, const IntegratorConfig& config) {
    config.validate();
    return config.arithmetic == Arithmetic::Binary64 ? step_impl<double>(state, config)
                                                     : step_impl<kernel::quad>(state, config);
}

IntegrationFailure::IntegrationFailure(Cause cause, TrajectoryRecord partial)
    : Error(std::visit([](const auto& e) { return std::string(e.what()); }, cause)),
      cause_(std::move(cause)), partial_(std::move(partial)) {}

TrajectoryRecord integrate(const SystemState& initial, double t_end, const IntegratorConfig& config,
                           double sampling) {
    config.validate();
    if (!(t_end > initial.time())) throw ValidationError("t_end", "t_end must exceed the initial time");
    if (!(sampling > 0.0)) throw ValidationError("sampling", "sampling cadence must be positive");
    if (config.arithmetic == Arithmetic::Binary64)
        return integrate_impl<double>(initial, phase_of<double>(initial), t_end, config, sampling);
    return integrate_impl<kernel::quad>(initial, phase_of<kernel::quad>(initial), t_end, config, sampling);
}

TrajectoryRecord integrate(const OrbitFamily& family, double t0, double t_end, const IntegratorConfig& config,
                           double sampling) {
    if (config.arithmetic == Arithmetic::Binary64) return integrate(family.state(t0), t_end, config, sampling);
    config.validate();
    if (!(t_end > t0)) throw ValidationError("t_end", "t_end must exceed the initial time");
    if (!(sampling > 0.0)) throw ValidationError("sampling", "sampling cadence must be positive");
    return integrate_impl<kernel::quad>(family.state(t0), family.extended_phase(t0), t_end, config, sampling);
}

TrajectoryRecord tabulate(const std::function<SystemState(double)>& evaluator, std::span<const double> times) {
    TrajectoryRecord record;
    for (double t : times) {
        SystemState s = evaluator(t);
        record.append(s, constraint_residual(s));
    }
    return record;
}

}  // namespace cnb
