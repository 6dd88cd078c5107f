#pragma once

#include "curvednbody/dynamics.hpp"
#include "curvednbody/families.hpp"
#include "curvednbody/errors.hpp"

#include <functional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace cnb {

enum class Method {
    RK4Projected,       // classical Runge-Kutta, then projection
    SymmetricProjected, // triple-jump composition of the implicit midpoint rule, then projection
};

std::string_view to_string(Method m) noexcept;

/// Working precision of the integrator's internal state. Recorded states are
/// always binary64. The relative equilibria of interest are linearly unstable,
/// so binary64 round-off grows like e^{λt} and swamps truncation error over
/// t ~ 10; binary128 keeps it below.
enum class Arithmetic { Binary64, Binary128 };

std::string_view to_string(Arithmetic a) noexcept;

struct IntegratorConfig {
    Method method = Method::RK4Projected;
    Arithmetic arithmetic = Arithmetic::Binary128;
    double step = 1e-3;
    double projection_tolerance = 1e-12;
    double max_constraint_drift = 1e-6;

    void validate() const;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<SystemState> states;
    std::vector<ConservedQuantities> conserved;
    // Largest pre-projection constraint residual since the previous sample.
    std::vector<double> constraint_drift;

    std::size_t size() const noexcept { return times.size(); }
    void append(const SystemState& state, double drift);
};

struct StepResult {
    SystemState state;
    double pre_projection_drift;
};

/// Advances one step. Positions are renormalized and velocities
/// tangent-projected afterwards. Throws SingularityError (stamped with the
/// step's start time) or StepRejected.
StepResult step(const SystemState& state, const IntegratorConfig& config);

/// Fixed-step integration to t_end. A state is recorded every `sampling` time
/// units (rounded to a whole number of steps) and at t_end.
TrajectoryRecord integrate(const SystemState& initial, double t_end, const IntegratorConfig& config,
                           double sampling);

/// Integrates from the closed form of family at t0. Under Binary128 the
/// working state is seeded from OrbitFamily::extended_phase, so the initial
/// condition carries no binary64 rounding.
TrajectoryRecord integrate(const OrbitFamily& family, double t0, double t_end, const IntegratorConfig& config,
                           double sampling);

/// Thrown by integrate(); carries everything recorded before the failure.
class IntegrationFailure : public Error {
public:
    using Cause = std::variant<SingularityError, StepRejected>;

    IntegrationFailure(Cause cause, TrajectoryRecord partial);

    const Cause& cause() const noexcept { return cause_; }
    const TrajectoryRecord& partial() const noexcept { return partial_; }

private:
    Cause cause_;
    TrajectoryRecord partial_;
};

/// Tabulates a trajectory given as a function of time, e.g. a closed-form family.
TrajectoryRecord tabulate(const std::function<SystemState(double)>& evaluator, std::span<const double> times);

}  // namespace cnb
