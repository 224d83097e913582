#ifndef LAGCTL_ODE_HPP
#define LAGCTL_ODE_HPP

#include "lagctl/types.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace lagctl {

struct IntegratorConfig {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    int steps_per_period = 20;  // minimum steps per oscillation period, >= 20
    int stride = 1;             // record every stride-th accepted step
    std::size_t max_steps = 20'000'000;

    void validate() const;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
    double largest_step = 0.0;
    double step_ceiling = std::numeric_limits<double>::infinity();
};

/// dy = f(t, y). The side tells which one-sided limit to use for inputs that
/// jump at the ends of the current segment.
using OdeRhs = std::function<void(double t, const Vector& y, Vector& dy, Side side)>;
/// Called with (t, y, f(t, y)) at the start and after each recorded step. At a
/// breakpoint it is called twice with the same t: first with the left-limit
/// rate, then with the right-limit rate of the next segment.
using OdeObserver = std::function<void(double t, const Vector& y, const Vector& dy)>;

/// Adaptive Dormand-Prince 5(4). Integrates from t0 to t1 (either direction),
/// restarting at each breakpoint so that no step straddles one.
/// Throws IntegrationError on step underflow, non-finite state or budget exhaustion.
Vector integrate_dopri(const OdeRhs& f, double t0, const Vector& y0, double t1, const IntegratorConfig& cfg,
                       std::vector<double> breakpoints, const OdeObserver& observe, StepStats& stats);

/// Cubic Hermite interpolation between (t0, y0, f0) and (t1, y1, f1).
Vector hermite(double t, double t0, const Vector& y0, const Vector& f0, double t1, const Vector& y1,
               const Vector& f1);

}  // namespace lagctl

#endif  // LAGCTL_ODE_HPP
