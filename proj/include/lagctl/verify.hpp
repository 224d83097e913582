#ifndef LAGCTL_VERIFY_HPP
#define LAGCTL_VERIFY_HPP

#include "lagctl/sim.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lagctl {

/// Grid suprema of the tracking errors of a full trajectory.
struct TrackingReport {
    double T = 0.0;
    double alpha = 0.0;
    double sup_p = 0.0;  // sup |p(t)|
    double sup_q = 0.0;  // sup |q(t) - q*(psi(t))|
    double sup_u = 0.0;  // sup |u(t) - u*(psi(t))|
    double t_sup_p = 0.0;
    double t_sup_q = 0.0;
    double t_sup_u = 0.0;
    double max_scaled_p = 0.0;  // sup |p(t)| / psi'(t)
    std::size_t grid_points = 0;
    double points_per_period = 0.0;  // 0 when the control has no frequency
};

/// Suprema over the trajectory samples, refined with Hermite points to at
/// least `points_per_period` per oscillation period when omega is given.
TrackingReport tracking_error(const Trajectory& full, const PathControl& path, const Path& q_ref,
                              const TimeRescaling& rescaling, std::optional<double> omega = std::nullopt,
                              int points_per_period = 10);

struct CaratheodoryReport {
    double max_residual = 0.0;
    double t_max = 0.0;
    double max_weight = 0.0;  // largest conic weight used in the projections
    std::size_t points = 0;
    double tolerance = 0.0;
    bool passed = false;
    std::vector<double> residuals;
};

/// max over samples of the distance from qdot - K udot to the cone spanned by
/// the dictionary at (q, u). Uses the stored rates of the trajectory.
CaratheodoryReport caratheodory_check(const Trajectory& traj, const ReducedDynamics& dyn, const Dictionary& dict,
                                      double tol);

/// Samples (q, u) paths with analytic rates on a grid.
Trajectory trajectory_from_paths(const Path& q, const Path& u, const std::vector<double>& grid);

/// Replaces the stored rates by central differences of the samples
/// (one-sided at the ends). Throws ValidationError with fewer than 3 samples.
Trajectory with_difference_rates(const Trajectory& traj);

/// Reference q*(s): the reduced trajectory driven by (u*, w*).
std::shared_ptr<const Path> reference_path(const ReducedDynamics& dyn, const PathControl& path, const Vector& q0,
                                           const IntegratorConfig& cfg);

/// One tracking experiment: synthesize at T, integrate the full system, measure.
struct TrackingProblem {
    DynamicsPtr dyn;
    PathControl path;
    std::shared_ptr<const Path> q_ref;
    Vector q0;
    Vector p0;
    IntegratorConfig cfg;
    std::optional<double> freq_override;  // absolute omega
    std::optional<double> freq_scale;     // omega = scale * alpha^3
};

std::optional<double> frequency_for(const TrackingProblem& problem, double T);

TrackingReport run_tracking(const TrackingProblem& problem, double T, Trajectory* trajectory = nullptr);

struct SweepRow {
    double T = 0.0;
    double alpha = 0.0;
    TrackingReport report;
    StepStats stats;
    bool ok = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool decreasing_p = false;
    bool decreasing_q = false;
    bool decreasing_u = false;
    /// Least-squares slope of log sup|p| against log(1/ln(1+T)).
    double fitted_exponent_p = 0.0;
};

/// Independent runs per T (concurrent); rows sorted by T. A failed run is
/// annotated and excluded from the monotonicity flags, which then read false.
SweepResult convergence_sweep(const TrackingProblem& problem, std::vector<double> T_list);

/// Endpoint (q(1), u(1)) of the reduced trajectory of a family member.
Vector reduced_endpoint(const ReducedDynamics& dyn, const PathControl& member, const Vector& q0,
                        const IntegratorConfig& cfg);

struct ReachabilityReport {
    Matrix J;
    Vector singular_values;
    int rank = 0;
    double condition = 0.0;
    bool full_rank = false;
    double h = 0.0;
};

/// Central-difference Jacobian of the reduced endpoint map at lambda0.
ReachabilityReport normal_reachability(const PathFamily& family, const ReducedDynamics& dyn, const Vector& q0,
                                       double h, const IntegratorConfig& cfg,
                                       std::optional<Vector> lambda0 = std::nullopt);

struct ShootOptions {
    double tol = 1e-6;
    int max_iter = 20;
    double fd_step = 1e-5;
    int max_halvings = 10;
    std::optional<double> freq_override;
    std::optional<double> freq_scale;
};

struct ShootReport {
    Vector lambda;
    double endpoint_error = 0.0;  // recomputed by a fresh integration at lambda
    Vector residual;              // (q(T), u(T)) - target
    int iterations = 0;
    double jacobian_condition = 0.0;
    bool converged = false;
    std::string message;
    std::vector<double> history;  // |F| per iterate
};

/// Damped Newton on F(lambda) = (Q(T), U(T)) - target with a central-difference
/// Jacobian of full-system runs.
ShootReport shoot_exact(const PathFamily& family, const ReducedDynamics& dyn, const Vector& q0, const Vector& p0,
                        const Vector& target_q, const Vector& target_u, double T, const IntegratorConfig& cfg,
                        const ShootOptions& options = {});

// ------------------------------------------------------------ export

void write_tracking_csv(const std::vector<TrackingReport>& reports, std::ostream& out);
void write_sweep_csv(const SweepResult& sweep, std::ostream& out);
/// Polylines of the three suprema against log10 T.
void write_sweep_svg(const SweepResult& sweep, std::ostream& out);
std::string summary(const TrackingReport& report);
std::string summary(const SweepResult& sweep);
std::string summary(const ShootReport& report);

}  // namespace lagctl

#endif  // LAGCTL_VERIFY_HPP
