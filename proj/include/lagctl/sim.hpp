#ifndef LAGCTL_SIM_HPP
#define LAGCTL_SIM_HPP

#include "lagctl/controlgen.hpp"
#include "lagctl/model.hpp"
#include "lagctl/ode.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace lagctl {

struct TrajectoryMeta {
    std::string integrator = "dopri5";
    std::string parameter = "t";  // name of the independent variable
    double rtol = 0.0;
    double atol = 0.0;
    StepStats stats;
};

/// Samples (t, q, p, u) with rates. Times are strictly increasing. At a
/// breakpoint the stored rate is the left limit; the right limit is kept
/// separately and used by interpolation on the following cell.
class Trajectory {
public:
    Trajectory(int n, int m, bool has_momentum);

    int n() const noexcept { return n_; }
    int m() const noexcept { return m_; }
    bool has_momentum() const noexcept { return has_p_; }
    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }
    const std::vector<double>& times() const noexcept { return times_; }

    double time(std::size_t i) const { return times_.at(i); }
    Vector q(std::size_t i) const;
    Vector p(std::size_t i) const;
    Vector u(std::size_t i) const;
    Vector qdot(std::size_t i) const;
    Vector pdot(std::size_t i) const;
    Vector udot(std::size_t i) const;

    /// Appends a sample. A repeated time records right-limit rates for the
    /// last sample instead of a new sample. `p`, `pdot` are ignored without momentum.
    void append(double t, const Vector& q, const Vector& p, const Vector& u, const Vector& qdot, const Vector& pdot,
                const Vector& udot);

    /// Piecewise-cubic Hermite interpolation; clamped to the sampled range.
    Vector q_at(double t) const;
    Vector p_at(double t) const;
    Vector u_at(double t) const;

    TrajectoryMeta meta;

private:
    std::size_t cell(double t) const;
    Vector interpolate(double t, int offset, int width, bool control) const;
    int state_width() const { return has_p_ ? 2 * n_ : n_; }

    int n_;
    int m_;
    bool has_p_;
    std::vector<double> times_;
    std::vector<double> state_;  // q then p
    std::vector<double> rate_;
    std::vector<double> control_;
    std::vector<double> control_rate_;
    std::map<std::size_t, std::pair<Vector, Vector>> right_rates_;  // (state rate, control rate)
};

/// q' = A p + K u',  p'_k = -1/2 pᵀB^k p - pᵀC^k u' + u'ᵀD^k u'.
/// The step ceiling (2 pi / omega) / steps_per_period applies when the control
/// declares a frequency omega.
Trajectory integrate_full(const ReducedDynamics& dyn, const ControlSignal& control, const Vector& q0,
                          const Vector& p0, const Vector& u0, double T, const IntegratorConfig& cfg);

/// dq/ds = K(q,u) u'(s) + A(q,u) (wᵀD^k(q,u) w)_k on [s0, s1] (either direction).
Trajectory integrate_reduced(const ReducedDynamics& dyn, const Path& u, const Path& w, const Vector& q0,
                             const IntegratorConfig& cfg, double s0 = 0.0, double s1 = 1.0);

/// Adapts the q samples of a trajectory to the Path interface.
class TrajectoryPath final : public Path {
public:
    explicit TrajectoryPath(std::shared_ptr<const Trajectory> traj) : traj_(std::move(traj)) {}
    int dim() const override { return traj_->n(); }
    Vector value(double s) const override { return traj_->q_at(s); }
    Vector derivative(double s) const override;

private:
    std::shared_ptr<const Trajectory> traj_;
};

struct AveragedMomentum {
    std::vector<double> s;       // uniform grid on [0, 1]
    std::vector<Vector> P;
    std::vector<Vector> p_star;  // (w*ᵀ D^k(q*, u*) w*)_k
    double alpha = 0.0;

    /// sup over grid points with s >= s_min of |P - p*|.
    double sup_deviation(double s_min) const;
};

/// P' = alpha^2 (p* - P), P(0) = 0, along the reference (q*(s), u*(s)).
AveragedMomentum averaged_momentum(const ReducedDynamics& dyn, const Path& q_ref, const PathControl& path,
                                   double alpha, const IntegratorConfig& cfg, std::size_t grid_points = 2001);

/// CSV with header t,q1..qn[,p1..pn],u1..um and 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

/// Fixed-format double with 17 significant digits.
std::string csv_number(double x);

}  // namespace lagctl

#endif  // LAGCTL_SIM_HPP
