#include "lagctl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace lagctl {

// ------------------------------------------------------------ Trajectory

Trajectory::Trajectory(int n, int m, bool has_momentum) : n_(n), m_(m), has_p_(has_momentum) {
    if (n < 1 || m < 1) throw ValidationError("trajectory dimensions must be positive");
}

namespace {

Vector slice(const std::vector<double>& data, std::size_t row, int width, int offset, int count) {
    return Eigen::Map<const Vector>(data.data() + row * static_cast<std::size_t>(width) + offset, count);
}

void push(std::vector<double>& data, const Vector& v) { data.insert(data.end(), v.data(), v.data() + v.size()); }

}  // namespace

Vector Trajectory::q(std::size_t i) const { return slice(state_, i, state_width(), 0, n_); }
Vector Trajectory::p(std::size_t i) const {
    if (!has_p_) throw ValidationError("trajectory carries no momentum");
    return slice(state_, i, state_width(), n_, n_);
}
Vector Trajectory::u(std::size_t i) const { return slice(control_, i, m_, 0, m_); }
Vector Trajectory::qdot(std::size_t i) const { return slice(rate_, i, state_width(), 0, n_); }
Vector Trajectory::pdot(std::size_t i) const {
    if (!has_p_) throw ValidationError("trajectory carries no momentum");
    return slice(rate_, i, state_width(), n_, n_);
}
Vector Trajectory::udot(std::size_t i) const { return slice(control_rate_, i, m_, 0, m_); }

void Trajectory::append(double t, const Vector& q, const Vector& p, const Vector& u, const Vector& qdot,
                        const Vector& pdot, const Vector& udot) {
    if (q.size() != n_ || u.size() != m_ || qdot.size() != n_ || udot.size() != m_ ||
        (has_p_ && (p.size() != n_ || pdot.size() != n_)))
        throw ValidationError("trajectory sample has wrong dimension");
    Vector state(state_width()), rate(state_width());
    state.head(n_) = q;
    rate.head(n_) = qdot;
    if (has_p_) {
        state.tail(n_) = p;
        rate.tail(n_) = pdot;
    }
    if (!state.allFinite() || !rate.allFinite() || !u.allFinite() || !udot.allFinite() || !std::isfinite(t))
        throw IntegrationError("non-finite trajectory sample", t, state);
    if (!times_.empty()) {
        if (t == times_.back()) {
            right_rates_[times_.size() - 1] = {rate, udot};
            return;
        }
        if (t < times_.back()) throw ValidationError("trajectory times must increase");
    }
    times_.push_back(t);
    push(state_, state);
    push(rate_, rate);
    push(control_, u);
    push(control_rate_, udot);
}

std::size_t Trajectory::cell(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - times_.begin(), 1)) - 1;
    return std::min(i, times_.size() - 2);
}

Vector Trajectory::interpolate(double t, int offset, int width, bool control) const {
    if (times_.empty()) throw ValidationError("empty trajectory");
    const auto& data = control ? control_ : state_;
    const auto& rates = control ? control_rate_ : rate_;
    const int stride = control ? m_ : state_width();
    if (times_.size() == 1 || t <= times_.front()) return slice(data, 0, stride, offset, width);
    if (t >= times_.back()) return slice(data, times_.size() - 1, stride, offset, width);
    const std::size_t i = cell(t);
    Vector f0 = slice(rates, i, stride, offset, width);
    if (auto it = right_rates_.find(i); it != right_rates_.end())
        f0 = (control ? it->second.second : it->second.first).segment(offset, width);
    return hermite(t, times_[i], slice(data, i, stride, offset, width), f0, times_[i + 1],
                   slice(data, i + 1, stride, offset, width), slice(rates, i + 1, stride, offset, width));
}

Vector Trajectory::q_at(double t) const { return interpolate(t, 0, n_, false); }
Vector Trajectory::p_at(double t) const {
    if (!has_p_) throw ValidationError("trajectory carries no momentum");
    return interpolate(t, n_, n_, false);
}
Vector Trajectory::u_at(double t) const { return interpolate(t, 0, m_, true); }

Vector TrajectoryPath::derivative(double s) const {
    const auto& ts = traj_->times();
    if (ts.size() < 2 || s <= ts.front()) return traj_->qdot(0);
    if (s >= ts.back()) return traj_->qdot(ts.size() - 1);
    const auto it = std::upper_bound(ts.begin(), ts.end(), s);
    const auto i = static_cast<std::size_t>(it - ts.begin()) - 1;
    const double x = (s - ts[i]) / (ts[i + 1] - ts[i]);
    return (1 - x) * traj_->qdot(i) + x * traj_->qdot(i + 1);
}

// ------------------------------------------------------------ integration

namespace {

IntegratorConfig with_ceiling(const IntegratorConfig& cfg, std::optional<double> omega, StepStats& stats) {
    IntegratorConfig out = cfg;
    if (omega) {
        const double ceiling = (2.0 * std::numbers::pi / *omega) / cfg.steps_per_period;
        out.max_step = std::min(out.max_step, ceiling);
        stats.step_ceiling = ceiling;
    }
    return out;
}

}  // namespace

Trajectory integrate_full(const ReducedDynamics& dyn, const ControlSignal& control, const Vector& q0,
                          const Vector& p0, const Vector& u0, double T, const IntegratorConfig& cfg) {
    const int n = dyn.n();
    const int m = dyn.m();
    if (q0.size() != n || p0.size() != n || u0.size() != m || control.dim() != m)
        throw ValidationError("initial data or control has wrong dimension");
    if (!(T > 0.0)) throw ValidationError("horizon T must be positive");
    const Vector uc = control.value(0.0);
    if ((uc - u0).cwiseAbs().maxCoeff() > 1e-9)
        throw ValidationError("u0 = " + format_vector(u0) + " does not match the control at t=0 " + format_vector(uc));

    Trajectory traj(n, m, true);
    traj.meta.rtol = cfg.rtol;
    traj.meta.atol = cfg.atol;
    const IntegratorConfig run = with_ceiling(cfg, control.frequency(), traj.meta.stats);

    auto rhs = [&](double t, const Vector& y, Vector& dy, Side side) {
        const Vector q = y.head(n);
        const Vector p = y.tail(n);
        const Vector u = control.value(t, side);
        const Vector ud = control.rate(t, side);
        ReducedPoint pt;
        try {
            pt = dyn.evaluate(q, u);
        } catch (const IntegrationError&) {
            throw;
        } catch (const NumericalError& e) {
            throw IntegrationError(std::string("dynamics evaluation failed: ") + e.what(), t, y);
        }
        dy.resize(2 * n);
        dy.head(n) = pt.A * p + pt.K * ud;
        for (int k = 0; k < n; ++k) {
            dy[n + k] = -0.5 * p.dot(pt.B[k] * p) - p.dot(pt.C[k] * ud) + ud.dot(pt.D[k] * ud);
        }
    };
    auto observe = [&](double t, const Vector& y, const Vector& dy) {
        const Side side = traj.empty() || t == traj.times().back() ? Side::Right : Side::Left;
        traj.append(t, y.head(n), y.tail(n), control.value(t, side), dy.head(n), dy.tail(n), control.rate(t, side));
    };

    Vector y0(2 * n);
    y0 << q0, p0;
    integrate_dopri(rhs, 0.0, y0, T, run, control.breakpoints(), observe, traj.meta.stats);
    return traj;
}

Trajectory integrate_reduced(const ReducedDynamics& dyn, const Path& u, const Path& w, const Vector& q0,
                             const IntegratorConfig& cfg, double s0, double s1) {
    const int n = dyn.n();
    const int m = dyn.m();
    if (q0.size() != n || u.dim() != m || w.dim() != m) throw ValidationError("reduced data has wrong dimension");
    if (s0 == s1) throw ValidationError("empty integration interval");

    struct Raw {
        double s;
        Vector q, qdot, u, udot;
    };
    std::vector<Raw> raw;
    Trajectory traj(n, m, false);
    traj.meta.parameter = "s";
    traj.meta.rtol = cfg.rtol;
    traj.meta.atol = cfg.atol;
    const bool forward = s1 > s0;

    auto rhs = [&](double s, const Vector& q, Vector& dq, Side side) {
        const Vector uu = u.value(s, side);
        const Vector du = u.derivative(s, side);
        const Vector ww = w.value(s, side);
        ReducedPoint pt;
        try {
            pt = dyn.evaluate(q, uu);
        } catch (const IntegrationError&) {
            throw;
        } catch (const NumericalError& e) {
            throw IntegrationError(std::string("dynamics evaluation failed: ") + e.what(), s, q);
        }
        Vector quad(n);
        for (int k = 0; k < n; ++k) quad[k] = ww.dot(pt.D[k] * ww);
        dq = pt.K * du + pt.A * quad;
    };
    auto observe = [&](double s, const Vector& q, const Vector& dq) {
        // Forward: the first call at a time is the left limit; backward it is the right one.
        const bool repeat = !raw.empty() && raw.back().s == s;
        const Side side = raw.empty() ? (forward ? Side::Right : Side::Left)
                                       : ((repeat == forward) ? Side::Right : Side::Left);
        raw.push_back({s, q, dq, u.value(s, side), u.derivative(s, side)});
    };

    integrate_dopri(rhs, s0, q0, s1, cfg, merged_breakpoints({&u, &w}, s0, s1), observe, traj.meta.stats);
    if (!forward) std::reverse(raw.begin(), raw.end());
    for (const auto& r : raw) traj.append(r.s, r.q, Vector(), r.u, r.qdot, Vector(), r.udot);
    return traj;
}

// ------------------------------------------------------------ averaged momentum

double AveragedMomentum::sup_deviation(double s_min) const {
    double sup = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] >= s_min) sup = std::max(sup, (P[i] - p_star[i]).norm());
    return sup;
}

AveragedMomentum averaged_momentum(const ReducedDynamics& dyn, const Path& q_ref, const PathControl& path,
                                   double alpha, const IntegratorConfig& cfg, std::size_t grid_points) {
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    if (grid_points < 2) throw ValidationError("averaged momentum grid needs at least two points");
    path.validate();
    const int n = dyn.n();
    const double a2 = alpha * alpha;

    auto target = [&](double s, Side side) {
        const Vector w = path.w_star->value(s, side);
        const ReducedPoint pt = dyn.evaluate(q_ref.value(s), path.u_star->value(s, side));
        Vector out(n);
        for (int k = 0; k < n; ++k) out[k] = w.dot(pt.D[k] * w);
        return out;
    };

    // Trajectory keeps the right-limit rate at breakpoints for interpolation.
    Trajectory record(n, 1, false);
    const Vector none = Vector::Zero(1);
    auto rhs = [&](double s, const Vector& P, Vector& dP, Side side) { dP = a2 * (target(s, side) - P); };
    auto observe = [&](double s, const Vector& P, const Vector& dP) {
        record.append(s, P, Vector(), none, dP, Vector(), none);
    };
    integrate_dopri(rhs, 0.0, Vector::Zero(n), 1.0, cfg,
                    merged_breakpoints({path.u_star.get(), path.w_star.get(), &q_ref}, 0.0, 1.0), observe,
                    record.meta.stats);

    AveragedMomentum out;
    out.alpha = alpha;
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(grid_points - 1);
        out.s.push_back(s);
        out.P.push_back(record.q_at(s));
        out.p_star.push_back(target(s, Side::Left));
    }
    return out;
}

// ------------------------------------------------------------ CSV

std::string csv_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << "t";
    for (int i = 1; i <= traj.n(); ++i) out << ",q" << i;
    if (traj.has_momentum())
        for (int i = 1; i <= traj.n(); ++i) out << ",p" << i;
    for (int i = 1; i <= traj.m(); ++i) out << ",u" << i;
    out << '\n';
    for (std::size_t r = 0; r < traj.size(); ++r) {
        out << csv_number(traj.time(r));
        const Vector q = traj.q(r);
        for (Index i = 0; i < q.size(); ++i) out << ',' << csv_number(q[i]);
        if (traj.has_momentum()) {
            const Vector p = traj.p(r);
            for (Index i = 0; i < p.size(); ++i) out << ',' << csv_number(p[i]);
        }
        const Vector u = traj.u(r);
        for (Index i = 0; i < u.size(); ++i) out << ',' << csv_number(u[i]);
        out << '\n';
    }
}

}  // namespace lagctl
