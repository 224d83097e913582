#include "lagctl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numbers>
#include <ostream>
#include <sstream>

namespace lagctl {

// ------------------------------------------------------------ tracking

TrackingReport tracking_error(const Trajectory& full, const PathControl& path, const Path& q_ref,
                              const TimeRescaling& rescaling, std::optional<double> omega, int points_per_period) {
    if (!full.has_momentum()) throw ValidationError("tracking needs a full trajectory with momentum");
    if (full.size() < 2) throw ValidationError("tracking needs at least two samples");
    const double T = rescaling.horizon();
    if (full.time(0) != 0.0 || std::abs(full.time(full.size() - 1) - T) > 1e-9 * std::max(1.0, T))
        throw ValidationError("trajectory does not span [0, T] of the rescaling");
    if (q_ref.dim() != full.n() || path.dim() != full.m()) throw ValidationError("reference has wrong dimension");

    TrackingReport rep;
    rep.T = T;
    rep.alpha = rescaling.alpha();

    auto visit = [&](double t, const Vector& q, const Vector& p, const Vector& u) {
        const double s = std::min(1.0, rescaling.psi(std::min(t, T)));
        const double ep = p.norm();
        const double eq = (q - q_ref.value(s)).norm();
        const double eu = (u - path.u_star->value(s)).norm();
        if (ep > rep.sup_p) {
            rep.sup_p = ep;
            rep.t_sup_p = t;
        }
        if (eq > rep.sup_q) {
            rep.sup_q = eq;
            rep.t_sup_q = t;
        }
        if (eu > rep.sup_u) {
            rep.sup_u = eu;
            rep.t_sup_u = t;
        }
        rep.max_scaled_p = std::max(rep.max_scaled_p, ep / rescaling.dpsi(std::min(t, T)));
        ++rep.grid_points;
    };

    const double spacing = omega ? 2.0 * std::numbers::pi / *omega / std::max(points_per_period, 1) : 0.0;
    double widest = 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) {
        visit(full.time(i), full.q(i), full.p(i), full.u(i));
        if (i + 1 == full.size()) break;
        const double t0 = full.time(i);
        const double t1 = full.time(i + 1);
        int extra = 0;
        if (omega) extra = std::max(0, static_cast<int>(std::ceil((t1 - t0) / spacing)) - 1);
        for (int k = 1; k <= extra; ++k) {
            const double t = t0 + (t1 - t0) * k / (extra + 1);
            visit(t, full.q_at(t), full.p_at(t), full.u_at(t));
        }
        widest = std::max(widest, (t1 - t0) / (extra + 1));
    }
    if (omega && widest > 0.0) rep.points_per_period = 2.0 * std::numbers::pi / *omega / widest;
    return rep;
}

// ------------------------------------------------------------ Caratheodory

CaratheodoryReport caratheodory_check(const Trajectory& traj, const ReducedDynamics& dyn, const Dictionary& dict,
                                      double tol) {
    if (traj.n() != dyn.n() || traj.m() != dyn.m()) throw ValidationError("trajectory does not match the dynamics");
    if (traj.empty()) throw ValidationError("empty trajectory");
    if (!(tol >= 0.0)) throw ValidationError("tolerance must be nonnegative");
    CaratheodoryReport rep;
    rep.tolerance = tol;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const Vector q = traj.q(i);
        const Vector u = traj.u(i);
        const ReducedPoint pt = dyn.evaluate(q, u);
        const Vector r = traj.qdot(i) - pt.K * traj.udot(i);
        const ConicFit fit = cone_projection(pt, r, dict);
        rep.residuals.push_back(fit.distance);
        if (fit.weights.size() > 0) rep.max_weight = std::max(rep.max_weight, fit.weights.maxCoeff());
        if (i == 0 || fit.distance > rep.max_residual) {
            rep.max_residual = fit.distance;
            rep.t_max = traj.time(i);
        }
    }
    rep.points = traj.size();
    rep.passed = rep.max_residual <= tol;
    return rep;
}

Trajectory trajectory_from_paths(const Path& q, const Path& u, const std::vector<double>& grid) {
    Trajectory traj(q.dim(), u.dim(), false);
    for (double t : grid) traj.append(t, q.value(t), Vector(), u.value(t), q.derivative(t), Vector(), u.derivative(t));
    return traj;
}

Trajectory with_difference_rates(const Trajectory& traj) {
    const std::size_t N = traj.size();
    if (N < 3) throw ValidationError("differentiation grid too coarse: " + std::to_string(N) + " samples");
    Trajectory out(traj.n(), traj.m(), traj.has_momentum());
    out.meta = traj.meta;
    auto diff = [&](auto get, std::size_t i) -> Vector {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = i + 1 == N ? i : i + 1;
        return (get(b) - get(a)) / (traj.time(b) - traj.time(a));
    };
    for (std::size_t i = 0; i < N; ++i) {
        const Vector qd = diff([&](std::size_t k) { return traj.q(k); }, i);
        const Vector ud = diff([&](std::size_t k) { return traj.u(k); }, i);
        if (traj.has_momentum()) {
            out.append(traj.time(i), traj.q(i), traj.p(i), traj.u(i), qd,
                       diff([&](std::size_t k) { return traj.p(k); }, i), ud);
        } else {
            out.append(traj.time(i), traj.q(i), Vector(), traj.u(i), qd, Vector(), ud);
        }
    }
    return out;
}

std::shared_ptr<const Path> reference_path(const ReducedDynamics& dyn, const PathControl& path, const Vector& q0,
                                           const IntegratorConfig& cfg) {
    auto traj = std::make_shared<const Trajectory>(integrate_reduced(dyn, *path.u_star, *path.w_star, q0, cfg));
    return std::make_shared<TrajectoryPath>(traj);
}

// ------------------------------------------------------------ sweeps

std::optional<double> frequency_for(const TrackingProblem& problem, double T) {
    if (problem.freq_override) return problem.freq_override;
    if (problem.freq_scale) {
        const double a = TimeRescaling(T).alpha();
        return *problem.freq_scale * a * a * a;
    }
    return std::nullopt;
}

TrackingReport run_tracking(const TrackingProblem& problem, double T, Trajectory* trajectory) {
    if (!problem.dyn || !problem.q_ref) throw ValidationError("tracking problem is incomplete");
    const auto control = synthesize_vibrational(problem.path, T, frequency_for(problem, T));
    const Vector u0 = control->value(0.0);
    Trajectory traj = integrate_full(*problem.dyn, *control, problem.q0, problem.p0, u0, T, problem.cfg);
    TrackingReport rep = tracking_error(traj, problem.path, *problem.q_ref, control->rescaling(), control->omega());
    if (trajectory) *trajectory = std::move(traj);
    return rep;
}

namespace {

bool strictly_decreasing(const std::vector<SweepRow>& rows, double TrackingReport::*field) {
    if (rows.size() < 2) return false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].ok) return false;
        if (i > 0 && !(rows[i].report.*field < rows[i - 1].report.*field)) return false;
    }
    return true;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2) return std::nan("");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : std::nan("");
}

}  // namespace

SweepResult convergence_sweep(const TrackingProblem& problem, std::vector<double> T_list) {
    if (T_list.size() < 2) throw ValidationError("a sweep needs at least two horizons");
    std::sort(T_list.begin(), T_list.end());
    for (std::size_t i = 1; i < T_list.size(); ++i)
        if (!(T_list[i] > T_list[i - 1])) throw ValidationError("sweep horizons must be distinct");

    std::vector<std::future<SweepRow>> jobs;
    for (double T : T_list) {
        jobs.push_back(std::async(std::launch::async, [&problem, T] {
            SweepRow row;
            row.T = T;
            row.alpha = std::sqrt(std::log1p(T));
            try {
                Trajectory traj(problem.dyn->n(), problem.dyn->m(), true);
                row.report = run_tracking(problem, T, &traj);
                row.stats = traj.meta.stats;
                row.ok = true;
            } catch (const Error& e) {
                row.error = e.what();
            }
            return row;
        }));
    }
    SweepResult out;
    for (auto& job : jobs) out.rows.push_back(job.get());
    out.decreasing_p = strictly_decreasing(out.rows, &TrackingReport::sup_p);
    out.decreasing_q = strictly_decreasing(out.rows, &TrackingReport::sup_q);
    out.decreasing_u = strictly_decreasing(out.rows, &TrackingReport::sup_u);
    std::vector<double> x, y;
    for (const auto& row : out.rows) {
        if (!row.ok || !(row.report.sup_p > 0.0)) continue;
        x.push_back(-std::log(std::log1p(row.T)));
        y.push_back(std::log(row.report.sup_p));
    }
    out.fitted_exponent_p = slope(x, y);
    return out;
}

// ------------------------------------------------------------ reachability

Vector reduced_endpoint(const ReducedDynamics& dyn, const PathControl& member, const Vector& q0,
                        const IntegratorConfig& cfg) {
    const Trajectory traj = integrate_reduced(dyn, *member.u_star, *member.w_star, q0, cfg);
    Vector out(dyn.n() + dyn.m());
    out << traj.q(traj.size() - 1), member.u_star->value(1.0);
    return out;
}

namespace {

struct Svd {
    Vector sigma;
    int rank = 0;
    double condition = 0.0;
};

Svd analyse(const Matrix& J) {
    Eigen::JacobiSVD<Matrix> svd(J);
    Svd out;
    out.sigma = svd.singularValues();
    const double smax = out.sigma.size() ? out.sigma[0] : 0.0;
    const double threshold = std::numeric_limits<double>::epsilon() * smax * static_cast<double>(J.rows());
    for (Index i = 0; i < out.sigma.size(); ++i)
        if (out.sigma[i] > threshold) ++out.rank;
    const double smin = out.sigma.size() ? out.sigma[out.sigma.size() - 1] : 0.0;
    out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    return out;
}

// Central-difference Jacobian; stencil evaluations run concurrently.
template <typename F>
Matrix central_jacobian(const F& f, const Vector& x, double h) {
    const Index d = x.size();
    std::vector<std::future<Vector>> plus, minus;
    for (Index i = 0; i < d; ++i) {
        plus.push_back(std::async(std::launch::async, [&f, x, h, i] {
            Vector y = x;
            y[i] += h;
            return f(y);
        }));
        minus.push_back(std::async(std::launch::async, [&f, x, h, i] {
            Vector y = x;
            y[i] -= h;
            return f(y);
        }));
    }
    Matrix J;
    for (Index i = 0; i < d; ++i) {
        const Vector a = plus[static_cast<std::size_t>(i)].get();
        const Vector b = minus[static_cast<std::size_t>(i)].get();
        if (i == 0) J.resize(a.size(), d);
        J.col(i) = (a - b) / (2.0 * h);
    }
    return J;
}

}  // namespace

ReachabilityReport normal_reachability(const PathFamily& family, const ReducedDynamics& dyn, const Vector& q0,
                                       double h, const IntegratorConfig& cfg, std::optional<Vector> lambda0) {
    if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
    if (family.n() != dyn.n() || family.m() != dyn.m()) throw ValidationError("family does not match the dynamics");
    const Vector center = lambda0.value_or(Vector::Zero(family.dim()));
    auto endpoint = [&](const Vector& lambda) { return reduced_endpoint(dyn, family.member(lambda), q0, cfg); };
    ReachabilityReport rep;
    rep.h = h;
    rep.J = central_jacobian(endpoint, center, h);
    const Svd s = analyse(rep.J);
    rep.singular_values = s.sigma;
    rep.rank = s.rank;
    rep.condition = s.condition;
    rep.full_rank = s.rank == family.dim();
    return rep;
}

// ------------------------------------------------------------ shooting

ShootReport shoot_exact(const PathFamily& family, const ReducedDynamics& dyn, const Vector& q0, const Vector& p0,
                        const Vector& target_q, const Vector& target_u, double T, const IntegratorConfig& cfg,
                        const ShootOptions& options) {
    if (family.n() != dyn.n() || family.m() != dyn.m()) throw ValidationError("family does not match the dynamics");
    if (target_q.size() != dyn.n() || target_u.size() != dyn.m()) throw ValidationError("target has wrong dimension");
    if (!(options.tol > 0.0) || options.max_iter < 0 || !(options.fd_step > 0.0))
        throw ValidationError("invalid shooting options");
    Vector target(dyn.n() + dyn.m());
    target << target_q, target_u;

    const double alpha = TimeRescaling(T).alpha();
    std::optional<double> omega = options.freq_override;
    if (!omega && options.freq_scale) omega = *options.freq_scale * alpha * alpha * alpha;

    auto residual = [&](const Vector& lambda) -> Vector {
        const auto control = synthesize_family(lambda, family, T, omega);
        const Trajectory traj = integrate_full(dyn, *control, q0, p0, control->value(0.0), T, cfg);
        Vector end(dyn.n() + dyn.m());
        end << traj.q(traj.size() - 1), control->value(T);
        return end - target;
    };

    ShootReport rep;
    rep.lambda = Vector::Zero(family.dim());
    Vector F = residual(rep.lambda);
    rep.history.push_back(F.norm());
    while (F.norm() > options.tol) {
        if (rep.iterations >= options.max_iter) {
            rep.message = "iteration limit reached";
            break;
        }
        const Matrix J = central_jacobian(residual, rep.lambda, options.fd_step);
        const Svd s = analyse(J);
        rep.jacobian_condition = s.condition;
        if (s.rank < family.dim()) {
            rep.message = "Jacobian singular at lambda = " + format_vector(rep.lambda) + " (rank " +
                          std::to_string(s.rank) + ")";
            break;
        }
        const Vector step = -J.colPivHouseholderQr().solve(F);
        ++rep.iterations;

        double mu = 1.0;
        bool improved = false;
        for (int k = 0; k <= options.max_halvings; ++k, mu *= 0.5) {
            const Vector trial = rep.lambda + mu * step;
            Vector Ft;
            try {
                Ft = residual(trial);
            } catch (const ValidationError&) {
                continue;  // outside the parameter set
            } catch (const NumericalError&) {
                continue;
            }
            if (Ft.norm() < F.norm()) {
                rep.lambda = trial;
                F = Ft;
                improved = true;
                break;
            }
        }
        rep.history.push_back(F.norm());
        if (!improved) {
            rep.message = "no decrease along the Newton direction";
            break;
        }
    }

    // Independent re-integration at the final parameter.
    rep.residual = residual(rep.lambda);
    rep.endpoint_error = rep.residual.norm();
    rep.converged = rep.endpoint_error <= options.tol;
    if (rep.converged) rep.message = "converged";
    return rep;
}

// ------------------------------------------------------------ export

void write_tracking_csv(const std::vector<TrackingReport>& reports, std::ostream& out) {
    out << "T,alpha,sup_p,sup_q,sup_u,t_sup_p,t_sup_q,t_sup_u,max_scaled_p,grid_points,points_per_period\n";
    for (const auto& r : reports) {
        out << csv_number(r.T) << ',' << csv_number(r.alpha) << ',' << csv_number(r.sup_p) << ','
            << csv_number(r.sup_q) << ',' << csv_number(r.sup_u) << ',' << csv_number(r.t_sup_p) << ','
            << csv_number(r.t_sup_q) << ',' << csv_number(r.t_sup_u) << ',' << csv_number(r.max_scaled_p) << ','
            << r.grid_points << ',' << csv_number(r.points_per_period) << '\n';
    }
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
    out << "T,alpha,ok,sup_p,sup_q,sup_u,max_scaled_p,eta_bound,accepted_steps,rejected_steps,grid_points,error\n";
    for (const auto& row : sweep.rows) {
        const auto& r = row.report;
        out << csv_number(row.T) << ',' << csv_number(row.alpha) << ',' << (row.ok ? 1 : 0) << ','
            << csv_number(r.sup_p) << ',' << csv_number(r.sup_q) << ',' << csv_number(r.sup_u) << ','
            << csv_number(r.max_scaled_p) << ',' << csv_number(r.max_scaled_p / std::log1p(row.T)) << ','
            << row.stats.accepted << ',' << row.stats.rejected << ',' << r.grid_points << ",\"";
        for (char c : row.error) out << (c == '"' ? '\'' : c);
        out << "\"\n";
    }
}

namespace {

std::string fixed(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

}  // namespace

void write_sweep_svg(const SweepResult& sweep, std::ostream& out) {
    const double W = 640, H = 420, L = 70, R = 20, Tm = 30, B = 50;
    struct Series {
        const char* name;
        const char* color;
        double TrackingReport::*field;
    };
    const Series series[] = {{"sup |p|", "#1f77b4", &TrackingReport::sup_p},
                             {"sup |q - q*(psi)|", "#d62728", &TrackingReport::sup_q},
                             {"sup |u - u*(psi)|", "#2ca02c", &TrackingReport::sup_u}};

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& row : sweep.rows) {
        if (!row.ok) continue;
        xmin = std::min(xmin, std::log10(row.T));
        xmax = std::max(xmax, std::log10(row.T));
        for (const auto& s : series) {
            const double v = row.report.*s.field;
            if (v > 0) {
                ymin = std::min(ymin, std::log10(v));
                ymax = std::max(ymax, std::log10(v));
            }
        }
    }
    if (xmin > xmax) xmin = 0, xmax = 1;
    if (ymin > ymax) ymin = -1, ymax = 0;
    if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
    if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
    auto X = [&](double x) { return L + (W - L - R) * (x - xmin) / (xmax - xmin); };
    auto Y = [&](double y) { return H - B - (H - Tm - B) * (y - ymin) / (ymax - ymin); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
        << ' ' << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">log10 T</text>\n";
    out << "<text x=\"16\" y=\"" << (Tm + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (Tm + H - B) / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">log10 error</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 4;
        const double yv = ymin + (ymax - ymin) * k / 4;
        out << "<text x=\"" << fixed(X(xv)) << "\" y=\"" << H - B + 16
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fixed(xv) << "</text>\n";
        out << "<text x=\"" << L - 6 << "\" y=\"" << fixed(Y(yv) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fixed(yv) << "</text>\n";
    }
    int legend = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (const auto& row : sweep.rows) {
            const double v = row.report.*s.field;
            if (!row.ok || !(v > 0)) continue;
            out << (first ? "" : " ") << fixed(X(std::log10(row.T))) << ',' << fixed(Y(std::log10(v)));
            first = false;
        }
        out << "\"/>\n";
        out << "<text x=\"" << W - R - 150 << "\" y=\"" << Tm + 14 + 16 * legend << "\" fill=\"" << s.color
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name << "</text>\n";
        ++legend;
    }
    out << "</svg>\n";
}

std::string summary(const TrackingReport& r) {
    std::ostringstream out;
    out << "T=" << format_double(r.T) << " alpha=" << format_double(r.alpha) << " sup|p|=" << format_double(r.sup_p)
        << " sup|q-q*|=" << format_double(r.sup_q) << " sup|u-u*|=" << format_double(r.sup_u)
        << " max|scaled p|=" << format_double(r.max_scaled_p) << " grid=" << r.grid_points;
    return out.str();
}

std::string summary(const SweepResult& s) {
    std::ostringstream out;
    for (const auto& row : s.rows) {
        if (row.ok)
            out << summary(row.report) << '\n';
        else
            out << "T=" << format_double(row.T) << " failed: " << row.error << '\n';
    }
    out << "decreasing: p=" << s.decreasing_p << " q=" << s.decreasing_q << " u=" << s.decreasing_u
        << "; fitted exponent of sup|p| vs 1/ln(1+T): " << format_double(s.fitted_exponent_p);
    return out.str();
}

std::string summary(const ShootReport& r) {
    std::ostringstream out;
    out << (r.converged ? "converged" : "not converged") << " after " << r.iterations
        << " iterations; lambda=" << format_vector(r.lambda) << " endpoint error=" << format_double(r.endpoint_error)
        << " jacobian condition=" << format_double(r.jacobian_condition) << " (" << r.message << ")";
    return out.str();
}

}  // namespace lagctl
