#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lagctl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace lagctl;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

std::shared_ptr<DirectDynamics> direct1(const char* A, const char* K, const char* E) {
    auto vars = SymbolTable::mechanical(1, 1, {});
    auto P = [&](const char* t) { return std::vector<std::vector<Expr>>{{parse_expression(t, vars)}}; };
    return std::make_shared<DirectDynamics>(1, 1, vars, std::map<std::string, double>{}, P(A), P(K), P(E));
}

DynamicsPtr bead() {
    auto vars = SymbolTable::mechanical(1, 1, {});
    std::map<std::pair<int, int>, Expr> G;
    G[{1, 1}] = parse_expression("1", vars);
    G[{1, 2}] = parse_expression("0", vars);
    G[{2, 2}] = parse_expression("q1^2", vars);
    return reduce(MechanicalSpec::from_upper(1, 1, vars, {}, G));
}

PathPtr fn(std::function<double(double)> f, std::function<double(double)> df) {
    return std::make_shared<FunctionPath>(
        1, [f](double s) { return Vector::Constant(1, f(s)); }, [df](double s) { return Vector::Constant(1, df(s)); });
}

PathPtr constant(double c) {
    return fn([c](double) { return c; }, [](double) { return 0.0; });
}

// u* = pi s / 2, w* = cutoff, so that r*(1) = exp(int w*^2).
PathControl bead_path() {
    PathControl path;
    path.u_star = fn([](double s) { return std::numbers::pi * s / 2; }, [](double) { return std::numbers::pi / 2; });
    path.w_star = vanishing_start(constant(1.0), 0.05);
    return path;
}

// Composite Simpson of the squared cutoff on [0, 1].
double cutoff_energy() {
    const auto w = vanishing_start(constant(1.0), 0.05);
    const int N = 20000;
    double sum = 0.0;
    for (int i = 0; i <= N; ++i) {
        const double x = w->value(static_cast<double>(i) / N)[0];
        sum += x * x * ((i == 0 || i == N) ? 1 : (i % 2 ? 4 : 2));
    }
    return sum / (3.0 * N);
}

IntegratorConfig tight() {
    IntegratorConfig cfg;
    cfg.rtol = 1e-11;
    cfg.atol = 1e-13;
    return cfg;
}

// Ignores the q-component of lambda.
class ShiftFamily final : public PathFamily {
public:
    explicit ShiftFamily(PathControl base) : base_(std::move(base)) {}
    int n() const override { return 1; }
    int m() const override { return 1; }
    PathControl member(const Vector& lambda) const override {
        PathControl out = base_;
        const auto u = base_.u_star;
        const double l = lambda[1];
        out.u_star = fn([u, l](double s) { return u->value(s)[0] + l * s; },
                        [u, l](double s) { return u->derivative(s)[0] + l; });
        return out;
    }

private:
    PathControl base_;
};

}  // namespace

TEST_CASE("tracking without drift is exact up to integration error") {
    // D = 0 and w* = 0: p stays 0 and q = q0 + u - u0 along both systems.
    const auto dyn = direct1("1", "1", "2");
    PathControl path;
    path.u_star = fn([](double s) { return std::sin(2 * s); }, [](double s) { return 2 * std::cos(2 * s); });
    path.w_star = constant(0.0);
    const auto q_ref = fn([](double s) { return 0.5 + std::sin(2 * s); }, [](double s) { return 2 * std::cos(2 * s); });
    for (double T : {10.0, 100.0}) {
        const auto control = synthesize_vibrational(path, T);
        const auto traj = integrate_full(*dyn, *control, vec({0.5}), vec({0.0}), control->value(0.0), T, tight());
        const auto rep = tracking_error(traj, path, *q_ref, control->rescaling(), control->omega());
        CHECK(rep.sup_p == 0.0);
        CHECK(rep.sup_q <= 1e-8);
        CHECK(rep.sup_u <= 1e-12);
        CHECK(rep.points_per_period >= 10.0);
        CHECK(rep.T == T);
        CHECK(rep.alpha == doctest::Approx(std::sqrt(std::log1p(T))));
    }
}

TEST_CASE("tracking refines coarse grids to the requested density") {
    const auto dyn = direct1("1", "1", "2");
    PathControl path;
    path.u_star = fn([](double s) { return s; }, [](double) { return 1.0; });
    path.w_star = constant(0.0);
    const double T = 50.0;
    const auto control = synthesize_vibrational(path, T);
    Trajectory coarse(1, 1, true);
    for (int i = 0; i <= 4; ++i) {
        const double t = T * i / 4;
        const Vector u = control->value(t);
        coarse.append(t, u, vec({0.0}), u, control->rate(t), vec({0.0}), control->rate(t));
    }
    const auto rep = tracking_error(coarse, path, *path.u_star, control->rescaling(), control->omega(), 12);
    const double periods = T * control->omega() / (2 * std::numbers::pi);
    CHECK(static_cast<double>(rep.grid_points) >= 12 * periods);
    CHECK(rep.points_per_period >= 12.0);
    CHECK_THROWS_AS(tracking_error(coarse, path, *path.u_star, TimeRescaling(60.0)), ValidationError);
}

TEST_CASE("Caratheodory residual of a shrinking bead is the inward speed") {
    // The bead cone is the ray q1 >= 0 of radial velocities (A = 1, D = r).
    const auto dyn = bead();
    Dictionary dict;
    dict.vectors = {vec({0.0}), vec({1.0})};
    dict.epsilon = 0.01;
    const auto q = fn([](double t) { return 2.0 - t * t; }, [](double t) { return -2 * t; });
    const auto u = fn([](double t) { return t; }, [](double) { return 1.0; });
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
    const auto traj = trajectory_from_paths(*q, *u, grid);
    const auto rep = caratheodory_check(traj, *dyn, dict, 0.05);
    CHECK(rep.max_residual == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.t_max == 1.0);
    CHECK_FALSE(rep.passed);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rep.residuals[i] == doctest::Approx(2 * grid[i]).epsilon(1e-12));

    const auto grow = fn([](double t) { return 1.0 + t * t; }, [](double t) { return 2 * t; });
    const auto ok = caratheodory_check(trajectory_from_paths(*grow, *u, grid), *dyn, dict, 1e-12);
    CHECK(ok.passed);
    CHECK(ok.max_residual <= 1e-12);
    // Weight: r' = 2t = lambda * r * 1^2.
    CHECK(ok.max_weight == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("difference rates approximate analytic rates") {
    const auto q = fn([](double t) { return std::sin(t); }, [](double t) { return std::cos(t); });
    std::vector<double> grid;
    for (int i = 0; i <= 1000; ++i) grid.push_back(i / 1000.0);
    const auto traj = with_difference_rates(trajectory_from_paths(*q, *q, grid));
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) CHECK(std::abs(traj.qdot(i)[0] - std::cos(grid[i])) < 1e-6);
    CHECK_THROWS_AS(with_difference_rates(trajectory_from_paths(*q, *q, {0.0, 1.0})), ValidationError);
}

TEST_CASE("bead amplitude family has the closed-form Jacobian") {
    // r(1) = r0 exp((1 + l_q) c), u(1) = pi/2 + l_u.
    const auto dyn = bead();
    const AmplitudeFamily family(bead_path(), 1);
    const double c = cutoff_energy();
    const auto cfg = tight();
    for (double h : {1e-3, 1e-4}) {
        const auto rep = normal_reachability(family, *dyn, vec({1.0}), h, cfg);
        CHECK(rep.J(0, 0) == doctest::Approx(c * std::exp(c)).epsilon(1e-6));
        CHECK(std::abs(rep.J(0, 1)) < 1e-8);
        CHECK(std::abs(rep.J(1, 0)) < 1e-12);
        CHECK(rep.J(1, 1) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(rep.rank == 2);
        CHECK(rep.full_rank);
    }
    const auto end = reduced_endpoint(*dyn, family.member(vec({0.0, 0.0})), vec({1.0}), cfg);
    CHECK(end[0] == doctest::Approx(std::exp(c)).epsilon(1e-8));
    CHECK(end[1] == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
}

TEST_CASE("family that ignores a parameter has rank one") {
    const auto dyn = bead();
    const ShiftFamily family(bead_path());
    const auto rep = normal_reachability(family, *dyn, vec({1.0}), 1e-4, tight());
    CHECK(rep.rank == 1);
    CHECK_FALSE(rep.full_rank);
    CHECK(rep.J.col(0).norm() == 0.0);
    CHECK(std::isinf(rep.condition));
    CHECK_THROWS_AS(normal_reachability(family, *dyn, vec({1.0}), 0.0, tight()), ValidationError);
}

TEST_CASE("shooting at the nominal endpoint takes no iterations") {
    const auto dyn = bead();
    const AmplitudeFamily family(bead_path(), 1);
    const double T = 10.0;
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    const auto control = synthesize_family(vec({0.0, 0.0}), family, T);
    const auto traj = integrate_full(*dyn, *control, vec({1.0}), vec({0.0}), control->value(0.0), T, cfg);
    const Vector qT = traj.q(traj.size() - 1);
    const auto rep = shoot_exact(family, *dyn, vec({1.0}), vec({0.0}), qT, control->value(T), T, cfg);
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
    CHECK(rep.endpoint_error <= 1e-12);
    CHECK(rep.lambda.norm() == 0.0);
}

TEST_CASE("shooting recovers the parameter of a reachable endpoint") {
    const auto dyn = bead();
    const AmplitudeFamily family(bead_path(), 1);
    const double T = 10.0;
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    const Vector chosen = vec({-0.3, 0.2});
    const auto control = synthesize_family(chosen, family, T);
    const auto traj = integrate_full(*dyn, *control, vec({1.0}), vec({0.0}), control->value(0.0), T, cfg);
    const Vector target_q = traj.q(traj.size() - 1);
    const Vector target_u = control->value(T);

    const auto rep = shoot_exact(family, *dyn, vec({1.0}), vec({0.0}), target_q, target_u, T, cfg);
    INFO(summary(rep));
    CHECK(rep.converged);
    CHECK(rep.endpoint_error <= 1e-6);
    CHECK((rep.lambda - chosen).norm() <= 1e-5);
    CHECK(rep.iterations >= 1);
    CHECK(rep.history.front() > rep.history.back());
}

TEST_CASE("shooting reports an unreachable target") {
    // r grows for every admissible lambda, so r(T) = 0.5 cannot be reached.
    const auto dyn = bead();
    const AmplitudeFamily family(bead_path(), 1);
    IntegratorConfig cfg;
    cfg.rtol = 1e-9;
    cfg.atol = 1e-11;
    ShootOptions opt;
    opt.max_iter = 8;
    const auto rep = shoot_exact(family, *dyn, vec({1.0}), vec({0.0}), vec({0.5}), vec({std::numbers::pi / 2}), 10.0,
                                 cfg, opt);
    CHECK_FALSE(rep.converged);
    CHECK(rep.endpoint_error > 0.4);
    CHECK_FALSE(rep.message.empty());
}

TEST_CASE("sweep on the bead decreases and exports") {
    const auto dyn = bead();
    TrackingProblem problem;
    problem.dyn = dyn;
    problem.path = bead_path();
    problem.cfg.rtol = 1e-9;
    problem.cfg.atol = 1e-11;
    problem.q_ref = reference_path(*dyn, problem.path, vec({1.0}), tight());
    problem.q0 = vec({1.0});
    problem.p0 = vec({0.0});
    const auto sweep = convergence_sweep(problem, {200.0, 20.0});
    REQUIRE(sweep.rows.size() == 2);
    CHECK(sweep.rows[0].T == 20.0);
    CHECK(sweep.rows[0].ok);
    CHECK(sweep.rows[1].ok);
    CHECK(sweep.decreasing_p);
    CHECK(sweep.fitted_exponent_p > 0.0);
    // |p| = |p / eta| eta <= max |p / eta| / ln(1+T).
    for (const auto& row : sweep.rows)
        CHECK(row.report.sup_p <= row.report.max_scaled_p / std::log1p(row.T) * (1 + 1e-12));

    std::ostringstream csv, svg;
    write_sweep_csv(sweep, csv);
    write_sweep_svg(sweep, svg);
    const std::string text = csv.str();
    CHECK(text.rfind("T,alpha,ok,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(svg.str().find("<polyline") != std::string::npos);
    CHECK(svg.str().find("</svg>") != std::string::npos);
    CHECK_THROWS_AS(convergence_sweep(problem, {20.0}), ValidationError);
}
