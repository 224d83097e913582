#include "lagctl/config.hpp"

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#ifndef LAGCTL_VERSION
#define LAGCTL_VERSION "0.0.0"
#endif

namespace lagctl {

namespace {

namespace fs = std::filesystem;

std::ofstream open_artifact(const fs::path& dir, const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + (dir / name).string());
    return out;
}

std::string header_list(const char* prefix, int count) {
    std::string s;
    for (int i = 1; i <= count; ++i) s += std::string(",") + prefix + std::to_string(i);
    return s;
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, const ConfigFile& file) {
    auto out = open_artifact(dir, "manifest.txt");
    out << "tool = lagctl " << LAGCTL_VERSION << '\n';
    out << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
#ifdef __VERSION__
    out << "compiler = " << __VERSION__ << '\n';
#endif
    out << "config_sha256 = " << sha256_hex(file.text) << '\n';
    for (const auto& [k, v] : cfg.effective()) out << k << " = " << v << '\n';
}

// ------------------------------------------------------------ tasks

void task_reduce(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    auto out = open_artifact(dir, "report.csv");
    out << "block,k,i,j,expression\n";
    const SystemConfig& sys = cfg.system;
    auto row = [&](const char* block, int k, int i, int j, const std::string& e) {
        out << block << ',' << k << ',' << i << ',' << j << ",\"" << e << "\"\n";
    };
    if (sys.mechanical) {
        const MechanicalSpec spec = build_mechanical(sys);
        const SymbolicReduction red = reduce_symbolic(spec);
        const auto& vars = spec.symbols();
        for (std::size_t i = 0; i < red.A.size(); ++i)
            for (std::size_t j = 0; j < red.A[i].size(); ++j)
                row("A", 0, int(i) + 1, int(j) + 1, to_string(red.A[i][j], vars));
        for (std::size_t i = 0; i < red.K.size(); ++i)
            for (std::size_t j = 0; j < red.K[i].size(); ++j)
                row("K", 0, int(i) + 1, int(j) + 1, to_string(red.K[i][j], vars));
        for (std::size_t i = 0; i < red.E.size(); ++i)
            for (std::size_t j = 0; j < red.E[i].size(); ++j)
                row("E", 0, int(i) + 1, int(j) + 1, to_string(red.E[i][j], vars));
        for (std::size_t k = 0; k < red.D.size(); ++k)
            for (std::size_t i = 0; i < red.D[k].size(); ++i)
                for (std::size_t j = 0; j < red.D[k][i].size(); ++j)
                    row("D", int(k) + 1, int(i) + 1, int(j) + 1, to_string(red.D[k][i][j], vars));
        if (cfg.q0.size() && cfg.u0) {
            const IdentityReport rep = crosscheck_identities(spec, cfg.q0, *cfg.u0, 1e-9);
            log << "identities at (q, u) = (" << format_vector(cfg.q0) << ", " << format_vector(*cfg.u0)
                << "): max residual " << format_double(rep.max_residual()) << (rep.passed ? " (pass)" : " (FAIL)")
                << '\n';
            if (!rep.precondition_ok) throw NumericalError(rep.precondition_message);
        }
    } else {
        // A, K, E as given; D = 1/2 dE/dq symbolically.
        const SymbolTable vars = system_symbols(sys);
        auto entry = [&](const std::string& block, int i, int j, bool sym) {
            const int a = sym ? std::min(i, j) : i, b = sym ? std::max(i, j) : j;
            auto it = sys.entries.find(block + "." + std::to_string(a) + "." + std::to_string(b));
            return it == sys.entries.end() ? Expr::constant(0.0) : simplify(parse_expression(it->second, vars));
        };
        for (int i = 1; i <= sys.n; ++i)
            for (int j = 1; j <= sys.n; ++j) row("A", 0, i, j, to_string(entry("A", i, j, true), vars));
        for (int i = 1; i <= sys.n; ++i)
            for (int j = 1; j <= sys.m; ++j) row("K", 0, i, j, to_string(entry("K", i, j, false), vars));
        for (int i = 1; i <= sys.m; ++i)
            for (int j = 1; j <= sys.m; ++j) row("E", 0, i, j, to_string(entry("E", i, j, true), vars));
        for (int k = 1; k <= sys.n; ++k)
            for (int i = 1; i <= sys.m; ++i)
                for (int j = 1; j <= sys.m; ++j) {
                    const Expr d = differentiate(entry("E", i, j, true), static_cast<std::size_t>(k - 1));
                    row("D", k, i, j, to_string(simplify(Expr::binary(Op::Mul, Expr::constant(0.5), d)), vars));
                }
    }
    log << "reduction written to report.csv\n";
}

void task_synthesize(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    const PathControl path = build_path(cfg);
    std::optional<double> omega = cfg.freq_override;
    if (cfg.freq_scale) omega = *cfg.freq_scale * std::pow(TimeRescaling(cfg.T).alpha(), 3);
    const auto control = synthesize_vibrational(path, cfg.T, omega);
    const Matrix table = tabulate_control(*control, cfg.T, cfg.samples);
    auto out = open_artifact(dir, "report.csv");
    const int m = control->dim();
    out << "t" << header_list("u", m) << header_list("udot", m) << '\n';
    for (Index r = 0; r < table.rows(); ++r) {
        for (Index c = 0; c < table.cols(); ++c) out << (c ? "," : "") << csv_number(table(r, c));
        out << '\n';
    }
    log << "T=" << format_double(cfg.T) << " alpha=" << format_double(control->rescaling().alpha())
        << " omega=" << format_double(control->omega()) << " amplitude=" << format_double(control->amplitude())
        << "; " << table.rows() << " control samples written\n";
}

void task_simulate(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    const DynamicsPtr dyn = build_dynamics(cfg.system);
    if (!cfg.control_expr.empty()) {
        const PathSignal control(build_control_path(cfg));
        const Vector u0 = cfg.u0.value_or(control.value(0.0));
        const Trajectory traj = integrate_full(*dyn, control, cfg.q0, cfg.p0, u0, cfg.T, cfg.integrator);
        auto out = open_artifact(dir, "trajectory.csv");
        write_trajectory_csv(traj, out);
        log << "q(T) = " << format_vector(traj.q(traj.size() - 1)) << " after " << traj.meta.stats.accepted
            << " steps\n";
        return;
    }
    TrackingProblem problem;
    problem.dyn = dyn;
    problem.path = build_path(cfg);
    problem.q0 = cfg.q0;
    problem.p0 = cfg.p0;
    problem.cfg = cfg.integrator;
    problem.freq_override = cfg.freq_override;
    problem.freq_scale = cfg.freq_scale;
    problem.q_ref = reference_path(*dyn, problem.path, cfg.q0, cfg.reference_integrator);
    Trajectory traj(dyn->n(), dyn->m(), true);
    const TrackingReport rep = run_tracking(problem, cfg.T, &traj);
    auto out = open_artifact(dir, "trajectory.csv");
    write_trajectory_csv(traj, out);
    auto report = open_artifact(dir, "report.csv");
    write_tracking_csv({rep}, report);
    log << summary(rep) << '\n';
}

void task_sweep(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    TrackingProblem problem;
    problem.dyn = build_dynamics(cfg.system);
    problem.path = build_path(cfg);
    problem.q0 = cfg.q0;
    problem.p0 = cfg.p0;
    problem.cfg = cfg.integrator;
    problem.freq_override = cfg.freq_override;
    problem.freq_scale = cfg.freq_scale;
    problem.q_ref = reference_path(*problem.dyn, problem.path, cfg.q0, cfg.reference_integrator);
    const SweepResult sweep = convergence_sweep(problem, cfg.T_list);
    {
        auto out = open_artifact(dir, "sweep.csv");
        write_sweep_csv(sweep, out);
    }
    {
        auto out = open_artifact(dir, "plot.svg");
        write_sweep_svg(sweep, out);
    }
    std::vector<TrackingReport> reports;
    for (const auto& row : sweep.rows)
        if (row.ok) reports.push_back(row.report);
    auto out = open_artifact(dir, "report.csv");
    write_tracking_csv(reports, out);
    log << summary(sweep) << '\n';
}

void task_check(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    const DynamicsPtr dyn = build_dynamics(cfg.system);
    const Dictionary dict = build_config_dictionary(cfg, *dyn);
    const auto q = build_check_path(cfg, true);
    const auto u = build_check_path(cfg, false);
    std::vector<double> grid;
    const std::size_t N = cfg.check.points;
    for (std::size_t i = 0; i < N; ++i)
        grid.push_back(cfg.check.t0 + (cfg.check.t1 - cfg.check.t0) * static_cast<double>(i) / double(N - 1));
    Trajectory traj = trajectory_from_paths(*q, *u, grid);
    if (cfg.check.difference_rates) traj = with_difference_rates(traj);
    const CaratheodoryReport rep = caratheodory_check(traj, *dyn, dict, cfg.check.tol);

    auto out = open_artifact(dir, "report.csv");
    out << "t" << header_list("q", dyn->n()) << header_list("u", dyn->m()) << ",residual\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << csv_number(traj.time(i));
        for (Index k = 0; k < dyn->n(); ++k) out << ',' << csv_number(traj.q(i)[k]);
        for (Index k = 0; k < dyn->m(); ++k) out << ',' << csv_number(traj.u(i)[k]);
        out << ',' << csv_number(rep.residuals[i]) << '\n';
    }
    log << "dictionary: " << dict.size() << " vectors (" << dict.domain << ")\n";
    log << "max residual " << format_double(rep.max_residual) << " at t=" << format_double(rep.t_max)
        << (rep.passed ? " (admissible within tol " : " (not admissible within tol ") << format_double(rep.tolerance)
        << ")\n";
    if (cfg.check.probe_q) {
        const std::vector<double> steps{1e-1, 1e-2, 1e-3, 1e-4};
        const ContinuityProbe probe =
            probe_continuity(*dyn, *cfg.check.probe_q, *cfg.check.probe_u, *cfg.check.probe_dq, *cfg.check.probe_du, steps);
        log << "continuity probe at q=" << format_vector(*cfg.check.probe_q) << ":";
        for (std::size_t i = 0; i < steps.size(); ++i)
            log << " h=" << format_double(steps[i]) << " d=" << format_double(probe.distances[i]);
        log << (probe.jump ? " -> jump detected\n" : " -> continuous\n");
    }
}

int task_shoot(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    const DynamicsPtr dyn = build_dynamics(cfg.system);
    const AmplitudeFamily family(build_path(cfg), dyn->n(), {}, cfg.shoot.radius);
    const ReachabilityReport reach = normal_reachability(family, *dyn, cfg.q0, cfg.shoot.h, cfg.reference_integrator);
    log << "normal reachability: rank " << reach.rank << " of " << family.dim() << ", condition "
        << format_double(reach.condition) << '\n';
    const ShootReport rep = shoot_exact(family, *dyn, cfg.q0, cfg.p0, cfg.shoot.target_q, cfg.shoot.target_u, cfg.T,
                                        cfg.integrator, cfg.shoot.options);
    {
        auto out = open_artifact(dir, "report.csv");
        out << "quantity,value\n";
        out << "converged," << (rep.converged ? 1 : 0) << '\n';
        out << "iterations," << rep.iterations << '\n';
        out << "endpoint_error," << csv_number(rep.endpoint_error) << '\n';
        out << "jacobian_condition," << csv_number(rep.jacobian_condition) << '\n';
        for (Index i = 0; i < rep.lambda.size(); ++i)
            out << "lambda" << i + 1 << ',' << csv_number(rep.lambda[i]) << '\n';
        for (Index i = 0; i < rep.residual.size(); ++i)
            out << "residual" << i + 1 << ',' << csv_number(rep.residual[i]) << '\n';
        out << "reachability_rank," << reach.rank << '\n';
        out << "reachability_condition," << csv_number(reach.condition) << '\n';
        for (Index i = 0; i < reach.J.rows(); ++i)
            for (Index j = 0; j < reach.J.cols(); ++j)
                out << "J" << i + 1 << '_' << j + 1 << ',' << csv_number(reach.J(i, j)) << '\n';
    }
    std::optional<double> omega = cfg.freq_override;
    if (cfg.freq_scale) omega = *cfg.freq_scale * std::pow(TimeRescaling(cfg.T).alpha(), 3);
    const auto control = synthesize_family(rep.lambda, family, cfg.T, omega);
    const Trajectory traj = integrate_full(*dyn, *control, cfg.q0, cfg.p0, control->value(0.0), cfg.T, cfg.integrator);
    auto out = open_artifact(dir, "trajectory.csv");
    write_trajectory_csv(traj, out);
    log << summary(rep) << '\n';
    return rep.converged ? kExitOk : kExitNumerical;
}

}  // namespace

int run(Task task, const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
        std::ostream& log) {
    try {
        const ConfigFile file = read_config(config_path);
        const RunConfig cfg = validate_config(file, task, seed);
        const fs::path dir(out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw ValidationError("cannot create output directory '" + out_dir + "': " + ec.message());
        write_manifest(dir, cfg, file);
        switch (task) {
            case Task::Reduce: task_reduce(cfg, dir, log); break;
            case Task::Synthesize: task_synthesize(cfg, dir, log); break;
            case Task::Simulate: task_simulate(cfg, dir, log); break;
            case Task::Sweep: task_sweep(cfg, dir, log); break;
            case Task::Check: task_check(cfg, dir, log); break;
            case Task::Shoot: return task_shoot(cfg, dir, log);
        }
        return kExitOk;
    } catch (const ConfigErrors& e) {
        log << "error: invalid configuration\n";
        for (const auto& m : e.messages()) log << "  " << m << '\n';
        return kExitValidation;
    } catch (const ValidationError& e) {
        log << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        log << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace lagctl
