#include "lagctl/controlgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace lagctl {

// ------------------------------------------------------------ time rescaling

TimeRescaling::TimeRescaling(double T) : T_(T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("horizon T must be positive and finite");
    L_ = std::log1p(T);
    alpha_ = std::sqrt(L_);
}

namespace {

double remaining(double T, double t) {
    const double r = 1.0 + T - t;
    if (!(r > 0.0)) throw DomainError("time " + format_double(t) + " is beyond the horizon");
    return r;
}

}  // namespace

double TimeRescaling::psi(double t) const {
    remaining(T_, t);
    return 1.0 - std::log1p(T_ - t) / L_;
}

double TimeRescaling::dpsi(double t) const { return 1.0 / (L_ * remaining(T_, t)); }

double TimeRescaling::ddpsi(double t) const {
    const double r = remaining(T_, t);
    return 1.0 / (L_ * r * r);
}

double TimeRescaling::inverse(double s) const { return -(1.0 + T_) * std::expm1(-s * L_); }

double TimeRescaling::eta(double s) const { return std::exp((s - 1.0) * L_) / L_; }

TimeRescaling rescale_time(double T) { return TimeRescaling(T); }

// ------------------------------------------------------------ path control

void PathControl::validate() const {
    if (!u_star || !w_star) throw ValidationError("path control needs both u* and w*");
    if (u_star->dim() != w_star->dim()) throw ValidationError("u* and w* differ in dimension");
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw ValidationError("eps0 must lie in (0, 1)");
    constexpr int probes = 200;
    for (int i = 0; i <= probes; ++i) {
        const double s = eps0 * i / probes;
        const double mag = w_star->value(s).cwiseAbs().maxCoeff();
        if (mag > 1e-14)
            throw ValidationError("w* must vanish on [0, eps0]; |w*(" + format_double(s) + ")| = " + format_double(mag));
    }
}

PathPtr vanishing_start(PathPtr w, double eps0) {
    if (!w) throw ValidationError("vanishing_start: null path");
    if (!(eps0 > 0.0 && eps0 < 0.5)) throw ValidationError("eps0 must lie in (0, 0.5)");
    auto cut = [eps0](double s) -> std::array<double, 2> {
        const double x = (s - eps0) / eps0;
        if (x <= 0.0) return {0.0, 0.0};
        if (x >= 1.0) return {1.0, 0.0};
        return {x * x * x * (10.0 + x * (-15.0 + 6.0 * x)), 30.0 * x * x * (1.0 - x) * (1.0 - x) / eps0};
    };
    auto breaks = w->breakpoints();
    breaks.push_back(eps0);
    breaks.push_back(2.0 * eps0);
    std::sort(breaks.begin(), breaks.end());
    return std::make_shared<FunctionPath>(
        w->dim(),
        [w, cut](double s) -> Vector {
            const auto c = cut(s);
            if (c[0] == 0.0) return Vector::Zero(w->dim());
            return c[0] * w->value(s);
        },
        [w, cut](double s) -> Vector {
            const auto c = cut(s);
            if (c[0] == 0.0) return Vector::Zero(w->dim());
            return c[1] * w->value(s) + c[0] * w->derivative(s);
        },
        breaks);
}

PathSamples sample_path_control(const PathControl& path, const std::vector<double>& grid) {
    PathSamples out;
    out.grid = grid;
    out.eps0 = path.eps0;
    for (double s : grid) {
        out.u.push_back(path.u_star->value(s));
        out.w.push_back(path.w_star->value(s));
    }
    return out;
}

PathControl path_control_from_samples(const PathSamples& samples) {
    if (samples.grid.size() < 2) throw ValidationError("path samples need at least two grid points");
    if (samples.grid.front() > 0.0 || samples.grid.back() < 1.0)
        throw ValidationError("path sample grid must cover [0, 1]");
    auto make = [&](const std::vector<Vector>& v) -> PathPtr {
        if (samples.grid.size() >= 3) return std::make_shared<SplinePath>(samples.grid, v);
        return std::make_shared<LinearPath>(samples.grid, v);
    };
    PathControl out;
    out.eps0 = samples.eps0;
    out.u_star = make(samples.u);
    PathPtr w = make(samples.w);
    const double eps0 = samples.eps0;
    out.w_star = std::make_shared<FunctionPath>(
        w->dim(), [w, eps0](double s) -> Vector { return s <= eps0 ? Vector::Zero(w->dim()) : w->value(s); },
        [w, eps0](double s) -> Vector { return s <= eps0 ? Vector::Zero(w->dim()) : w->derivative(s); },
        std::vector<double>{eps0});
    return out;
}

// ------------------------------------------------------------ vibrational synthesis

VibrationalControl::VibrationalControl(PathControl path, TimeRescaling rescaling, std::optional<double> omega)
    : path_(std::move(path)), rescaling_(rescaling) {
    path_.validate();
    const double alpha = rescaling_.alpha();
    omega_ = omega.value_or(alpha * alpha * alpha);
    if (!(omega_ > 0.0) || !std::isfinite(omega_)) throw ValidationError("vibration frequency must be positive");
    amplitude_ = std::numbers::sqrt2 * alpha / omega_;
}

Vector VibrationalControl::value(double t, Side side) const {
    const double s = rescaling_.psi(t);
    Vector u = path_.u_star->value(s, side);
    const double osc = amplitude_ * rescaling_.dpsi(t) * std::sin(omega_ * t);
    if (osc != 0.0) u += osc * path_.w_star->value(s, side);
    return u;
}

Vector VibrationalControl::rate(double t, Side side) const {
    const double s = rescaling_.psi(t);
    const double d1 = rescaling_.dpsi(t);
    const double d2 = rescaling_.ddpsi(t);
    const double sn = std::sin(omega_ * t);
    const double cs = std::cos(omega_ * t);
    const Vector w = path_.w_star->value(s, side);
    const Vector dw = path_.w_star->derivative(s, side);
    return path_.u_star->derivative(s, side) * d1 +
           amplitude_ * ((d2 * sn + d1 * omega_ * cs) * w + (d1 * d1 * sn) * dw);
}

std::vector<double> VibrationalControl::breakpoints() const {
    std::vector<double> out;
    for (double s : merged_breakpoints({path_.u_star.get(), path_.w_star.get()}, 0.0, 1.0))
        out.push_back(rescaling_.inverse(s));
    return out;
}

std::shared_ptr<const VibrationalControl> synthesize_vibrational(const PathControl& path, double T,
                                                                 std::optional<double> freq_override) {
    return std::make_shared<VibrationalControl>(path, TimeRescaling(T), freq_override);
}

Matrix tabulate_control(const ControlSignal& control, double T, std::size_t points) {
    if (points < 2) throw ValidationError("control table needs at least two points");
    const int m = control.dim();
    Matrix out(static_cast<Index>(points), 1 + 2 * m);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(points - 1);
        const auto r = static_cast<Index>(i);
        out(r, 0) = t;
        out.block(r, 1, 1, m) = control.value(t).transpose();
        out.block(r, 1 + m, 1, m) = control.rate(t).transpose();
    }
    return out;
}

// ------------------------------------------------------------ families

AmplitudeFamily::AmplitudeFamily(PathControl base, int n, std::vector<PathPtr> profiles, double radius)
    : base_(std::move(base)), n_(n), profiles_(std::move(profiles)), radius_(radius) {
    if (n < 1) throw ValidationError("family needs n >= 1");
    if (!base_.u_star || !base_.w_star) throw ValidationError("family base path is incomplete");
    if (profiles_.empty()) {
        if (n != 1) throw ValidationError("a family with n > 1 needs one vibration profile per free coordinate");
        profiles_.push_back(base_.w_star);
    }
    if (static_cast<int>(profiles_.size()) != n) throw ValidationError("family needs exactly n vibration profiles");
    for (const auto& p : profiles_)
        if (!p || p->dim() != base_.dim()) throw ValidationError("vibration profile has wrong dimension");
    if (!(radius_ > 0.0)) throw ValidationError("family radius must be positive");
}

PathControl AmplitudeFamily::member(const Vector& lambda) const {
    if (lambda.size() != dim()) throw ValidationError("family parameter has wrong dimension");
    if (!(lambda.norm() <= radius_))
        throw ValidationError("family parameter " + format_vector(lambda) + " is outside the declared ball");
    const Vector lu = lambda.tail(m());
    std::vector<double> gains;
    for (int k = 0; k < n_; ++k) gains.push_back(std::sqrt(std::max(0.0, 1.0 + lambda[k])));

    PathControl out;
    out.eps0 = base_.eps0;
    const PathPtr u0 = base_.u_star;
    out.u_star = std::make_shared<FunctionPath>(
        m(), [u0, lu](double s) -> Vector { return u0->value(s) + s * lu; },
        [u0, lu](double s) -> Vector { return u0->derivative(s) + lu; }, u0->breakpoints());

    const auto profiles = profiles_;
    std::vector<const Path*> raw;
    for (const auto& p : profiles) raw.push_back(p.get());
    out.w_star = std::make_shared<FunctionPath>(
        m(),
        [profiles, gains](double s) -> Vector {
            Vector w = Vector::Zero(profiles.front()->dim());
            for (std::size_t k = 0; k < profiles.size(); ++k)
                if (gains[k] != 0.0) w += gains[k] * profiles[k]->value(s);
            return w;
        },
        [profiles, gains](double s) -> Vector {
            Vector w = Vector::Zero(profiles.front()->dim());
            for (std::size_t k = 0; k < profiles.size(); ++k)
                if (gains[k] != 0.0) w += gains[k] * profiles[k]->derivative(s);
            return w;
        },
        merged_breakpoints(raw, 0.0, 1.0));
    return out;
}

std::shared_ptr<const VibrationalControl> synthesize_family(const Vector& lambda, const PathFamily& family, double T,
                                                            std::optional<double> freq_override) {
    return synthesize_vibrational(family.member(lambda), T, freq_override);
}

// ------------------------------------------------------------ reparametrization

Reparametrized reparametrize_bounded(PathPtr u, PathPtr gamma, int N, int resolution) {
    if (N <= 0) throw ValidationError("reparametrization needs N >= 1");
    if (!u || !gamma) throw ValidationError("reparametrization needs u and gamma");
    resolution = std::max(resolution, 8);
    const double invN = 1.0 / N;
    auto rho = [u, gamma, invN](double s) { return u->derivative(s).norm() + gamma->value(s).norm() + invN; };

    // Per subinterval: table of (s, tau) from the cumulative trapezoid of rho.
    std::vector<double> s_tab, tau_tab, scale;  // scale[i] = N * integral over subinterval i
    Reparametrized out;
    for (int i = 0; i < N; ++i) {
        const double a = static_cast<double>(i) / N;
        const double b = static_cast<double>(i + 1) / N;
        std::vector<double> grid;
        for (int j = 0; j <= resolution; ++j) grid.push_back(a + (b - a) * j / resolution);
        for (double x : merged_breakpoints({u.get(), gamma.get()}, a, b)) grid.push_back(x);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

        std::vector<double> cum(grid.size(), 0.0);
        double prev = rho(grid[0]);
        for (std::size_t j = 1; j < grid.size(); ++j) {
            const double cur = rho(grid[j]);
            cum[j] = cum[j - 1] + 0.5 * (prev + cur) * (grid[j] - grid[j - 1]);
            prev = cur;
        }
        const double total = cum.back();
        scale.push_back(N * total);
        out.bounds.push_back(N * total);
        for (std::size_t j = (i == 0 ? 0 : 1); j < grid.size(); ++j) {
            s_tab.push_back(grid[j]);
            tau_tab.push_back(j + 1 == grid.size() ? b : a + (b - a) * cum[j] / total);
        }
    }
    for (int i = 0; i <= N; ++i) out.knots.push_back(static_cast<double>(i) / N);

    auto s_of = [s_tab, tau_tab](double tau) {
        if (tau <= tau_tab.front()) return s_tab.front();
        if (tau >= tau_tab.back()) return s_tab.back();
        const auto it = std::upper_bound(tau_tab.begin(), tau_tab.end(), tau);
        const auto j = static_cast<std::size_t>(it - tau_tab.begin()) - 1;
        const double x = (tau - tau_tab[j]) / (tau_tab[j + 1] - tau_tab[j]);
        return s_tab[j] + x * (s_tab[j + 1] - s_tab[j]);
    };
    // ds/dtau = N * integral / rho on the subinterval containing tau.
    auto dsdtau = [scale, rho, N](double tau, double s) {
        const int i = std::clamp(static_cast<int>(std::floor(tau * N)), 0, N - 1);
        return scale[static_cast<std::size_t>(i)] / rho(s);
    };

    out.s_of_tau = std::make_shared<FunctionPath>(
        1, [s_of](double tau) { return Vector::Constant(1, s_of(tau)); },
        [s_of, dsdtau](double tau) { return Vector::Constant(1, dsdtau(tau, s_of(tau))); }, out.knots);
    out.u = std::make_shared<FunctionPath>(
        u->dim(), [u, s_of](double tau) -> Vector { return u->value(s_of(tau)); },
        [u, s_of, dsdtau](double tau) -> Vector {
            const double s = s_of(tau);
            return u->derivative(s) * dsdtau(tau, s);
        },
        out.knots);
    out.gamma = std::make_shared<FunctionPath>(
        gamma->dim(),
        [gamma, s_of, dsdtau](double tau) -> Vector {
            const double s = s_of(tau);
            return gamma->value(s) * dsdtau(tau, s);
        },
        [gamma](double) -> Vector { return Vector::Zero(gamma->dim()); }, out.knots);
    return out;
}

// ------------------------------------------------------------ piecewise controls

namespace {

constexpr std::array<double, 8> kGaussNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                               0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

}  // namespace

PiecewiseControls piecewise_controls(PathPtr u_star, PathPtr gamma, PathPtr q, const ReducedDynamics& dyn,
                                     const Dictionary& dict, int k, int quadrature_panels) {
    if (k <= 0) throw ValidationError("piecewise controls need k >= 1");
    if (dict.size() == 0) throw ValidationError("piecewise controls need a nonempty dictionary");
    if (!u_star || !gamma || !q) throw ValidationError("piecewise controls need u*, gamma and q");
    const auto nu = static_cast<int>(dict.size());
    const int m = dyn.m();
    quadrature_panels = std::max(quadrature_panels, 1);

    std::vector<double> knots;
    std::vector<Vector> knot_values;
    for (int j = 0; j <= k; ++j) {
        knots.push_back(static_cast<double>(j) / k);
        knot_values.push_back(u_star->value(knots.back()));
    }

    std::vector<double> edges;
    std::vector<Vector> values;
    for (int j = 0; j < k; ++j) {
        const double a = knots[j];
        const double b = knots[j + 1];
        Vector c = Vector::Zero(nu);
        const double panel = (b - a) / quadrature_panels;
        for (int p = 0; p < quadrature_panels; ++p) {
            const double mid = a + panel * (p + 0.5);
            for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
                const double s = mid + 0.5 * panel * kGaussNodes[g];
                const Vector gs = gamma->value(s);
                const double mag = gs.norm();
                if (mag == 0.0) continue;  // |gamma| theta vanishes whatever theta is
                const auto sel = select_coefficients(dyn, q->value(s), u_star->value(s), gs / mag, dict);
                c += (0.5 * panel * kGaussWeights[g] * mag) * sel.theta;
            }
        }
        for (int l = 0; l < nu; ++l) {
            edges.push_back(a + static_cast<double>(l) / (static_cast<double>(k) * nu));
            const double amp = std::sqrt(std::max(0.0, static_cast<double>(k) * nu * c[l]));
            values.push_back(amp * dict.vectors[static_cast<std::size_t>(l)]);
            if (values.back().size() != m) throw ValidationError("dictionary vector has wrong dimension");
        }
    }
    edges.push_back(1.0);

    PiecewiseControls out;
    out.u = std::make_shared<LinearPath>(knots, knot_values);
    out.w = std::make_shared<StepPath>(edges, values);
    return out;
}

}  // namespace lagctl
