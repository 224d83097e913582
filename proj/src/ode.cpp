#include "lagctl/ode.hpp"

#include <algorithm>
#include <cmath>

namespace lagctl {

void IntegratorConfig::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw ValidationError("integrator tolerances must be positive");
    if (!(max_step > 0.0)) throw ValidationError("integrator max_step must be positive");
    if (steps_per_period < 20) throw ValidationError("steps_per_period must be at least 20");
    if (stride < 1) throw ValidationError("dense-output stride must be at least 1");
    if (max_steps < 1) throw ValidationError("integrator step budget must be positive");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double scaled_norm(const Vector& v, const Vector& y0, const Vector& y1, const IntegratorConfig& cfg) {
    if (v.size() == 0) return 0.0;
    const Vector sc = (cfg.atol + cfg.rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).matrix();
    return std::sqrt((v.array() / sc.array()).square().mean());
}

bool finite(const Vector& v) { return v.allFinite(); }

}  // namespace

Vector hermite(double t, double t0, const Vector& y0, const Vector& f0, double t1, const Vector& y1,
               const Vector& f1) {
    const double h = t1 - t0;
    if (h == 0.0) return y0;
    const double x = (t - t0) / h;
    const double x2 = x * x;
    const double x3 = x2 * x;
    const double h00 = 2 * x3 - 3 * x2 + 1;
    const double h10 = x3 - 2 * x2 + x;
    const double h01 = -2 * x3 + 3 * x2;
    const double h11 = x3 - x2;
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
}

Vector integrate_dopri(const OdeRhs& f, double t0, const Vector& y0, double t1, const IntegratorConfig& cfg,
                       std::vector<double> breakpoints, const OdeObserver& observe, StepStats& stats) {
    cfg.validate();
    if (!finite(y0)) throw IntegrationError("non-finite initial state", t0, y0);
    const double dir = t1 >= t0 ? 1.0 : -1.0;

    std::vector<double> ends;
    for (double b : breakpoints)
        if (dir * (b - t0) > 0 && dir * (t1 - b) > 0) ends.push_back(b);
    std::sort(ends.begin(), ends.end(), [dir](double a, double b) { return dir * a < dir * b; });
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    ends.push_back(t1);

    const Index N = y0.size();
    Vector y = y0;
    double t = t0;
    Vector k1(N), k2(N), k3(N), k4(N), k5(N), k6(N), k7(N), tmp(N), y5(N), err(N);
    const double max_step = cfg.max_step;
    stats.step_ceiling = std::min(stats.step_ceiling, max_step);

    auto eval = [&](double tt, const Vector& yy, Vector& out, Side side) {
        f(tt, yy, out, side);
        ++stats.evaluations;
        if (!finite(out)) throw IntegrationError("non-finite right-hand side", tt, yy);
    };

    double h = 0.0;
    bool first_segment = true;
    std::size_t since_record = 0;
    for (double te : ends) {
        const double lo = std::min(t, te);
        const double hi = std::max(t, te);
        auto side_of = [lo, hi](double s) { return (s - lo) <= (hi - s) ? Side::Right : Side::Left; };
        const double seg_start = t;
        eval(t, y, k1, side_of(t));
        observe(t, y, k1);

        if (t == te) continue;
        if (first_segment) {
            // Initial step heuristic (Hairer, Norsett, Wanner).
            const double d0 = scaled_norm(y, y, y, cfg);
            const double d1 = scaled_norm(k1, y, y, cfg);
            double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
            h0 = std::min({h0, max_step, std::abs(te - t)});
            tmp = y + dir * h0 * k1;
            eval(t + dir * h0, tmp, k2, side_of(t + dir * h0));
            const double d2 = scaled_norm(k2 - k1, y, y, cfg) / h0;
            const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                       : std::pow(0.01 / std::max(d1, d2), 0.2);
            h = std::min(100 * h0, h1);
            first_segment = false;
        }

        bool rejected_last = false;
        while (dir * (te - t) > 0) {
            double step = std::min(std::abs(h), max_step);
            bool last = false;
            const double rest = std::abs(te - t);
            if (step >= rest * (1 - 1e-12)) {
                step = rest;
                last = true;
            }
            const double hs = dir * step;
            const double underflow = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
            if (step < underflow && !last) throw IntegrationError("step size underflow", t, y);

            tmp = y + hs * (a21 * k1);
            eval(t + c2 * hs, tmp, k2, side_of(t + c2 * hs));
            tmp = y + hs * (a31 * k1 + a32 * k2);
            eval(t + c3 * hs, tmp, k3, side_of(t + c3 * hs));
            tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
            eval(t + c4 * hs, tmp, k4, side_of(t + c4 * hs));
            tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            eval(t + c5 * hs, tmp, k5, side_of(t + c5 * hs));
            tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            const double t_new = last ? te : t + hs;
            eval(t_new, tmp, k6, side_of(t_new));
            y5 = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            eval(t_new, y5, k7, side_of(t_new));
            err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double en = scaled_norm(err, y, y5, cfg);

            if (en <= 1.0) {
                t = t_new;
                y = y5;
                k1 = k7;
                ++stats.accepted;
                stats.largest_step = std::max(stats.largest_step, step);
                if (stats.accepted + stats.rejected > cfg.max_steps)
                    throw IntegrationError("step budget of " + std::to_string(cfg.max_steps) + " exhausted", t, y);
                ++since_record;
                if (last || since_record >= static_cast<std::size_t>(cfg.stride)) {
                    // Segment ends are observed by the next segment's restart or below.
                    if (!last) observe(t, y, k1);
                    since_record = 0;
                }
                double factor = en == 0.0 ? 10.0 : 0.9 * std::pow(en, -0.2);
                factor = std::clamp(factor, 0.2, rejected_last ? 1.0 : 10.0);
                if (!last) h = step * factor;
                rejected_last = false;
            } else {
                ++stats.rejected;
                if (stats.accepted + stats.rejected > cfg.max_steps)
                    throw IntegrationError("step budget of " + std::to_string(cfg.max_steps) + " exhausted", t, y);
                h = step * std::max(0.2, 0.9 * std::pow(en, -0.2));
                rejected_last = true;
            }
        }
        // Left-limit rate at the segment end.
        if (t != seg_start) observe(t, y, k1);
    }
    return y;
}

}  // namespace lagctl
