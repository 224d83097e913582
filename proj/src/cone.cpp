#include "lagctl/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace lagctl {

Vector cone_generator(const ReducedPoint& point, const Vector& w) {
    const Index n = point.A.rows();
    if (w.size() != point.E.rows()) throw ValidationError("vibration direction has wrong dimension");
    Vector quad(n);
    for (Index k = 0; k < n; ++k) quad[k] = w.dot(point.D[static_cast<std::size_t>(k)] * w);
    return point.A * quad;
}

Vector cone_generator(const ReducedDynamics& dyn, const Vector& q, const Vector& u, const Vector& w) {
    return cone_generator(dyn.evaluate(q, u), w);
}

Matrix generator_matrix(const ReducedPoint& point, const Dictionary& dict) {
    Matrix G(point.A.rows(), static_cast<Index>(dict.size()));
    for (std::size_t i = 0; i < dict.size(); ++i) G.col(static_cast<Index>(i)) = cone_generator(point, dict.vectors[i]);
    return G;
}

namespace {

using Support = std::vector<Index>;

Matrix columns(const Matrix& G, const Support& S) {
    Matrix out(G.rows(), static_cast<Index>(S.size()));
    for (std::size_t i = 0; i < S.size(); ++i) out.col(static_cast<Index>(i)) = G.col(S[i]);
    return out;
}

// min |G_S x - p| subject to sum(x) = 1, minimum-norm solution when degenerate.
Vector affine_least_squares(const Matrix& GS, const Vector& p) {
    const Index k = GS.cols();
    Matrix kkt = Matrix::Zero(k + 1, k + 1);
    kkt.topLeftCorner(k, k) = GS.transpose() * GS;
    kkt.block(0, k, k, 1).setOnes();
    kkt.block(k, 0, 1, k).setOnes();
    Vector rhs(k + 1);
    rhs.head(k) = GS.transpose() * p;
    rhs[k] = 1.0;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(kkt);
    cod.setThreshold(1e-13);
    return cod.solve(rhs).head(k);
}

Vector unconstrained_least_squares(const Matrix& GS, const Vector& p) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(GS);
    cod.setThreshold(1e-13);
    return cod.solve(p);
}

double scale_of(const Matrix& G, const Vector& p) {
    double s = p.cwiseAbs().maxCoeff();
    if (G.size() > 0) s = std::max(s, G.cwiseAbs().maxCoeff());
    return std::max(s, 1.0);
}

}  // namespace

Selection solve_simplex_least_squares(const Matrix& G, const Vector& target) {
    const Index nu = G.cols();
    if (nu == 0) throw ValidationError("empty dictionary");
    if (G.rows() != target.size()) throw ValidationError("target has wrong dimension");

    const double scale = scale_of(G, target);
    const double kkt_tol = 1e-13 * scale * scale;

    // Start from the closest single generator; strict comparison keeps the lowest index.
    Index start = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < nu; ++i) {
        const double d = (G.col(i) - target).squaredNorm();
        if (d < best) {
            best = d;
            start = i;
        }
    }
    Vector theta = Vector::Zero(nu);
    theta[start] = 1.0;
    Support S{start};

    const int max_outer = static_cast<int>(10 * nu + 50);
    for (int outer = 0; outer < max_outer; ++outer) {
        const Vector grad = G.transpose() * (G * theta - target);
        double mu = 0.0;
        for (Index i : S) mu += grad[i];
        mu /= static_cast<double>(S.size());

        Index enter = -1;
        double most_negative = -kkt_tol;
        for (Index j = 0; j < nu; ++j) {
            if (std::find(S.begin(), S.end(), j) != S.end()) continue;
            const double reduced = grad[j] - mu;
            if (reduced < most_negative) {
                most_negative = reduced;
                enter = j;
            }
        }
        if (enter < 0) break;
        S.push_back(enter);
        std::sort(S.begin(), S.end());

        // Restricted solves; step back along the segment when a weight turns negative.
        for (int inner = 0; inner <= static_cast<int>(nu); ++inner) {
            const Vector x = affine_least_squares(columns(G, S), target);
            bool feasible = true;
            for (Index i = 0; i < x.size(); ++i)
                if (x[i] <= 0.0) feasible = false;
            if (feasible) {
                for (std::size_t i = 0; i < S.size(); ++i) theta[S[i]] = x[static_cast<Index>(i)];
                break;
            }
            double step = 1.0;
            for (std::size_t i = 0; i < S.size(); ++i) {
                const double xi = x[static_cast<Index>(i)];
                const double ti = theta[S[i]];
                if (xi <= 0.0 && ti - xi > 0.0) step = std::min(step, ti / (ti - xi));
            }
            for (std::size_t i = 0; i < S.size(); ++i)
                theta[S[i]] += step * (x[static_cast<Index>(i)] - theta[S[i]]);
            Support kept;
            for (Index i : S) {
                if (theta[i] > 1e-15) {
                    kept.push_back(i);
                } else {
                    theta[i] = 0.0;
                }
            }
            if (kept.empty()) {
                // Cannot happen for a convex combination, but keep theta valid.
                kept.push_back(start);
                theta.setZero();
                theta[start] = 1.0;
            }
            S = kept;
        }
    }

    // Project onto the simplex exactly (clip rounding noise, renormalize).
    theta = theta.cwiseMax(0.0);
    theta /= theta.sum();
    Selection out;
    out.residual = (target - G * theta).norm();
    out.theta = std::move(theta);
    return out;
}

ConicFit solve_nonnegative_least_squares(const Matrix& G, const Vector& target) {
    const Index nu = G.cols();
    if (G.rows() != target.size()) throw ValidationError("target has wrong dimension");
    Vector x = Vector::Zero(nu);
    ConicFit out;
    if (nu == 0) {
        out.weights = x;
        out.distance = target.norm();
        return out;
    }
    const double scale = scale_of(G, target);
    const double tol = 1e-13 * scale * scale;
    std::vector<bool> passive(static_cast<std::size_t>(nu), false);

    const int max_outer = static_cast<int>(3 * nu + 30);
    for (int outer = 0; outer < max_outer; ++outer) {
        const Vector w = G.transpose() * (target - G * x);
        Index enter = -1;
        double largest = tol;
        for (Index j = 0; j < nu; ++j) {
            if (!passive[static_cast<std::size_t>(j)] && w[j] > largest) {
                largest = w[j];
                enter = j;
            }
        }
        if (enter < 0) break;
        passive[static_cast<std::size_t>(enter)] = true;

        for (int inner = 0; inner <= static_cast<int>(nu); ++inner) {
            Support S;
            for (Index j = 0; j < nu; ++j)
                if (passive[static_cast<std::size_t>(j)]) S.push_back(j);
            const Vector z = unconstrained_least_squares(columns(G, S), target);
            bool feasible = true;
            for (Index i = 0; i < z.size(); ++i)
                if (z[i] <= 0.0) feasible = false;
            if (feasible) {
                x.setZero();
                for (std::size_t i = 0; i < S.size(); ++i) x[S[i]] = z[static_cast<Index>(i)];
                break;
            }
            double step = 1.0;
            for (std::size_t i = 0; i < S.size(); ++i) {
                const double zi = z[static_cast<Index>(i)];
                const double xi = x[S[i]];
                if (zi <= 0.0 && xi - zi > 0.0) step = std::min(step, xi / (xi - zi));
            }
            for (std::size_t i = 0; i < S.size(); ++i) {
                x[S[i]] += step * (z[static_cast<Index>(i)] - x[S[i]]);
                if (x[S[i]] <= 1e-15 * scale) {
                    x[S[i]] = 0.0;
                    passive[static_cast<std::size_t>(S[i])] = false;
                }
            }
        }
    }
    out.distance = (target - G * x).norm();
    out.weights = std::move(x);
    return out;
}

Selection select_coefficients(const ReducedDynamics& dyn, const Vector& q, const Vector& u, const Vector& p_unit,
                              const Dictionary& dict) {
    return solve_simplex_least_squares(generator_matrix(dyn.evaluate(q, u), dict), p_unit);
}

ConicFit cone_projection(const ReducedPoint& point, const Vector& r, const Dictionary& dict) {
    return solve_nonnegative_least_squares(generator_matrix(point, dict), r);
}

double cone_distance(const ReducedDynamics& dyn, const Vector& q, const Vector& u, const Vector& r,
                     const Dictionary& dict) {
    return cone_projection(dyn.evaluate(q, u), r, dict).distance;
}

std::vector<Vector> candidate_directions(int m, int count) {
    if (m < 1) throw ValidationError("control dimension must be positive");
    std::vector<Vector> out;
    if (m == 1) {
        out.push_back(Vector::Ones(1));
        return out;
    }
    count = std::max(count, 1);
    if (m == 2) {
        // Quadratic forms are even in w: a half circle covers every image.
        for (int j = 0; j < count; ++j) {
            const double a = std::numbers::pi * j / count;
            Vector d(2);
            d << std::cos(a), std::sin(a);
            out.push_back(d);
        }
        return out;
    }
    for (int i = 0; i < m; ++i) out.push_back(Vector::Unit(m, i));
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal;
    while (static_cast<int>(out.size()) < count * m) {
        Vector d(m);
        for (int i = 0; i < m; ++i) d[i] = normal(rng);
        if (d.norm() < 1e-8) continue;
        out.push_back(d / d.norm());
    }
    return out;
}

namespace {

std::string describe(const DomainSample& s) {
    return "q=" + format_vector(s.q) + ", u=" + format_vector(s.u) + ", p=" + format_vector(s.p);
}

}  // namespace

Dictionary build_dictionary(const ReducedDynamics& dyn, std::span<const DomainSample> samples, double eps,
                            const DictionaryOptions& options) {
    if (!(eps > 0.0)) throw ValidationError("dictionary tolerance must be positive");
    if (samples.empty()) throw ValidationError("dictionary sample set is empty");

    Dictionary dict;
    dict.epsilon = eps;
    dict.vectors.push_back(Vector::Zero(dyn.m()));
    const auto directions = candidate_directions(dyn.m(), options.directions);

    std::vector<ReducedPoint> points;
    points.reserve(samples.size());
    for (const auto& s : samples) points.push_back(dyn.evaluate(s.q, s.u));

    for (std::size_t idx = 0; idx < samples.size(); ++idx) {
        const auto& s = samples[idx];
        const auto& pt = points[idx];
        Matrix G = generator_matrix(pt, dict);
        double residual = solve_simplex_least_squares(G, s.p).residual;
        while (residual > 0.5 * eps && dict.size() < options.max_generators) {
            // Candidates scaled so their image at this sample has unit length.
            double best = residual;
            Vector best_w;
            for (const auto& d : directions) {
                const Vector g = cone_generator(pt, d);
                const double len = g.norm();
                if (!(len > 1e-300)) continue;
                const Vector w = d / std::sqrt(len);
                Matrix trial(G.rows(), G.cols() + 1);
                trial << G, g / len;
                const double r = solve_simplex_least_squares(trial, s.p).residual;
                if (r < best - 1e-15) {
                    best = r;
                    best_w = w;
                }
            }
            if (best_w.size() == 0) break;
            dict.vectors.push_back(best_w);
            G.conservativeResize(Eigen::NoChange, G.cols() + 1);
            G.col(G.cols() - 1) = cone_generator(pt, best_w);
            residual = best;
        }
    }

    double worst = 0.0;
    std::size_t worst_idx = 0;
    for (std::size_t idx = 0; idx < samples.size(); ++idx) {
        const double r = solve_simplex_least_squares(generator_matrix(points[idx], dict), samples[idx].p).residual;
        if (r > worst) {
            worst = r;
            worst_idx = idx;
        }
    }
    if (worst > eps) {
        throw NumericalError("dictionary of " + std::to_string(dict.size()) + " generators misses tolerance " +
                             format_double(eps) + ": residual " + format_double(worst) + " at sample " +
                             std::to_string(worst_idx) + " (" + describe(samples[worst_idx]) + ")");
    }
    dict.domain = std::to_string(samples.size()) + " samples";
    return dict;
}

std::vector<DomainSample> sample_domain(const ReducedDynamics& dyn, const SampleBox& box, std::size_t count,
                                        std::uint64_t seed) {
    const int n = dyn.n();
    const int m = dyn.m();
    if (box.q_lo.size() != n || box.q_hi.size() != n || box.u_lo.size() != m || box.u_hi.size() != m)
        throw ValidationError("sample box has wrong dimension");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-box.w_radius, box.w_radius);

    std::vector<DomainSample> out;
    out.reserve(count);
    while (out.size() < count) {
        DomainSample s;
        s.q = box.q_lo + (box.q_hi - box.q_lo).cwiseProduct(Vector::NullaryExpr(n, [&] { return unit(rng); }));
        s.u = box.u_lo + (box.u_hi - box.u_lo).cwiseProduct(Vector::NullaryExpr(m, [&] { return unit(rng); }));
        const ReducedPoint pt = dyn.evaluate(s.q, s.u);
        Vector p = Vector::Zero(n);
        const int parts = 1 + static_cast<int>(unit(rng) * 3.0);
        Vector weights = Vector::NullaryExpr(parts, [&] { return unit(rng) + 1e-3; });
        weights /= weights.sum();
        for (int j = 0; j < parts; ++j) {
            const Vector w = Vector::NullaryExpr(m, [&] { return sym(rng); });
            const Vector g = cone_generator(pt, w);
            p += weights[j] * g / std::max(1.0, g.norm());
        }
        s.p = p;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Vector> unit_slice(const ReducedDynamics& dyn, const Vector& q, const Vector& u, int directions,
                               int radial) {
    const ReducedPoint pt = dyn.evaluate(q, u);
    const double scale = std::max({1.0, pt.A.cwiseAbs().maxCoeff(), pt.E.cwiseAbs().maxCoeff()});
    std::vector<Vector> rays;
    for (const auto& d : candidate_directions(dyn.m(), directions)) {
        const Vector g = cone_generator(pt, d);
        const double len = g.norm();
        if (len > 1e-14 * scale) rays.push_back(g / len);
    }
    // Convex combinations of neighbouring rays fill the slice between them.
    std::vector<Vector> dirs = rays;
    for (std::size_t i = 0; i + 1 < rays.size(); ++i) {
        const Vector mid = 0.5 * (rays[i] + rays[i + 1]);
        if (mid.norm() > 1e-12) dirs.push_back(mid / mid.norm());
    }
    std::vector<Vector> out;
    out.push_back(Vector::Zero(dyn.n()));
    radial = std::max(radial, 1);
    for (const auto& d : dirs)
        for (int k = 1; k <= radial; ++k) out.push_back(d * (static_cast<double>(k) / radial));
    return out;
}

double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b) {
    if (a.empty() || b.empty()) throw ValidationError("Hausdorff distance of an empty set");
    auto directed = [](const std::vector<Vector>& x, const std::vector<Vector>& y) {
        double worst = 0.0;
        for (const auto& p : x) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& r : y) nearest = std::min(nearest, (p - r).norm());
            worst = std::max(worst, nearest);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

ContinuityProbe probe_continuity(const ReducedDynamics& dyn, const Vector& q, const Vector& u, const Vector& dq,
                                 const Vector& du, const std::vector<double>& steps, double threshold) {
    if (steps.empty()) throw ValidationError("continuity probe needs at least one step");
    ContinuityProbe probe;
    const auto base = unit_slice(dyn, q, u);
    for (double h : steps) {
        probe.steps.push_back(h);
        probe.distances.push_back(hausdorff_distance(base, unit_slice(dyn, q + h * dq, u + h * du)));
    }
    probe.jump = probe.distances.back() > threshold;
    return probe;
}

}  // namespace lagctl
