#include "lagctl/model.hpp"

#include <algorithm>
#include <cmath>

namespace lagctl {

namespace {

std::string point_string(const Vector& q, const Vector& u) {
    return "q=" + format_vector(q) + ", u=" + format_vector(u);
}

Matrix symmetrized(const Matrix& M) { return 0.5 * (M + M.transpose()); }

double max_abs(const Matrix& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

}  // namespace

// ---------------------------------------------------------------- spec

MechanicalSpec::MechanicalSpec(int n, int m, SymbolTable symbols, std::map<std::string, double> params,
                               std::vector<std::vector<Expr>> entries)
    : n_(n), m_(m), symbols_(std::move(symbols)), params_(std::move(params)), entries_(std::move(entries)) {
    if (n < 1 || m < 1) throw ValidationError("system dimensions must satisfy n >= 1, m >= 1");
    const auto N = static_cast<std::size_t>(n + m);
    if (entries_.size() != N) throw ValidationError("metric must have n+m rows");
    for (const auto& row : entries_)
        if (row.size() != N) throw ValidationError("metric must have n+m columns");
    for (std::size_t s = N; s < symbols_.size(); ++s) {
        if (!params_.count(symbols_.name(s)))
            throw ValidationError("parameter '" + symbols_.name(s) + "' has no value");
    }
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
            if (!(simplify(entries_[i][j]) == simplify(entries_[j][i])))
                throw ValidationError("metric is not symmetric at entry (" + std::to_string(i + 1) + "," +
                                      std::to_string(j + 1) + ")");
        }
    }
}

MechanicalSpec MechanicalSpec::from_upper(int n, int m, SymbolTable symbols, std::map<std::string, double> params,
                                          const std::map<std::pair<int, int>, Expr>& upper) {
    const int N = n + m;
    std::vector<std::vector<Expr>> full(static_cast<std::size_t>(std::max(N, 0)),
                                        std::vector<Expr>(static_cast<std::size_t>(std::max(N, 0))));
    for (const auto& [ij, e] : upper) {
        auto [i, j] = ij;
        if (i < 1 || j < 1 || i > N || j > N) throw ValidationError("metric index out of range");
        if (i > j) throw ValidationError("metric entries must be given for the upper triangle (i <= j)");
        full[i - 1][j - 1] = e;
        full[j - 1][i - 1] = e;
    }
    return MechanicalSpec(n, m, std::move(symbols), std::move(params), std::move(full));
}

std::vector<double> MechanicalSpec::bind(const Vector& q, const Vector& u) const {
    if (q.size() != n_ || u.size() != m_) throw ValidationError("point has wrong dimension");
    std::vector<double> slots(symbols_.size(), 0.0);
    for (int i = 0; i < n_; ++i) slots[i] = q[i];
    for (int i = 0; i < m_; ++i) slots[n_ + i] = u[i];
    for (std::size_t s = n_ + m_; s < symbols_.size(); ++s) slots[s] = params_.at(symbols_.name(s));
    return slots;
}

Matrix MechanicalSpec::metric(const Vector& q, const Vector& u) const {
    auto slots = bind(q, u);
    const int N = n_ + m_;
    Matrix G(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) G(i, j) = lagctl::evaluate(entries_[i][j], slots);
    return G;
}

// ---------------------------------------------------------------- reduction

namespace {

class MetricReduction final : public ReducedDynamics {
public:
    explicit MetricReduction(const MechanicalSpec& spec) : spec_(spec) {
        const int N = spec.n() + spec.m();
        entries_.resize(static_cast<std::size_t>(N * N));
        partials_.assign(static_cast<std::size_t>(spec.n()), std::vector<CompiledExpr>(N * N));
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                // Upper triangle is compiled once and mirrored.
                const Expr& e = spec.entry(std::min(i, j), std::max(i, j));
                entries_[i * N + j] = CompiledExpr(simplify(e));
                for (int k = 0; k < spec.n(); ++k)
                    partials_[k][i * N + j] = CompiledExpr(differentiate(e, static_cast<std::size_t>(k)));
            }
        }
    }

    int n() const override { return spec_.n(); }
    int m() const override { return spec_.m(); }
    Provenance provenance() const override { return Provenance::DerivedFromMetric; }

    ReducedPoint evaluate(const Vector& q, const Vector& u) const override {
        const int n = spec_.n();
        const int m = spec_.m();
        const int N = n + m;
        const auto slots = spec_.bind(q, u);
        Matrix G(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) G(i, j) = entries_[i * N + j](slots);

        Eigen::LLT<Matrix> full(G);
        if (full.info() != Eigen::Success)
            throw SingularMatrixError("metric G is not positive definite at " + point_string(q, u));
        Eigen::LLT<Matrix> llt11(G.topLeftCorner(n, n));
        const double rcond = llt11.rcond();
        if (llt11.info() != Eigen::Success || !(rcond > 1e-14))
            throw SingularMatrixError("block G11 is numerically singular at " + point_string(q, u) +
                                      " (reciprocal condition " + format_double(rcond) + ")");

        const Matrix G12 = G.topRightCorner(n, m);
        const Matrix G21 = G.bottomLeftCorner(m, n);
        ReducedPoint r;
        r.A = symmetrized(llt11.solve(Matrix::Identity(n, n)));
        r.K = -r.A * G12;
        r.E = symmetrized(G.bottomRightCorner(m, m) - G21 * r.A * G12);
        r.B.resize(n);
        r.C.resize(n);
        r.D.resize(n);
        Matrix dG(N, N);
        for (int k = 0; k < n; ++k) {
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) dG(i, j) = partials_[k][i * N + j](slots);
            const Matrix dA = symmetrized(-r.A * dG.topLeftCorner(n, n) * r.A);
            const Matrix dG12 = dG.topRightCorner(n, m);
            const Matrix dG21 = dG.bottomLeftCorner(m, n);
            const Matrix dE = dG.bottomRightCorner(m, m) - dG21 * r.A * G12 - G21 * dA * G12 - G21 * r.A * dG12;
            r.B[k] = dA;
            r.C[k] = -dA * G12 - r.A * dG12;
            r.D[k] = 0.5 * symmetrized(dE);
        }
        return r;
    }

private:
    MechanicalSpec spec_;
    std::vector<CompiledExpr> entries_;
    std::vector<std::vector<CompiledExpr>> partials_;
};

}  // namespace

DynamicsPtr reduce(const MechanicalSpec& spec) { return std::make_shared<MetricReduction>(spec); }

// ---------------------------------------------------------------- direct

DirectDynamics::DirectDynamics(int n, int m, SymbolTable symbols, std::map<std::string, double> params,
                               std::vector<std::vector<Expr>> A, std::vector<std::vector<Expr>> K,
                               std::vector<std::vector<Expr>> E)
    : n_(n), m_(m), symbols_(std::move(symbols)) {
    if (n < 1 || m < 1) throw ValidationError("system dimensions must satisfy n >= 1, m >= 1");
    auto check = [](const std::vector<std::vector<Expr>>& M, int rows, int cols, const char* name, bool sym) {
        if (static_cast<int>(M.size()) != rows) throw ValidationError(std::string(name) + " has wrong row count");
        for (const auto& row : M)
            if (static_cast<int>(row.size()) != cols)
                throw ValidationError(std::string(name) + " has wrong column count");
        if (sym) {
            for (int i = 0; i < rows; ++i)
                for (int j = i + 1; j < cols; ++j)
                    if (!(simplify(M[i][j]) == simplify(M[j][i])))
                        throw ValidationError(std::string(name) + " is not symmetric");
        }
    };
    check(A, n, n, "A", true);
    check(K, n, m, "K", false);
    check(E, m, m, "E", true);
    base_slots_.assign(symbols_.size(), 0.0);
    for (std::size_t s = static_cast<std::size_t>(n + m); s < symbols_.size(); ++s) {
        auto it = params.find(symbols_.name(s));
        if (it == params.end()) throw ValidationError("parameter '" + symbols_.name(s) + "' has no value");
        base_slots_[s] = it->second;
    }
    A_ = compile(A, n, n, n);
    K_ = compile(K, n, m, n);
    E_ = compile(E, m, m, n);
}

DirectDynamics::Block DirectDynamics::compile(const std::vector<std::vector<Expr>>& exprs, int rows, int cols,
                                              int n) {
    Block b;
    b.rows = rows;
    b.cols = cols;
    b.dq.resize(n);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const Expr& e = exprs[i][j];
            b.value.emplace_back(simplify(e));
            for (int k = 0; k < n; ++k) b.dq[k].emplace_back(differentiate(e, static_cast<std::size_t>(k)));
        }
    }
    return b;
}

Matrix DirectDynamics::eval(const Block& b, std::span<const double> slots) {
    Matrix M(b.rows, b.cols);
    for (int i = 0; i < b.rows; ++i)
        for (int j = 0; j < b.cols; ++j) M(i, j) = b.value[i * b.cols + j](slots);
    return M;
}

Matrix DirectDynamics::eval_dq(const Block& b, int k, std::span<const double> slots) {
    Matrix M(b.rows, b.cols);
    for (int i = 0; i < b.rows; ++i)
        for (int j = 0; j < b.cols; ++j) M(i, j) = b.dq[k][i * b.cols + j](slots);
    return M;
}

ReducedPoint DirectDynamics::evaluate(const Vector& q, const Vector& u) const {
    if (q.size() != n_ || u.size() != m_) throw ValidationError("point has wrong dimension");
    std::vector<double> slots = base_slots_;
    for (int i = 0; i < n_; ++i) slots[i] = q[i];
    for (int i = 0; i < m_; ++i) slots[n_ + i] = u[i];
    ReducedPoint r;
    r.A = eval(A_, slots);
    r.K = eval(K_, slots);
    r.E = eval(E_, slots);
    r.B.resize(n_);
    r.C.resize(n_);
    r.D.resize(n_);
    for (int k = 0; k < n_; ++k) {
        r.B[k] = eval_dq(A_, k, slots);
        r.C[k] = eval_dq(K_, k, slots);
        r.D[k] = 0.5 * eval_dq(E_, k, slots);
    }
    return r;
}

// ---------------------------------------------------------------- symbolic

namespace {

using ExprMatrix = std::vector<std::vector<Expr>>;

Expr add(Expr a, Expr b) { return simplify(Expr::binary(Op::Add, std::move(a), std::move(b))); }
Expr mul(Expr a, Expr b) { return simplify(Expr::binary(Op::Mul, std::move(a), std::move(b))); }

ExprMatrix minor_of(const ExprMatrix& M, std::size_t row, std::size_t col) {
    ExprMatrix out;
    for (std::size_t i = 0; i < M.size(); ++i) {
        if (i == row) continue;
        std::vector<Expr> r;
        for (std::size_t j = 0; j < M.size(); ++j)
            if (j != col) r.push_back(M[i][j]);
        out.push_back(std::move(r));
    }
    return out;
}

Expr determinant(const ExprMatrix& M) {
    if (M.size() == 1) return M[0][0];
    Expr det = Expr::constant(0.0);
    for (std::size_t j = 0; j < M.size(); ++j) {
        Expr term = mul(M[0][j], determinant(minor_of(M, 0, j)));
        if (j % 2) term = mul(Expr::constant(-1.0), term);
        det = add(det, term);
    }
    return det;
}

}  // namespace

SymbolicReduction reduce_symbolic(const MechanicalSpec& spec) {
    const std::size_t n = static_cast<std::size_t>(spec.n());
    const std::size_t m = static_cast<std::size_t>(spec.m());
    if (n > 4) throw ValidationError("symbolic reduction supports n <= 4");
    ExprMatrix G11(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) G11[i][j] = simplify(spec.entry(int(i), int(j)));
    auto G12 = [&](std::size_t i, std::size_t a) { return simplify(spec.entry(int(i), int(n + a))); };

    SymbolicReduction r;
    const Expr inv_det = simplify(Expr::power(determinant(G11), -1));
    r.A.assign(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            Expr cof = n == 1 ? Expr::constant(1.0) : determinant(minor_of(G11, j, i));
            if ((i + j) % 2) cof = mul(Expr::constant(-1.0), cof);
            r.A[i][j] = mul(cof, inv_det);
            r.A[j][i] = r.A[i][j];
        }
    }
    r.K.assign(n, std::vector<Expr>(m));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < m; ++a) {
            Expr s = Expr::constant(0.0);
            for (std::size_t j = 0; j < n; ++j) s = add(s, mul(r.A[i][j], G12(j, a)));
            r.K[i][a] = mul(Expr::constant(-1.0), s);
        }
    }
    r.E.assign(m, std::vector<Expr>(m));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            // G21 A G12 = -G21 K
            Expr s = simplify(spec.entry(int(n + a), int(n + b)));
            for (std::size_t i = 0; i < n; ++i) s = add(s, mul(G12(i, a), r.K[i][b]));
            r.E[a][b] = s;
            r.E[b][a] = s;
        }
    }
    r.D.assign(n, ExprMatrix(m, std::vector<Expr>(m)));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a; b < m; ++b) {
                r.D[k][a][b] = mul(Expr::constant(0.5), differentiate(r.E[a][b], k));
                r.D[k][b][a] = r.D[k][a][b];
            }
        }
    }
    return r;
}

// ---------------------------------------------------------------- identities

double IdentityReport::max_residual() const {
    double r = std::max({residual_A, residual_K, residual_E});
    for (double b : block_identities) r = std::max(r, b);
    return r;
}

IdentityReport crosscheck_identities(const Matrix& G, int n, double tol) {
    IdentityReport rep;
    rep.tolerance = tol;
    const int N = static_cast<int>(G.rows());
    const int m = N - n;
    if (G.cols() != N || n < 1 || m < 1) {
        rep.precondition_ok = false;
        rep.precondition_message = "metric has inconsistent dimensions";
        return rep;
    }
    const double asym = max_abs(G - G.transpose());
    if (asym > 1e-12 * std::max(1.0, max_abs(G))) {
        rep.precondition_ok = false;
        rep.precondition_message = "metric is not symmetric (max asymmetry " + format_double(asym) + ")";
        return rep;
    }
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success) {
        rep.precondition_ok = false;
        rep.precondition_message = "metric is not positive definite";
        return rep;
    }
    const Matrix Gh = llt.solve(Matrix::Identity(N, N));
    const Matrix G11 = G.topLeftCorner(n, n), G12 = G.topRightCorner(n, m);
    const Matrix G21 = G.bottomLeftCorner(m, n), G22 = G.bottomRightCorner(m, m);
    const Matrix H11 = Gh.topLeftCorner(n, n), H12 = Gh.topRightCorner(n, m);
    const Matrix H21 = Gh.bottomLeftCorner(m, n), H22 = Gh.bottomRightCorner(m, m);

    const Matrix A = G11.llt().solve(Matrix::Identity(n, n));
    const Matrix K = -A * G12;
    const Matrix E_schur = G22 - G21 * A * G12;
    const Matrix E_inv = H22.llt().solve(Matrix::Identity(m, m));

    rep.residual_A = max_abs(A - (H11 - H12 * E_inv * H21));
    rep.residual_K = max_abs(K - H12 * E_inv);
    rep.residual_E = max_abs(E_schur - E_inv);
    rep.block_identities = {
        max_abs(H11 * G11 + H12 * G21 - Matrix::Identity(n, n)),
        max_abs(H22 * G22 + H21 * G12 - Matrix::Identity(m, m)),
        max_abs(H21 * G11 + H22 * G21),
        max_abs(G11 * H12 + G12 * H22),
    };
    rep.passed = rep.max_residual() <= tol;
    return rep;
}

IdentityReport crosscheck_identities(const MechanicalSpec& spec, const Vector& q, const Vector& u, double tol) {
    return crosscheck_identities(spec.metric(q, u), spec.n(), tol);
}

// ---------------------------------------------------------------- momenta

Momenta conjugate_momenta(const MechanicalSpec& spec, const Vector& q, const Vector& u, const Vector& qdot,
                          const Vector& udot) {
    const Matrix G = spec.metric(q, u);
    if (G.llt().info() != Eigen::Success)
        throw SingularMatrixError("metric G is not positive definite at " + point_string(q, u));
    Vector v(spec.n() + spec.m());
    v << qdot, udot;
    const Vector pe = G * v;
    return {pe.head(spec.n()), pe.tail(spec.m())};
}

std::pair<Vector, Vector> velocities_from_momenta(const MechanicalSpec& spec, const Vector& q, const Vector& u,
                                                  const Momenta& momenta) {
    const Matrix G = spec.metric(q, u);
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success)
        throw SingularMatrixError("metric G is not positive definite at " + point_string(q, u));
    Vector pe(spec.n() + spec.m());
    pe << momenta.p, momenta.eta;
    const Vector v = llt.solve(pe);
    return {v.head(spec.n()), v.tail(spec.m())};
}

Vector contract(const MatrixFamily& family, const Vector& a, const Vector& b) {
    Vector out(static_cast<Eigen::Index>(family.size()));
    for (std::size_t k = 0; k < family.size(); ++k) out[static_cast<Eigen::Index>(k)] = a.dot(family[k] * b);
    return out;
}

}  // namespace lagctl
