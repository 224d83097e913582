#ifndef LAGCTL_MODEL_HPP
#define LAGCTL_MODEL_HPP

#include "lagctl/expr.hpp"
#include "lagctl/types.hpp"

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace lagctl {

/// Kinetic-energy metric G(q,u) of a system with n free and m controlled
/// coordinates. Slots 0..n-1 of the symbol table are q, n..n+m-1 are u,
/// the remaining slots are parameters.
class MechanicalSpec {
public:
    /// `entries` is the full (n+m)x(n+m) matrix; symmetry is checked
    /// structurally after simplification.
    MechanicalSpec(int n, int m, SymbolTable symbols, std::map<std::string, double> params,
                   std::vector<std::vector<Expr>> entries);

    /// Builds the full matrix from upper-triangle entries keyed (i,j), 1-based.
    static MechanicalSpec from_upper(int n, int m, SymbolTable symbols, std::map<std::string, double> params,
                                     const std::map<std::pair<int, int>, Expr>& upper);

    int n() const noexcept { return n_; }
    int m() const noexcept { return m_; }
    const SymbolTable& symbols() const noexcept { return symbols_; }
    const std::map<std::string, double>& params() const noexcept { return params_; }
    const Expr& entry(int i, int j) const { return entries_.at(i).at(j); }

    /// Slot vector with q, u and parameter values filled in.
    std::vector<double> bind(const Vector& q, const Vector& u) const;

    Matrix metric(const Vector& q, const Vector& u) const;

private:
    int n_;
    int m_;
    SymbolTable symbols_;
    std::map<std::string, double> params_;
    std::vector<std::vector<Expr>> entries_;
};

/// A, K, E and the derivative families B^k = dA/dq^k, C^k = dK/dq^k,
/// D^k = 1/2 dE/dq^k at one point (q,u).
struct ReducedPoint {
    Matrix A;
    Matrix K;
    Matrix E;
    MatrixFamily B;
    MatrixFamily C;
    MatrixFamily D;
};

enum class Provenance { DerivedFromMetric, UserSupplied };

/// Pointwise evaluator of the reduced impulsive dynamics. Implementations are
/// pure and may be evaluated concurrently.
class ReducedDynamics {
public:
    virtual ~ReducedDynamics() = default;
    virtual int n() const = 0;
    virtual int m() const = 0;
    virtual Provenance provenance() const = 0;
    virtual ReducedPoint evaluate(const Vector& q, const Vector& u) const = 0;
};

using DynamicsPtr = std::shared_ptr<const ReducedDynamics>;

/// Reduction of a mechanical metric by block inversion and matrix calculus
/// on the symbolic derivatives of G. Checks SPD of G at every evaluation.
DynamicsPtr reduce(const MechanicalSpec& spec);

/// Dynamics given directly through A(q,u), K(q,u), E(q,u) expressions. B, C
/// and D are obtained by symbolic differentiation; no definiteness check.
class DirectDynamics final : public ReducedDynamics {
public:
    DirectDynamics(int n, int m, SymbolTable symbols, std::map<std::string, double> params,
                   std::vector<std::vector<Expr>> A, std::vector<std::vector<Expr>> K,
                   std::vector<std::vector<Expr>> E);

    int n() const override { return n_; }
    int m() const override { return m_; }
    Provenance provenance() const override { return Provenance::UserSupplied; }
    ReducedPoint evaluate(const Vector& q, const Vector& u) const override;

private:
    struct Block {
        int rows = 0;
        int cols = 0;
        std::vector<CompiledExpr> value;
        std::vector<std::vector<CompiledExpr>> dq;  // [k][i*cols+j]
    };
    static Block compile(const std::vector<std::vector<Expr>>& exprs, int rows, int cols, int n);
    static Matrix eval(const Block& b, std::span<const double> slots);
    static Matrix eval_dq(const Block& b, int k, std::span<const double> slots);

    int n_;
    int m_;
    SymbolTable symbols_;
    std::vector<double> base_slots_;
    Block A_;
    Block K_;
    Block E_;
};

/// Symbolic A, K, E, D for small n (cofactor inverse of G11).
struct SymbolicReduction {
    std::vector<std::vector<Expr>> A;
    std::vector<std::vector<Expr>> K;
    std::vector<std::vector<Expr>> E;
    std::vector<std::vector<std::vector<Expr>>> D;  // [k][a][b]
};

SymbolicReduction reduce_symbolic(const MechanicalSpec& spec);

/// Both derivations of (A, K, E) at one point plus the inverse-block identities.
struct IdentityReport {
    bool precondition_ok = true;
    std::string precondition_message;
    double residual_A = 0;  // |A - (Gh11 - Gh12 E Gh21)|
    double residual_K = 0;  // |K - Gh12 E|
    double residual_E = 0;  // |(G22 - G21 A G12) - Gh22^-1|
    std::vector<double> block_identities;  // four residuals of Gh*G = I written blockwise
    double tolerance = 0;
    bool passed = false;

    double max_residual() const;
};

IdentityReport crosscheck_identities(const Matrix& G, int n, double tol);
IdentityReport crosscheck_identities(const MechanicalSpec& spec, const Vector& q, const Vector& u, double tol);

struct Momenta {
    Vector p;    // free-coordinate momenta
    Vector eta;  // controlled-coordinate momenta
};

Momenta conjugate_momenta(const MechanicalSpec& spec, const Vector& q, const Vector& u, const Vector& qdot,
                          const Vector& udot);

/// Inverse relation (qdot; udot) = G^-1 (p; eta).
std::pair<Vector, Vector> velocities_from_momenta(const MechanicalSpec& spec, const Vector& q, const Vector& u,
                                                  const Momenta& momenta);

/// k-th component of pᵀ M^k p style contractions: out_k = aᵀ F[k] b.
Vector contract(const MatrixFamily& family, const Vector& a, const Vector& b);

}  // namespace lagctl

#endif  // LAGCTL_MODEL_HPP
