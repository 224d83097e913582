#ifndef LAGCTL_PATH_HPP
#define LAGCTL_PATH_HPP

#include "lagctl/expr.hpp"
#include "lagctl/types.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace lagctl {

/// Vector-valued function of one real parameter with its derivative.
/// Breakpoints are the interior points where the value or the derivative may
/// jump; integrators restart there.
class Path {
public:
    virtual ~Path() = default;
    virtual int dim() const = 0;
    virtual Vector value(double s) const = 0;
    virtual Vector derivative(double s) const = 0;
    virtual Vector value(double s, Side) const { return value(s); }
    virtual Vector derivative(double s, Side) const { return derivative(s); }
    virtual std::vector<double> breakpoints() const { return {}; }
};

using PathPtr = std::shared_ptr<const Path>;

/// Piecewise-affine interpolant of samples on an increasing grid, held
/// constant outside the grid.
class LinearPath final : public Path {
public:
    LinearPath(std::vector<double> grid, std::vector<Vector> samples);
    int dim() const override { return dim_; }
    Vector value(double s) const override;
    Vector derivative(double s) const override { return derivative(s, Side::Right); }
    Vector derivative(double s, Side side) const override;
    std::vector<double> breakpoints() const override { return grid_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<Vector>& samples() const { return samples_; }

private:
    std::size_t interval(double s, Side side) const;
    std::vector<double> grid_;
    std::vector<Vector> samples_;
    int dim_;
};

/// Piecewise-constant path: values[i] on (edges[i], edges[i+1]]. Outside the
/// edges the first/last value is used.
class StepPath final : public Path {
public:
    StepPath(std::vector<double> edges, std::vector<Vector> values);
    int dim() const override { return dim_; }
    Vector value(double s) const override { return value(s, Side::Left); }
    Vector value(double s, Side side) const override;
    Vector derivative(double) const override { return Vector::Zero(dim_); }
    std::vector<double> breakpoints() const override { return edges_; }
    const std::vector<double>& edges() const { return edges_; }
    const std::vector<Vector>& values() const { return values_; }

private:
    std::vector<double> edges_;
    std::vector<Vector> values_;
    int dim_;
};

/// Natural cubic spline through samples (C2), constant outside the grid.
class SplinePath final : public Path {
public:
    SplinePath(std::vector<double> grid, std::vector<Vector> samples);
    int dim() const override { return static_cast<int>(samples_.cols()); }
    Vector value(double s) const override;
    Vector derivative(double s) const override;

private:
    std::size_t interval(double s) const;
    std::vector<double> grid_;
    Matrix samples_;  // row i = sample at grid_[i]
    Matrix second_;   // second derivatives at the knots
};

/// Path given by closures.
class FunctionPath final : public Path {
public:
    using Fn = std::function<Vector(double)>;
    FunctionPath(int dim, Fn value, Fn derivative, std::vector<double> breakpoints = {});
    int dim() const override { return dim_; }
    Vector value(double s) const override { return value_(s); }
    Vector derivative(double s) const override { return derivative_(s); }
    std::vector<double> breakpoints() const override { return breakpoints_; }

private:
    int dim_;
    Fn value_;
    Fn derivative_;
    std::vector<double> breakpoints_;
};

/// Components given as expressions in one variable; derivatives are symbolic.
class ExpressionPath final : public Path {
public:
    /// `vars` must contain `variable`; remaining slots are bound from `params`.
    ExpressionPath(const std::vector<Expr>& components, const SymbolTable& vars, const std::string& variable,
                   const std::map<std::string, double>& params);
    int dim() const override { return static_cast<int>(value_.size()); }
    Vector value(double s) const override;
    Vector derivative(double s) const override;

private:
    std::vector<CompiledExpr> value_;
    std::vector<CompiledExpr> derivative_;
    std::vector<double> slots_;
    std::size_t slot_;
};

/// Convolution with the normalized kernel (1 - (x/rho)^2)^3 on [-rho, rho],
/// the input being extended constantly outside [lo, hi].
class MollifiedPath final : public Path {
public:
    MollifiedPath(PathPtr base, double rho, double lo = 0.0, double hi = 1.0);
    int dim() const override { return base_->dim(); }
    Vector value(double s) const override;
    Vector derivative(double s) const override;
    double radius() const { return rho_; }

private:
    template <typename Kernel>
    Vector convolve(double s, Kernel kernel) const;
    PathPtr base_;
    double rho_;
    double lo_;
    double hi_;
    std::vector<double> base_breaks_;
};

PathPtr mollify(PathPtr f, double rho);

/// Samples a path on a grid (one column per grid point).
Matrix sample_path(const Path& path, const std::vector<double>& grid);

/// Breakpoints of several paths, merged, sorted and restricted to (lo, hi).
std::vector<double> merged_breakpoints(const std::vector<const Path*>& paths, double lo, double hi);

}  // namespace lagctl

#endif  // LAGCTL_PATH_HPP
