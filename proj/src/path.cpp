#include "lagctl/path.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace lagctl {

namespace {

void check_grid(const std::vector<double>& grid, std::size_t samples, const char* what) {
    if (grid.size() < 2) throw ValidationError(std::string(what) + " needs at least two grid points");
    if (grid.size() != samples) throw ValidationError(std::string(what) + ": grid and samples differ in length");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ValidationError(std::string(what) + ": grid must be strictly increasing");
}

int common_dim(const std::vector<Vector>& v, const char* what) {
    const auto d = v.front().size();
    for (const auto& x : v)
        if (x.size() != d) throw ValidationError(std::string(what) + ": samples differ in dimension");
    return static_cast<int>(d);
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 8> kNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                          -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                          0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                            0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                            0.2223810344533745, 0.1012285362903763};

// Normalization of (1 - x^2)^3 on [-1, 1]: integral is 32/35.
constexpr double kKernelMass = 35.0 / 32.0;

}  // namespace

// ------------------------------------------------------------ LinearPath

LinearPath::LinearPath(std::vector<double> grid, std::vector<Vector> samples)
    : grid_(std::move(grid)), samples_(std::move(samples)) {
    check_grid(grid_, samples_.size(), "piecewise-affine path");
    dim_ = common_dim(samples_, "piecewise-affine path");
}

std::size_t LinearPath::interval(double s, Side side) const {
    // Index i with s in [grid[i], grid[i+1]]; at a knot the side picks the interval.
    auto it = side == Side::Right ? std::upper_bound(grid_.begin(), grid_.end(), s)
                                  : std::lower_bound(grid_.begin(), grid_.end(), s);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - grid_.begin(), 1)) - 1;
    return std::min(i, grid_.size() - 2);
}

Vector LinearPath::value(double s) const {
    if (s <= grid_.front()) return samples_.front();
    if (s >= grid_.back()) return samples_.back();
    const std::size_t i = interval(s, Side::Right);
    const double x = (s - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return (1.0 - x) * samples_[i] + x * samples_[i + 1];
}

Vector LinearPath::derivative(double s, Side side) const {
    if (s < grid_.front() || s > grid_.back()) return Vector::Zero(dim_);
    if (s == grid_.front() && side == Side::Left) return Vector::Zero(dim_);
    if (s == grid_.back() && side == Side::Right) return Vector::Zero(dim_);
    const std::size_t i = interval(s, side);
    return (samples_[i + 1] - samples_[i]) / (grid_[i + 1] - grid_[i]);
}

// ------------------------------------------------------------ StepPath

StepPath::StepPath(std::vector<double> edges, std::vector<Vector> values)
    : edges_(std::move(edges)), values_(std::move(values)) {
    if (values_.empty() || edges_.size() != values_.size() + 1)
        throw ValidationError("piecewise-constant path needs one more edge than values");
    for (std::size_t i = 1; i < edges_.size(); ++i)
        if (!(edges_[i] > edges_[i - 1])) throw ValidationError("piecewise-constant path: edges must increase");
    dim_ = common_dim(values_, "piecewise-constant path");
}

Vector StepPath::value(double s, Side side) const {
    if (s <= edges_.front()) return values_.front();
    if (s >= edges_.back()) return values_.back();
    // Slot i is (edges[i], edges[i+1]]; Side::Right at an edge selects the next slot.
    auto it = side == Side::Left ? std::lower_bound(edges_.begin(), edges_.end(), s)
                                 : std::upper_bound(edges_.begin(), edges_.end(), s);
    const auto i = static_cast<std::size_t>(it - edges_.begin()) - 1;
    return values_[std::min(i, values_.size() - 1)];
}

// ------------------------------------------------------------ SplinePath

SplinePath::SplinePath(std::vector<double> grid, std::vector<Vector> samples) : grid_(std::move(grid)) {
    check_grid(grid_, samples.size(), "spline path");
    const int d = common_dim(samples, "spline path");
    const auto N = static_cast<Index>(grid_.size());
    samples_.resize(N, d);
    for (Index i = 0; i < N; ++i) samples_.row(i) = samples[static_cast<std::size_t>(i)].transpose();

    // Natural end conditions; tridiagonal solve for the knot second derivatives.
    second_ = Matrix::Zero(N, d);
    if (N > 2) {
        const Index M = N - 2;
        Vector sub(M), diag(M), sup(M);
        Matrix rhs(M, d);
        for (Index i = 1; i <= M; ++i) {
            const double h0 = grid_[i] - grid_[i - 1];
            const double h1 = grid_[i + 1] - grid_[i];
            sub[i - 1] = h0;
            diag[i - 1] = 2.0 * (h0 + h1);
            sup[i - 1] = h1;
            rhs.row(i - 1) = 6.0 * ((samples_.row(i + 1) - samples_.row(i)) / h1 -
                                    (samples_.row(i) - samples_.row(i - 1)) / h0);
        }
        for (Index i = 1; i < M; ++i) {
            const double f = sub[i] / diag[i - 1];
            diag[i] -= f * sup[i - 1];
            rhs.row(i) -= f * rhs.row(i - 1);
        }
        second_.row(M) = rhs.row(M - 1) / diag[M - 1];
        for (Index i = M - 2; i >= 0; --i) second_.row(i + 1) = (rhs.row(i) - sup[i] * second_.row(i + 2)) / diag[i];
    }
}

std::size_t SplinePath::interval(double s) const {
    auto it = std::upper_bound(grid_.begin(), grid_.end(), s);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - grid_.begin(), 1)) - 1;
    return std::min(i, grid_.size() - 2);
}

Vector SplinePath::value(double s) const {
    if (s <= grid_.front()) return samples_.row(0).transpose();
    if (s >= grid_.back()) return samples_.row(samples_.rows() - 1).transpose();
    const auto i = interval(s);
    const double h = grid_[i + 1] - grid_[i];
    const double a = (grid_[i + 1] - s) / h;
    const double b = (s - grid_[i]) / h;
    const auto I = static_cast<Index>(i);
    return (a * samples_.row(I) + b * samples_.row(I + 1) +
            ((a * a * a - a) * second_.row(I) + (b * b * b - b) * second_.row(I + 1)) * (h * h / 6.0))
        .transpose();
}

Vector SplinePath::derivative(double s) const {
    if (s < grid_.front() || s > grid_.back()) return Vector::Zero(samples_.cols());
    const auto i = interval(s);
    const double h = grid_[i + 1] - grid_[i];
    const double a = (grid_[i + 1] - s) / h;
    const double b = (s - grid_[i]) / h;
    const auto I = static_cast<Index>(i);
    return ((samples_.row(I + 1) - samples_.row(I)) / h +
            (-(3 * a * a - 1) * second_.row(I) + (3 * b * b - 1) * second_.row(I + 1)) * (h / 6.0))
        .transpose();
}

// ------------------------------------------------------------ FunctionPath

FunctionPath::FunctionPath(int dim, Fn value, Fn derivative, std::vector<double> breakpoints)
    : dim_(dim), value_(std::move(value)), derivative_(std::move(derivative)), breakpoints_(std::move(breakpoints)) {
    if (dim < 1) throw ValidationError("path dimension must be positive");
}

// ------------------------------------------------------------ ExpressionPath

ExpressionPath::ExpressionPath(const std::vector<Expr>& components, const SymbolTable& vars,
                               const std::string& variable, const std::map<std::string, double>& params)
    : slots_(vars.size(), 0.0), slot_(vars.slot(variable)) {
    if (components.empty()) throw ValidationError("expression path has no components");
    for (std::size_t s = 0; s < vars.size(); ++s) {
        if (s == slot_) continue;
        auto it = params.find(vars.name(s));
        if (it == params.end()) throw ValidationError("path expression uses unbound symbol '" + vars.name(s) + "'");
        slots_[s] = it->second;
    }
    for (const auto& e : components) {
        value_.emplace_back(e);
        derivative_.emplace_back(differentiate(e, slot_));
    }
}

Vector ExpressionPath::value(double s) const {
    auto slots = slots_;
    slots[slot_] = s;
    Vector out(static_cast<Index>(value_.size()));
    for (std::size_t i = 0; i < value_.size(); ++i) out[static_cast<Index>(i)] = value_[i](slots);
    return out;
}

Vector ExpressionPath::derivative(double s) const {
    auto slots = slots_;
    slots[slot_] = s;
    Vector out(static_cast<Index>(derivative_.size()));
    for (std::size_t i = 0; i < derivative_.size(); ++i) out[static_cast<Index>(i)] = derivative_[i](slots);
    return out;
}

// ------------------------------------------------------------ MollifiedPath

MollifiedPath::MollifiedPath(PathPtr base, double rho, double lo, double hi)
    : base_(std::move(base)), rho_(rho), lo_(lo), hi_(hi) {
    if (!base_) throw ValidationError("mollify: null path");
    if (!(rho > 0.0)) throw ValidationError("mollification radius must be positive");
    if (!(hi > lo)) throw ValidationError("mollify: empty extension interval");
    base_breaks_ = base_->breakpoints();
    base_breaks_.push_back(lo_);
    base_breaks_.push_back(hi_);
    std::sort(base_breaks_.begin(), base_breaks_.end());
    base_breaks_.erase(std::unique(base_breaks_.begin(), base_breaks_.end()), base_breaks_.end());
}

template <typename Kernel>
Vector MollifiedPath::convolve(double s, Kernel kernel) const {
    // Split [s - rho, s + rho] at every kink of the extended input and into
    // four pieces; 8-point Gauss is exact for polynomial pieces up to degree 15.
    std::vector<double> cuts = {s - rho_, s + rho_};
    for (int k = 1; k < 4; ++k) cuts.push_back(s - rho_ + 0.5 * rho_ * k);
    auto first = std::upper_bound(base_breaks_.begin(), base_breaks_.end(), s - rho_);
    for (auto it = first; it != base_breaks_.end() && *it < s + rho_; ++it) cuts.push_back(*it);
    std::sort(cuts.begin(), cuts.end());

    Vector acc = Vector::Zero(base_->dim());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (!(b > a)) continue;
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t g = 0; g < kNodes.size(); ++g) {
            const double sigma = mid + half * kNodes[g];
            const double x = std::clamp(sigma, lo_, hi_);
            acc += (kWeights[g] * half * kernel((s - sigma) / rho_)) * base_->value(x);
        }
    }
    return acc;
}

Vector MollifiedPath::value(double s) const {
    return convolve(s, [this](double x) {
        const double t = 1.0 - x * x;
        return kKernelMass / rho_ * t * t * t;
    });
}

Vector MollifiedPath::derivative(double s) const {
    // d/ds of phi((s - sigma)/rho)/rho.
    return convolve(s, [this](double x) {
        const double t = 1.0 - x * x;
        return kKernelMass / (rho_ * rho_) * (-6.0 * x) * t * t;
    });
}

PathPtr mollify(PathPtr f, double rho) { return std::make_shared<MollifiedPath>(std::move(f), rho); }

// ------------------------------------------------------------ helpers

Matrix sample_path(const Path& path, const std::vector<double>& grid) {
    Matrix out(path.dim(), static_cast<Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) out.col(static_cast<Index>(i)) = path.value(grid[i]);
    return out;
}

std::vector<double> merged_breakpoints(const std::vector<const Path*>& paths, double lo, double hi) {
    const double a = std::min(lo, hi);
    const double b = std::max(lo, hi);
    std::vector<double> out;
    for (const Path* p : paths) {
        if (!p) continue;
        for (double x : p->breakpoints())
            if (x > a && x < b) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace lagctl
