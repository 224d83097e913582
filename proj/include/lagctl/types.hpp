#ifndef LAGCTL_TYPES_HPP
#define LAGCTL_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace lagctl {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;
using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// Which one-sided limit to take at a breakpoint.
enum class Side { Left, Right };

/// One matrix per free coordinate k (e.g. dA/dq^k).
using MatrixFamily = std::vector<Matrix>;

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed user input: expressions, configuration files, dimensions.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Syntax error in an expression; `offset` is the 0-based character position.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t offset)
        : ValidationError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Numerical failure: domain violations, singular matrices, integrator breakdown.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularMatrixError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, double t, Vector state)
        : NumericalError(what + " at t=" + std::to_string(t)), t_(t), state_(std::move(state)) {}
    double time() const noexcept { return t_; }
    const Vector& state() const noexcept { return state_; }

private:
    double t_;
    Vector state_;
};

std::string format_vector(const Vector& v);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

}  // namespace lagctl

#endif  // LAGCTL_TYPES_HPP
