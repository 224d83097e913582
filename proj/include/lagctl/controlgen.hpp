#ifndef LAGCTL_CONTROLGEN_HPP
#define LAGCTL_CONTROLGEN_HPP

#include "lagctl/cone.hpp"
#include "lagctl/path.hpp"

#include <optional>

namespace lagctl {

/// Logarithmic slowdown of [0,T] onto [0,1].
class TimeRescaling {
public:
    explicit TimeRescaling(double T);

    double horizon() const noexcept { return T_; }
    double log_horizon() const noexcept { return L_; }  // ln(1+T)
    double alpha() const noexcept { return alpha_; }     // sqrt(ln(1+T))

    double psi(double t) const;
    double dpsi(double t) const;
    double ddpsi(double t) const;
    double inverse(double s) const;
    /// dpsi at inverse(s).
    double eta(double s) const;

private:
    double T_;
    double L_;
    double alpha_;
};

TimeRescaling rescale_time(double T);

/// Reference path (u*, w*) on s in [0,1]; w* vanishes on [0, eps0].
struct PathControl {
    PathPtr u_star;
    PathPtr w_star;
    double eps0 = 0.05;

    int dim() const { return u_star ? u_star->dim() : 0; }
    /// Dimensions agree, 0 < eps0 < 1 and w* is zero on [0, eps0].
    void validate() const;
};

/// w multiplied by a C2 cutoff that is 0 on [0, eps0] and 1 from 2 eps0 on.
PathPtr vanishing_start(PathPtr w, double eps0);

/// Serialized form of a PathControl.
struct PathSamples {
    std::vector<double> grid;
    std::vector<Vector> u;
    std::vector<Vector> w;
    double eps0 = 0.05;
};

PathSamples sample_path_control(const PathControl& path, const std::vector<double>& grid);
/// Cubic-spline reconstruction; w* is forced to zero on [0, eps0].
PathControl path_control_from_samples(const PathSamples& samples);

/// Time-domain control u(t) with its analytic derivative.
class ControlSignal {
public:
    virtual ~ControlSignal() = default;
    virtual int dim() const = 0;
    virtual Vector value(double t) const = 0;
    virtual Vector rate(double t) const = 0;
    virtual Vector value(double t, Side) const { return value(t); }
    virtual Vector rate(double t, Side) const { return rate(t); }
    /// Fastest oscillation frequency, when the control carries one.
    virtual std::optional<double> frequency() const { return std::nullopt; }
    virtual std::vector<double> breakpoints() const { return {}; }
};

using ControlPtr = std::shared_ptr<const ControlSignal>;

/// A Path used directly as a function of time.
class PathSignal final : public ControlSignal {
public:
    explicit PathSignal(PathPtr path) : path_(std::move(path)) {}
    int dim() const override { return path_->dim(); }
    Vector value(double t) const override { return path_->value(t); }
    Vector rate(double t) const override { return path_->derivative(t); }
    Vector value(double t, Side side) const override { return path_->value(t, side); }
    Vector rate(double t, Side side) const override { return path_->derivative(t, side); }
    std::vector<double> breakpoints() const override { return path_->breakpoints(); }

private:
    PathPtr path_;
};

/// u(t) = u*(psi) + a psi'(t) sin(omega t) w*(psi) with a = sqrt(2) alpha / omega,
/// which is sqrt(2)/alpha^2 at the default omega = alpha^3.
class VibrationalControl final : public ControlSignal {
public:
    VibrationalControl(PathControl path, TimeRescaling rescaling, std::optional<double> omega = std::nullopt);

    int dim() const override { return path_.dim(); }
    Vector value(double t) const override { return value(t, Side::Right); }
    Vector rate(double t) const override { return rate(t, Side::Right); }
    Vector value(double t, Side side) const override;
    Vector rate(double t, Side side) const override;
    std::optional<double> frequency() const override { return omega_; }
    std::vector<double> breakpoints() const override;

    const PathControl& path() const noexcept { return path_; }
    const TimeRescaling& rescaling() const noexcept { return rescaling_; }
    double omega() const noexcept { return omega_; }
    double amplitude() const noexcept { return amplitude_; }

private:
    PathControl path_;
    TimeRescaling rescaling_;
    double omega_;
    double amplitude_;
};

std::shared_ptr<const VibrationalControl> synthesize_vibrational(const PathControl& path, double T,
                                                                 std::optional<double> freq_override = std::nullopt);

/// Rows (t, u, udot) on a uniform grid of `points` samples of [0, T].
Matrix tabulate_control(const ControlSignal& control, double T, std::size_t points);

// ------------------------------------------------------------ families

/// lambda-parameterized reference paths; lambda has n + m components.
class PathFamily {
public:
    virtual ~PathFamily() = default;
    virtual int n() const = 0;
    virtual int m() const = 0;
    int dim() const { return n() + m(); }
    /// Throws ValidationError when lambda is outside the parameter set.
    virtual PathControl member(const Vector& lambda) const = 0;
};

using FamilyPtr = std::shared_ptr<const PathFamily>;

/// u^lambda = u* + s lambda_u,  w^lambda = sum_k sqrt(max(0, 1 + lambda_k)) w_k,
/// where the profiles w_k sum to the nominal w* (one profile, w* itself, when n = 1).
class AmplitudeFamily final : public PathFamily {
public:
    AmplitudeFamily(PathControl base, int n, std::vector<PathPtr> profiles = {}, double radius = 10.0);
    int n() const override { return n_; }
    int m() const override { return base_.dim(); }
    PathControl member(const Vector& lambda) const override;

private:
    PathControl base_;
    int n_;
    std::vector<PathPtr> profiles_;
    double radius_;
};

std::shared_ptr<const VibrationalControl> synthesize_family(const Vector& lambda, const PathFamily& family, double T,
                                                            std::optional<double> freq_override = std::nullopt);

// ------------------------------------------------------------ construction pipeline

/// Result of the piecewise time change that bounds |du/dt| + |gamma|.
struct Reparametrized {
    PathPtr u;
    PathPtr gamma;
    PathPtr s_of_tau;            // original parameter as a function of the new one
    std::vector<double> knots;   // i / N
    std::vector<double> bounds;  // N * integral of (|u'| + |gamma| + 1/N) per subinterval
};

/// Rescales each [(i-1)/N, i/N] onto itself with density proportional to
/// |u'| + |gamma| + 1/N.
Reparametrized reparametrize_bounded(PathPtr u, PathPtr gamma, int N, int resolution = 256);

struct PiecewiseControls {
    std::shared_ptr<const LinearPath> u;  // interpolates u* at j/k
    std::shared_ptr<const StepPath> w;    // constant on each of the k nu slots
};

/// Slot construction: on slot l of [j/k, (j+1)/k] the vibration is
/// sqrt(k nu  integral |gamma| theta_l) w_l, with theta selected for
/// gamma/|gamma| at (q(s), u*(s)); theta is uniform where gamma = 0.
PiecewiseControls piecewise_controls(PathPtr u_star, PathPtr gamma, PathPtr q, const ReducedDynamics& dyn,
                                     const Dictionary& dict, int k, int quadrature_panels = 4);

}  // namespace lagctl

#endif  // LAGCTL_CONTROLGEN_HPP
