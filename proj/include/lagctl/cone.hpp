#ifndef LAGCTL_CONE_HPP
#define LAGCTL_CONE_HPP

#include "lagctl/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lagctl {

/// A(q,u) * (wᵀ D^k(q,u) w)_k.
Vector cone_generator(const ReducedPoint& point, const Vector& w);
Vector cone_generator(const ReducedDynamics& dyn, const Vector& q, const Vector& u, const Vector& w);

/// Fixed, ordered list of vibration directions w_1..w_nu.
struct Dictionary {
    std::vector<Vector> vectors;
    double epsilon = 0.0;  // tolerance the dictionary was built for
    std::string domain;    // free-text description of the sample set

    std::size_t size() const noexcept { return vectors.size(); }
};

/// One point (q,u,p) of the compact domain, p in the unit slice of the cone.
struct DomainSample {
    Vector q;
    Vector u;
    Vector p;
};

struct Selection {
    Vector theta;  // on the simplex
    double residual = 0.0;
};

struct ConicFit {
    Vector weights;  // nonnegative
    double distance = 0.0;
};

/// Columns are the dictionary generators evaluated at (q,u).
Matrix generator_matrix(const ReducedPoint& point, const Dictionary& dict);

/// argmin over the simplex of |target - G theta|. Active-set method; among
/// equal minimizers the support with the lowest indices is preferred.
Selection solve_simplex_least_squares(const Matrix& G, const Vector& target);

/// argmin over lambda >= 0 of |target - G lambda| (Lawson-Hanson).
ConicFit solve_nonnegative_least_squares(const Matrix& G, const Vector& target);

Selection select_coefficients(const ReducedDynamics& dyn, const Vector& q, const Vector& u, const Vector& p_unit,
                              const Dictionary& dict);

/// Distance from r to the conic hull of the dictionary generators at (q,u).
double cone_distance(const ReducedDynamics& dyn, const Vector& q, const Vector& u, const Vector& r,
                     const Dictionary& dict);
ConicFit cone_projection(const ReducedPoint& point, const Vector& r, const Dictionary& dict);

struct DictionaryOptions {
    std::size_t max_generators = 64;
    int directions = 64;  // candidate directions per half circle (m = 2) or per sphere (m >= 3)
};

/// Greedy cover of the samples: each sample gets generators added until its
/// simplex residual is <= eps/2; the result is verified at eps on all samples.
/// Throws NumericalError naming the worst sample when the budget is exhausted.
Dictionary build_dictionary(const ReducedDynamics& dyn, std::span<const DomainSample> samples, double eps,
                            const DictionaryOptions& options = {});

/// Deterministic candidate directions on the unit sphere of R^m (up to sign).
std::vector<Vector> candidate_directions(int m, int count);

struct SampleBox {
    Vector q_lo, q_hi;
    Vector u_lo, u_hi;
    double w_radius = 2.0;
};

/// Random (q,u) in the box and p in the unit slice, built as convex
/// combinations of normalized generator images g / max(1, |g|).
std::vector<DomainSample> sample_domain(const ReducedDynamics& dyn, const SampleBox& box, std::size_t count,
                                        std::uint64_t seed);

/// Point cloud approximating the unit slice {p in cone, |p| <= 1} at (q,u).
std::vector<Vector> unit_slice(const ReducedDynamics& dyn, const Vector& q, const Vector& u, int directions = 64,
                               int radial = 8);

double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b);

struct ContinuityProbe {
    std::vector<double> steps;
    std::vector<double> distances;
    bool jump = false;  // distance does not shrink with the step
};

/// Hausdorff distance between unit slices at (q,u) and (q,u) + h (dq,du) for
/// each h in `steps` (decreasing). Flags a jump when the distance at the
/// smallest step exceeds `threshold`.
ContinuityProbe probe_continuity(const ReducedDynamics& dyn, const Vector& q, const Vector& u, const Vector& dq,
                                 const Vector& du, const std::vector<double>& steps, double threshold = 0.1);

}  // namespace lagctl

#endif  // LAGCTL_CONE_HPP
