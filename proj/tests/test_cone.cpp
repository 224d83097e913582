#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lagctl/cone.hpp"

#include <cmath>
#include <random>

using namespace lagctl;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

std::shared_ptr<DirectDynamics> direct(int n, int m, const std::vector<std::vector<std::string>>& A,
                                       const std::vector<std::vector<std::string>>& K,
                                       const std::vector<std::vector<std::string>>& E) {
    auto vars = SymbolTable::mechanical(n, m, {});
    auto parse = [&](const std::vector<std::vector<std::string>>& t) {
        std::vector<std::vector<Expr>> out;
        for (const auto& row : t) {
            out.emplace_back();
            for (const auto& s : row) out.back().push_back(parse_expression(s, vars));
        }
        return out;
    };
    return std::make_shared<DirectDynamics>(n, m, vars, std::map<std::string, double>{}, parse(A), parse(K), parse(E));
}

auto bead() { return direct(1, 1, {{"1"}}, {{"0"}}, {{"q1^2"}}); }
auto example1() { return direct(1, 1, {{"q1^2"}}, {{"0"}}, {{"2*q1"}}); }
// Two generator rays that rotate with q1.
auto two_ray() {
    return direct(2, 2, {{"1 + 0.3*q1^2", "0.2"}, {"0.2", "1 + 0.1*u1^2"}}, {{"0", "0"}, {"0", "0"}},
                  {{"2*q1", "0"}, {"0", "2*q2"}});
}

}  // namespace

TEST_CASE("generator values") {
    CHECK(cone_generator(*bead(), vec({2.0}), vec({0.0}), vec({3.0}))[0] == 18.0);
    CHECK(cone_generator(*bead(), vec({2.0}), vec({0.0}), vec({0.0}))[0] == 0.0);
    CHECK(cone_generator(*example1(), vec({-1.0}), vec({0.0}), vec({2.0}))[0] == 4.0);
}

TEST_CASE("scaling law") {
    auto dyn = two_ray();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const Vector q = vec({U(rng), U(rng)}), u = vec({U(rng), U(rng)}), w = vec({U(rng), U(rng)});
        const double c = 4.0;
        const Vector g = cone_generator(*dyn, q, u, w);
        CHECK((cone_generator(*dyn, q, u, std::sqrt(c) * w) - c * g).cwiseAbs().maxCoeff() <= 1e-14 * (1 + g.norm()));
    }
}

TEST_CASE("simplex selection") {
    Matrix G(2, 3);
    G << 1, 0, 2, 0, 1, 2;
    SUBCASE("single generator") {
        const auto s = solve_simplex_least_squares(G.leftCols(1), G.col(0));
        CHECK(s.theta[0] == 1.0);
        CHECK(s.residual == 0.0);
    }
    SUBCASE("midpoint of two generators") {
        const auto s = solve_simplex_least_squares(G, 0.5 * (G.col(0) + G.col(1)));
        CHECK(s.residual <= 1e-10);
        CHECK(s.theta[0] == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(s.theta[1] == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(s.theta.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("outside the hull") {
        const auto s = solve_simplex_least_squares(G, vec({-1.0, -1.0}));
        CHECK(s.theta.minCoeff() >= 0.0);
        CHECK(s.theta.sum() == doctest::Approx(1.0).epsilon(1e-12));
        // Nearest hull point is the midpoint of e1, e2.
        CHECK(s.residual == doctest::Approx(std::sqrt(2 * 1.5 * 1.5)).epsilon(1e-12));
    }
    SUBCASE("random problems against brute-force enumeration") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        for (int trial = 0; trial < 30; ++trial) {
            Matrix H = Matrix::NullaryExpr(2, 4, [&] { return U(rng); });
            const Vector p = vec({U(rng), U(rng)});
            const auto s = solve_simplex_least_squares(H, p);
            double best = 1e300;
            const int N = 60;
            for (int a = 0; a <= N; ++a)
                for (int b = 0; a + b <= N; ++b)
                    for (int c = 0; a + b + c <= N; ++c) {
                        Vector th(4);
                        th << a, b, c, N - a - b - c;
                        best = std::min(best, (H * th / N - p).norm());
                    }
            CHECK(s.residual <= best + 1e-12);
            CHECK(s.residual >= best - 0.05);
        }
    }
}

TEST_CASE("bead selection outside the cone") {
    Dictionary dict;
    dict.vectors = {vec({0.0}), vec({1.0})};
    auto dyn = bead();
    const auto s = select_coefficients(*dyn, vec({1.0}), vec({0.0}), vec({-1.0}), dict);
    CHECK(s.residual == doctest::Approx(1.0));
    CHECK(s.theta[0] == doctest::Approx(1.0));
}

TEST_CASE("cone distance") {
    auto dyn = bead();
    Dictionary dict;
    dict.vectors = {vec({1.0})};
    CHECK(cone_distance(*dyn, vec({1.0}), vec({0.0}), vec({0.7}), dict) <= 1e-15);
    CHECK(cone_distance(*dyn, vec({1.0}), vec({0.0}), vec({-0.7}), dict) == doctest::Approx(0.7));

    auto two = two_ray();
    Dictionary d2;
    d2.vectors = {vec({1.0, 0.0}), vec({0.0, 1.0}), vec({0.6, 0.8})};
    const Vector q = vec({0.7, 1.2}), u = vec({0.3, -0.4});
    const Vector g1 = cone_generator(*two, q, u, d2.vectors[0]);
    const Vector g2 = cone_generator(*two, q, u, d2.vectors[1]);
    CHECK(cone_distance(*two, q, u, g1 + 2 * g2, d2) <= 1e-10);

    // 1-Lipschitz in r.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const Vector r1 = vec({U(rng), U(rng)}), r2 = vec({U(rng), U(rng)});
        const double d1 = cone_distance(*two, q, u, r1, d2);
        const double dd = cone_distance(*two, q, u, r2, d2);
        CHECK(std::abs(d1 - dd) <= (r1 - r2).norm() + 1e-12);
    }
}

TEST_CASE("bead dictionary") {
    auto dyn = bead();
    std::vector<DomainSample> samples;
    for (int i = 0; i <= 20; ++i) samples.push_back({vec({1.0 + 0.05 * i}), vec({0.0}), vec({i / 20.0})});
    const auto dict = build_dictionary(*dyn, samples, 1e-3);
    CHECK(dict.size() >= 1);
    // 1-D oracle: Γ₁ = [0,1] at every r >= 1 is reachable by the hull of {0, r w²}.
    for (const auto& s : samples)
        CHECK(select_coefficients(*dyn, s.q, s.u, s.p, dict).residual <= 1e-3);
}

TEST_CASE("single-sample dictionary reproduces its own generator") {
    auto dyn = two_ray();
    const Vector q = vec({0.5, 0.8}), u = vec({0.2, 0.1});
    const Vector g = cone_generator(*dyn, q, u, vec({1.0, 0.0}));
    const std::vector<DomainSample> samples = {{q, u, g / g.norm()}};
    const auto dict = build_dictionary(*dyn, samples, 1e-6);
    CHECK(select_coefficients(*dyn, q, u, g / g.norm(), dict).residual <= 1e-12);
}

TEST_CASE("budget exhaustion names the worst sample") {
    auto dyn = bead();
    const std::vector<DomainSample> samples = {{vec({1.0}), vec({0.0}), vec({-1.0})}};
    CHECK_THROWS_WITH_AS(build_dictionary(*dyn, samples, 1e-3), doctest::Contains("p=(-1)"), NumericalError);
}

TEST_CASE("two-ray dictionary covers resampled points") {
    auto dyn = two_ray();
    SampleBox box{vec({0.5, 0.5}), vec({1.5, 1.5}), vec({-1.0, -1.0}), vec({1.0, 1.0}), 2.0};
    const auto train = sample_domain(*dyn, box, 200, 1);
    const auto dict = build_dictionary(*dyn, train, 1e-2);
    CHECK(dict.size() >= 3);
    for (const auto& s : sample_domain(*dyn, box, 200, 2))
        CHECK(select_coefficients(*dyn, s.q, s.u, s.p, dict).residual <= 2e-2);
}

TEST_CASE("continuity probe") {
    const std::vector<double> steps = {1e-1, 1e-2, 1e-3, 1e-4};
    const auto smooth = probe_continuity(*bead(), vec({1.0}), vec({0.0}), vec({1.0}), vec({0.0}), steps);
    CHECK(!smooth.jump);
    CHECK(smooth.distances.back() <= 1e-12);

    const auto jump = probe_continuity(*example1(), vec({0.0}), vec({0.0}), vec({1.0}), vec({0.0}), steps);
    CHECK(jump.jump);
    CHECK(jump.distances.back() == doctest::Approx(1.0));

    CHECK(hausdorff_distance({vec({0.0})}, {vec({0.0}), vec({1.0})}) == 1.0);
}
