#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lmfg/errors.hpp"
#include "lmfg/grid.hpp"
#include "support/oracles.hpp"

using namespace lmfg;

TEST_CASE("space grid") {
    const SpaceGrid g{-1.0, 1.0, 21};
    CHECK(g.dx() == doctest::Approx(0.1));
    CHECK(g.x(20) == doctest::Approx(1.0));
    CHECK(g.nodes().size() == 21);
    CHECK_NOTHROW(g.validate());
    CHECK_THROWS_AS((SpaceGrid{0.0, 1.0, 7}).validate(), DomainError);
    CHECK_THROWS_AS((SpaceGrid{1.0, 1.0, 10}).validate(), DomainError);
}

TEST_CASE("time grid tiling") {
    const Grid1D g = Grid1D::make(0.0, 1.0, 11, 0.0, 2.0, 0.01);
    CHECK(g.time.nt == 200);
    CHECK(g.time.dt() * g.time.nt == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g.time.t(200) == 2.0);
    CHECK_THROWS_AS(Grid1D::make(0.0, 1.0, 11, 0.0, 1.0, 0.3), DomainError);
    CHECK_THROWS_AS(Grid1D::make(0.0, 1.0, 11, 0.0, 1.0, 0.0), DomainError);
    const Grid1D empty = Grid1D::make(0.0, 1.0, 11, 0.0, 0.0, 0.1);
    CHECK(empty.time.nt == 0);
}

TEST_CASE("profiles and fields") {
    const SpaceGrid g{0.0, 1.0, 11};
    CHECK_THROWS_AS(Profile(g, std::vector<double>(5, 0.0)), GridMismatch);
    SpaceTimeField f(Grid1D::make(0.0, 1.0, 11, 0.0, 1.0, 0.5), 0.0);
    CHECK(f.slices() == 3);
    f.set_slice(2, Profile(g, 3.0));
    CHECK(f.profile(2)[10] == 3.0);
    CHECK(f.profile(1)[10] == 0.0);
    CHECK(f.all_finite());
    CHECK_THROWS_AS(require_same_grid(g, SpaceGrid{0.0, 2.0, 11}, "test"), GridMismatch);
}

TEST_CASE("linear interpolation examples") {
    const SpaceGrid g{0.0, 1.0, 11};
    const Profile line = Profile::sample(g, [](double x) { return 1.0 - x; });
    CHECK(interp_linear(line, g.x(4)) == line[4]);
    CHECK(interp_linear(line, 0.3) == doctest::Approx(0.7).epsilon(1e-14));
    Profile step(g, 0.0);
    step[6] = 1.0;
    CHECK(interp_linear(step, 0.55) == doctest::Approx(0.5));
    CHECK_THROWS_AS(interp_linear(line, 1.01), DomainError);
    CHECK_THROWS_AS(interp_linear(line, -0.01), DomainError);
}

TEST_CASE("interpolation preserves monotonicity") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const SpaceGrid g{-2.0, 3.0, 17};
    for (int rep = 0; rep < 20; ++rep) {
        Profile p(g);
        double v = 1.0;
        for (auto& x : p.values) x = v -= 0.05 * u(gen);
        double prev = interp_linear(p, g.x_min);
        for (int i = 1; i <= 1000; ++i) {
            const double cur = interp_linear(p, g.x_min + i * (g.x_max - g.x_min) / 1000.0);
            CHECK(cur <= prev);
            prev = cur;
        }
    }
}

TEST_CASE("tridiagonal examples") {
    const std::vector<double> id_diag(4, 1.0), zeros(3, 0.0), rhs{1.5, -2.0, 7.0, 0.25};
    CHECK(solve_tridiagonal(zeros, id_diag, zeros, rhs) == rhs);

    const std::vector<double> off(2, -1.0), diag(3, 2.0), r{1.0, 0.0, 1.0};
    const auto x = solve_tridiagonal(off, diag, off, r);
    for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("tridiagonal solve agrees with dense elimination") {
    std::mt19937_64 gen(1234);
    for (std::size_t n = 2; n <= 16; ++n)
        for (int rep = 0; rep < 25; ++rep) {
            const auto sys = oracle::random_tridiagonal(n, gen);
            const auto got = solve_tridiagonal(sys.lower, sys.diag, sys.upper, sys.rhs);
            const auto want = oracle::dense_solve(sys.dense(), sys.rhs);
            CHECK(oracle::max_rel_error(got, want) < 1e-10);

            // residual ||Ax - b|| <= 1e-10 ||b||
            double res = 0.0, bmax = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double ax = sys.diag[i] * got[i];
                if (i > 0) ax += sys.lower[i - 1] * got[i - 1];
                if (i + 1 < n) ax += sys.upper[i] * got[i + 1];
                res = std::max(res, std::abs(ax - sys.rhs[i]));
                bmax = std::max(bmax, std::abs(sys.rhs[i]));
            }
            CHECK(res <= 1e-10 * bmax);
        }
}

TEST_CASE("factorization is reusable") {
    std::mt19937_64 gen(77);
    const auto sys = oracle::random_tridiagonal(12, gen);
    const TridiagonalLU lu(sys.lower, sys.diag, sys.upper);
    for (int rep = 0; rep < 3; ++rep) {
        const auto other = oracle::random_tridiagonal(12, gen);
        std::vector<double> x = other.rhs;
        lu.solve_in_place(x);
        CHECK(oracle::max_rel_error(x, oracle::dense_solve(sys.dense(), other.rhs)) < 1e-10);
    }
}

TEST_CASE("zero pivot is reported") {
    const std::vector<double> off{1.0}, diag{0.0, 1.0}, rhs{1.0, 1.0};
    CHECK_THROWS_AS(solve_tridiagonal(off, diag, off, rhs), SingularSystem);
    const std::vector<double> off2{1.0}, diag2{1.0, 1.0};  // second pivot 1 - 1 = 0
    CHECK_THROWS_AS(solve_tridiagonal(off2, diag2, off2, rhs), SingularSystem);
    CHECK_THROWS_AS(solve_tridiagonal(off, std::vector<double>{1.0, 1.0, 1.0}, off, rhs), DomainError);
}
