#include <doctest.h>

#include <cmath>
#include <random>

#include "lmfg/analysis.hpp"
#include "lmfg/errors.hpp"
#include "lmfg/mfg.hpp"

using namespace lmfg;

namespace {

ModelParams lottery() {
    ModelParams p;
    p.kappa = 1.0;
    p.rho = 2.0;
    p.alpha1 = 0.25;
    p.k = 0.5;
    return p;
}

struct NashCase {
    Grid1D grid;
    Profile F0;
    TerminalCondition wT;
};

// Lottery parameters over T = 40; terminal logistic centred on the intrinsic
// learning front at T.
const NashCase& nash_case() {
    static const NashCase c = [] {
        const auto p = lottery();
        NashCase out{Grid1D::make(-20.0, 100.0, 1201, 0.0, 40.0, 0.02), {}, {}};
        out.F0 = ramp_front(out.grid.space, 1.0);
        SpaceTimeField F;
        intrinsic_strategy(out.F0, p, out.grid, &F);
        const double e = learning_front(intrinsic_J(F.profile(out.grid.time.nt), p), p);
        out.wT = TerminalCondition::logistic(e, 1.0);
        return out;
    }();
    return c;
}

const MfgSolution& nash(double theta) {
    static const MfgSolution half = [] {
        const auto& c = nash_case();
        return solve_nash(c.F0, c.wT, lottery(), c.grid, {0.5, 1e-6, 50});
    }();
    static const MfgSolution quarter = [] {
        const auto& c = nash_case();
        return solve_nash(c.F0, c.wT, lottery(), c.grid, {0.25, 1e-7, 120});
    }();
    return theta == 0.5 ? half : quarter;
}

}  // namespace

TEST_CASE("best response examples") {
    const auto grid = Grid1D::make(0.0, 40.0, 4001, 0.0, 0.0, 1.0);
    ModelParams p = lottery();
    p.alpha1 = 0.5;  // I_c = 4

    SpaceTimeField F(grid), w(grid);
    F.set_slice(0, Profile::sample(grid.space, [](double y) { return std::exp(-2.0 * y); }));
    for (double v : best_response(F, w, p).values) CHECK(v == 0.0);  // w = 0

    SpaceTimeField one(grid, 1.0);
    for (double v : best_response(SpaceTimeField(grid, 0.0), one, p).values) CHECK(v == 0.0);

    const SpaceTimeField s = best_response(F, one, p);
    CHECK(s.values[0] == doctest::Approx(0.0625).epsilon(1e-3));
    for (std::size_t i = 0; i + 1 < s.values.size(); ++i) CHECK(s.values[i + 1] <= s.values[i]);

    const auto other = Grid1D::make(0.0, 41.0, 4001, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(best_response(F, SpaceTimeField(other, 1.0), p), GridMismatch);
}

TEST_CASE("residual") {
    const auto grid = Grid1D::make(0.0, 1.0, 11, 0.0, 1.0, 0.25);
    SpaceTimeField a(grid, 0.2), b(grid, 0.2);
    CHECK(residual(a, b) == 0.0);
    b.slice(3)[7] = 0.5;
    CHECK(residual(a, b) == doctest::Approx(0.3));

    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        for (double& v : a.values) v = u(gen);
        for (double& v : b.values) v = u(gen);
        double brute = 0.0;
        for (std::size_t n = 0; n < a.slices(); ++n)
            for (std::size_t i = 0; i < grid.space.nx; ++i)
                brute = std::max(brute, std::abs(a.slice(n)[i] - b.slice(n)[i]));
        CHECK(residual(a, b) == brute);
    }
    const auto other = Grid1D::make(0.0, 1.0, 11, 0.0, 1.0, 0.5);
    CHECK_THROWS_AS(residual(a, SpaceTimeField(other)), GridMismatch);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS((MfgConfig{0.0, 1e-6, 10}).validate(), DomainError);
    CHECK_THROWS_AS((MfgConfig{1.5, 1e-6, 10}).validate(), DomainError);
    CHECK_THROWS_AS((MfgConfig{0.5, 0.0, 10}).validate(), DomainError);
    CHECK_THROWS_AS((MfgConfig{0.5, 1e-6, 0}).validate(), DomainError);
}

TEST_CASE("empty horizon is one best response") {
    const auto p = lottery();
    const auto grid = Grid1D::make(-20.0, 40.0, 601, 0.0, 0.0, 0.02);
    const Profile F0 = ramp_front(grid.space, 1.0);
    const auto wT = TerminalCondition::logistic(5.0);
    const MfgSolution sol = solve_nash(F0, wT, p, grid, {});
    CHECK(sol.converged);
    CHECK(sol.iterations == 1);
    SpaceTimeField F(grid), w(grid);
    F.set_slice(0, F0);
    w.set_slice(0, wT.evaluate(grid.space));
    CHECK(sol.strategy_field.values == best_response(F, w, p).values);
}

TEST_CASE("non-convergence is reported, not thrown") {
    const auto& c = nash_case();
    const MfgSolution sol = solve_nash(c.F0, c.wT, lottery(), c.grid, {0.5, 1e-12, 2});
    CHECK_FALSE(sol.converged);
    CHECK(sol.iterations == 2);
    CHECK(sol.residuals.size() == 2);
    CHECK(sol.residuals.back() > 1e-12);
}

TEST_CASE("lottery equilibrium") {
    const auto p = lottery();
    const MfgSolution& sol = nash(0.5);
    MESSAGE("iterations " << sol.iterations << " residual " << sol.residuals.back());
    REQUIRE(sol.converged);
    CHECK(sol.iterations <= 50);
    CHECK(sol.residuals.back() < 1e-6);
    CHECK(sol.residuals.size() == static_cast<std::size_t>(sol.iterations));

    // fixed point: the best response to (F, w) is the strategy that produced them
    CHECK(residual(best_response(sol.F_field, sol.w_field, p), sol.strategy_field) <= 1e-6);

    const double ic = critical_payoff(p);
    for (std::size_t n = 0; n < sol.strategy_field.slices(); n += 100) {
        const auto s = sol.strategy_field.slice(n);
        for (std::size_t i = 0; i + 1 < s.size(); ++i) CHECK(s[i + 1] <= s[i] + 1e-9);

        Snapshot snap;
        snap.t = sol.F_field.grid.time.t(n);
        snap.F = sol.F_field.profile(n);
        snap.w = sol.w_field.profile(n);
        snap.I = payoff_I(snap.F, *snap.w, p);
        snap.J = intrinsic_J(snap.F, p);
        Profile br(snap.F.grid);
        for (std::size_t i = 0; i < br.size(); ++i) br[i] = s_m((*snap.I)[i], p);
        snap.s = br;
        const auto rep = run_diagnostics(snap, p);
        for (const auto& row : rep.rows) {
            INFO(row.check << " at t=" << snap.t << " worst " << row.worst);
            CHECK(row.passed);
        }
        for (std::size_t i = 0; i < br.size(); ++i)
            if ((*snap.I)[i] >= ic) CHECK(br[i] == 1.0);
            else CHECK(br[i] < 1.0);
    }
}

TEST_CASE("damping does not move the fixed point") {
    const MfgSolution& a = nash(0.5);
    const MfgSolution& b = nash(0.25);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    MESSAGE("theta 0.25 iterations " << b.iterations);
    CHECK(residual(a.strategy_field, b.strategy_field) < 1e-5);
}

TEST_CASE("propensity stays within a fixed distance of the learning front") {
    const auto p = lottery();
    const MfgSolution& sol = nash(0.5);
    const auto& grid = sol.F_field.grid;
    std::vector<double> t, gap;
    for (std::size_t n = 0; n < grid.time.nt; n += 50) {
        const double tn = grid.time.t(n);
        if (tn > grid.time.t_final - 5.0) break;
        const Profile w = sol.w_field.profile(n);
        const double eta = learning_front(payoff_I(sol.F_field.profile(n), w, p), p);
        const double half = locate_level(w, 0.5, Direction::increasing);
        t.push_back(tn);
        gap.push_back(half - eta);
    }
    const double L = *std::max_element(gap.begin(), gap.end());
    MESSAGE("fitted L " << L);
    const auto row = nongrowth_check("propensity_half_level", t, gap);
    INFO(row.note);
    CHECK(row.passed);
}
