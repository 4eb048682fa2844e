#include "lmfg/mfg.hpp"

#include <algorithm>
#include <cmath>

#include "lmfg/errors.hpp"

namespace lmfg {

void MfgConfig::validate() const {
    if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("damping must lie in (0,1]");
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    if (max_iter < 1) throw DomainError("max_iter must be at least 1");
}

SpaceTimeField best_response(const SpaceTimeField& F_field, const SpaceTimeField& w_field,
                             const ModelParams& p) {
    if (!(F_field.grid == w_field.grid)) throw GridMismatch("best_response: grids differ");
    if (!(p.discount_gap() > 0.0)) throw DomainError("best_response needs rho > kappa");
    const Grid1D& grid = F_field.grid;
    SpaceTimeField out(grid);
    std::vector<double> payoff;
    for (std::size_t n = 0; n < out.slices(); ++n) {
        exponential_tail_integral(F_field.slice(n), w_field.slice(n), grid.space.dx(),
                                  p.discount_gap(), payoff);
        auto s = out.slice(n);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = s_m(payoff[i], p);
    }
    return out;
}

double residual(const SpaceTimeField& s_new, const SpaceTimeField& s_old) {
    if (!(s_new.grid == s_old.grid) || s_new.values.size() != s_old.values.size())
        throw GridMismatch("residual: fields differ in shape");
    double worst = 0.0;
    for (std::size_t i = 0; i < s_new.values.size(); ++i)
        worst = std::max(worst, std::abs(s_new.values[i] - s_old.values[i]));
    return worst;
}

SpaceTimeField intrinsic_strategy(const Profile& F0, const ModelParams& p, const Grid1D& grid,
                                  SpaceTimeField* F_out) {
    SpaceTimeField F = solve_forward(F0, CouplingMode::intrinsic_j, p, grid);
    SpaceTimeField s(grid);
    std::vector<double> payoff;
    for (std::size_t n = 0; n < s.slices(); ++n) {
        exponential_tail_integral(F.slice(n), {}, grid.space.dx(), p.discount_gap(), payoff);
        auto row = s.slice(n);
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = s_m(payoff[i], p);
    }
    if (F_out) *F_out = std::move(F);
    return s;
}

MfgSolution solve_nash(const Profile& F0, const TerminalCondition& wT, const ModelParams& p,
                       const Grid1D& grid, const MfgConfig& cfg) {
    cfg.validate();
    MfgSolution sol;
    SpaceTimeField s = intrinsic_strategy(F0, p, grid);

    if (grid.time.nt == 0) {
        sol.F_field = SpaceTimeField(grid);
        sol.F_field.set_slice(0, F0);
        sol.w_field = SpaceTimeField(grid);
        sol.w_field.set_slice(0, wT.evaluate(grid.space));
        sol.strategy_field = best_response(sol.F_field, sol.w_field, p);
        sol.residuals.push_back(0.0);
        sol.converged = true;
        sol.iterations = 1;
        return sol;
    }

    const double theta = cfg.damping;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        SpaceTimeField F = solve_forward(F0, s, p);
        SpaceTimeField w = solve_backward(wT, F, s, p);
        SpaceTimeField response = best_response(F, w, p);
        const double r = residual(response, s);
        sol.residuals.push_back(r);
        sol.iterations = it;
        if (r <= cfg.tol || it == cfg.max_iter) {
            sol.converged = r <= cfg.tol;
            sol.F_field = std::move(F);
            sol.w_field = std::move(w);
            sol.strategy_field = std::move(s);
            return sol;
        }
        for (std::size_t i = 0; i < s.values.size(); ++i)
            s.values[i] = (1.0 - theta) * s.values[i] + theta * response.values[i];
    }
    return sol;  // unreachable: the loop returns on its last iteration
}

}  // namespace lmfg
