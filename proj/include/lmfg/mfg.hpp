#pragma once

#include <vector>

#include "lmfg/backward.hpp"
#include "lmfg/forward.hpp"
#include "lmfg/grid.hpp"
#include "lmfg/model.hpp"

namespace lmfg {

struct MfgConfig {
    double damping = 0.5;      // theta in (0,1]
    double tol = 1e-6;         // sup-norm target on the strategy field
    int max_iter = 50;

    void validate() const;
};

struct MfgSolution {
    SpaceTimeField F_field;
    SpaceTimeField w_field;
    SpaceTimeField strategy_field;  // the iterate that produced F_field and w_field
    std::vector<double> residuals;  // one entry per Picard iteration
    bool converged = false;
    int iterations = 0;
};

/// s*(t,x) = s_m(I[F(t), w(t)](x)) slice by slice.
SpaceTimeField best_response(const SpaceTimeField& F_field, const SpaceTimeField& w_field,
                             const ModelParams& p);

/// Max absolute nodewise difference. Throws GridMismatch on a shape mismatch.
double residual(const SpaceTimeField& s_new, const SpaceTimeField& s_old);

/// Strategy field of the forward-only intrinsic closure: s_m(J[F]) along its own
/// trajectory. Returns the trajectory in `F_out` when non-null.
SpaceTimeField intrinsic_strategy(const Profile& F0, const ModelParams& p, const Grid1D& grid,
                                  SpaceTimeField* F_out = nullptr);

/// Damped Picard iteration on the best-response map, warm-started from the
/// intrinsic closure. Non-convergence is reported through `converged`, never thrown.
MfgSolution solve_nash(const Profile& F0, const TerminalCondition& wT, const ModelParams& p,
                       const Grid1D& grid, const MfgConfig& cfg);

}  // namespace lmfg
