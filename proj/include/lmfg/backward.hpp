#pragma once

#include <span>
#include <vector>

#include "lmfg/grid.hpp"
#include "lmfg/model.hpp"

namespace lmfg {

/// Terminal data w(T, .) for the propensity-to-learn equation.
struct TerminalCondition {
    enum class Kind { logistic, custom };

    Kind kind = Kind::logistic;
    double center = 0.0;
    double slope = 1.0;
    Profile custom;

    static TerminalCondition logistic(double center, double slope = 1.0);
    static TerminalCondition from_profile(Profile w);

    /// Samples the condition on `grid`, checks it is non-decreasing with limits
    /// 0 and 1 at the edges (1e-6), and pins the edge nodes to exactly 0 and 1.
    Profile evaluate(const SpaceGrid& grid) const;
};

/// Largest step keeping the explicit source monotone: 1 / ((rho-kappa) + alpha1).
double backward_dt_max(const ModelParams& p);

/// Steps w_t + kappa w_xx + 2 kappa w_x + (rho-kappa)(1 - s - w) - alpha(s) w F = 0
/// backward in time, with w(x_min) = 0 and w(x_max) = 1.
///
/// kappa w_xx + 2 kappa w_x is implicit; the drift moves information toward -x in
/// backward time, so w_x is the forward difference (w_{i+1} - w_i)/dx.
class BackwardStepper {
public:
    BackwardStepper(const SpaceGrid& grid, const ModelParams& p, double dt,
                    double overshoot_tol = 1e-9);

    /// w holds the later slice on entry and the earlier one on return.
    /// F and s are taken at the later time.
    void step(std::vector<double>& w, std::span<const double> F, std::span<const double> s);

private:
    SpaceGrid grid_;
    ModelParams params_;
    double dt_;
    double tol_;
    TridiagonalLU operator_;
};

/// One backward step with s = s_m(I).
Profile step_backward(const Profile& w, const Profile& F, const Profile& I, const ModelParams& p,
                      double dt);

/// One backward step with a given strategy profile.
Profile step_backward_strategy(const Profile& w, const Profile& F, const Profile& s,
                               const ModelParams& p, double dt);

/// w for every slice of F_field's grid, integrating from wT at t_final down to t0.
SpaceTimeField solve_backward(const TerminalCondition& wT, const SpaceTimeField& F_field,
                              const SpaceTimeField& strategy_field, const ModelParams& p);

}  // namespace lmfg
