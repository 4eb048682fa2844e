#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "lmfg/grid.hpp"
#include "lmfg/model.hpp"

namespace lmfg {

/// How the search rate entering the CDF equation is obtained.
enum class CouplingMode {
    prescribed_strategy,  // alpha(s*) from a given strategy field
    intrinsic_j,          // s* = s_m(J[F]) recomputed every step
    constant_alpha,       // alpha = alpha1: Fisher-KPP
    rank_closure,         // s* = F: local equation F_t = kappa F_xx + F (Q(1) - Q(F))
};

std::string_view to_string(CouplingMode m);
CouplingMode parse_coupling_mode(std::string_view name);

struct ForwardConfig {
    CouplingMode mode = CouplingMode::intrinsic_j;
    double overshoot_tol = 1e-9;
};

/// Largest stable step for the explicit reaction: 0.1 / alpha1.
double forward_dt_max(const ModelParams& p);

/// c(x) = int_{-inf}^x alpha(s*) (-F_y) dy by a left-to-right cumulative trapezoid.
Profile nonlocal_rate(const Profile& F, const Profile& s_star, const ModelParams& p);

/// Search strategy implied by a closure mode for the current F
/// (s_m(J), F, or 1). Throws DomainError for prescribed_strategy.
Profile closure_strategy(const Profile& F, CouplingMode mode, const ModelParams& p);

/// One IMEX step of F_t = kappa F_xx + c F with Dirichlet F(x_min) = 1, F(x_max) = 0.
///
/// Diffusion is backward Euler; the reaction c F is explicit with c evaluated
/// at the start of the step. The factorized diffusion matrix is reused.
class ForwardStepper {
public:
    ForwardStepper(const SpaceGrid& grid, const ModelParams& p, double dt, ForwardConfig cfg = {});

    const SpaceGrid& grid() const { return grid_; }
    double dt() const { return dt_; }
    CouplingMode mode() const { return cfg_.mode; }

    /// Advances F in place. `strategy` is read only in prescribed mode.
    void step(std::vector<double>& F, std::span<const double> strategy = {});

    /// Reaction rate c used by the most recent step.
    std::span<const double> last_rate() const { return rate_; }

private:
    void compute_rate(std::span<const double> F, std::span<const double> strategy);

    SpaceGrid grid_;
    ModelParams params_;
    double dt_;
    ForwardConfig cfg_;
    TridiagonalLU diffusion_;
    std::vector<double> rate_;
    std::vector<double> search_;   // alpha(s*) per node
    std::vector<double> payoff_;   // J, intrinsic mode only
};

/// One step with a prescribed strategy profile.
Profile step_forward(const Profile& F, const Profile& s_star, const ModelParams& p, double dt);

/// Full trajectory under a prescribed strategy field (slice n drives step n -> n+1).
SpaceTimeField solve_forward(const Profile& F0, const SpaceTimeField& strategy,
                             const ModelParams& p);

/// Full trajectory under a closure (intrinsic_j, constant_alpha, rank_closure).
SpaceTimeField solve_forward(const Profile& F0, CouplingMode closure, const ModelParams& p,
                             const Grid1D& grid);

/// F0 = 1 for x <= -L0, 0 for x >= L0, linear in between (a step at 0 when L0 = 0).
Profile ramp_front(const SpaceGrid& grid, double L0);

/// Throws DomainError unless F0 is a front-like initial condition:
/// values in [0,1], non-increasing, 1 at x_min and 0 at x_max.
void check_initial_front(const Profile& F0);

}  // namespace lmfg
