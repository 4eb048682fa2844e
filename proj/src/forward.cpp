#include "lmfg/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lmfg/errors.hpp"

namespace lmfg {

std::string_view to_string(CouplingMode m) {
    switch (m) {
        case CouplingMode::prescribed_strategy: return "prescribed";
        case CouplingMode::intrinsic_j: return "intrinsic";
        case CouplingMode::constant_alpha: return "constant-alpha";
        case CouplingMode::rank_closure: return "rank";
    }
    return "?";
}

CouplingMode parse_coupling_mode(std::string_view name) {
    for (auto m : {CouplingMode::prescribed_strategy, CouplingMode::intrinsic_j,
                   CouplingMode::constant_alpha, CouplingMode::rank_closure})
        if (to_string(m) == name) return m;
    throw DomainError("unknown coupling mode '" + std::string(name) + "'");
}

double forward_dt_max(const ModelParams& p) {
    if (p.alpha1 <= 0.0) return std::numeric_limits<double>::infinity();
    return 0.1 / p.alpha1;
}

namespace {

void cumulative_rate(std::span<const double> F, std::span<const double> search,
                     std::span<double> rate) {
    rate[0] = 0.0;
    for (std::size_t i = 0; i + 1 < F.size(); ++i)
        rate[i + 1] = rate[i] + 0.5 * (search[i] + search[i + 1]) * (F[i] - F[i + 1]);
}

void check_strategy_values(std::span<const double> s) {
    for (double v : s)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("strategy value outside [0,1]");
}

}  // namespace

Profile nonlocal_rate(const Profile& F, const Profile& s_star, const ModelParams& p) {
    require_same_grid(F.grid, s_star.grid, "nonlocal_rate");
    if (F.size() != s_star.size()) throw GridMismatch("nonlocal_rate: size mismatch");
    check_strategy_values(s_star.values);
    std::vector<double> search(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) search[i] = alpha(s_star[i], p);
    Profile out(F.grid);
    cumulative_rate(F.values, search, out.values);
    return out;
}

Profile closure_strategy(const Profile& F, CouplingMode mode, const ModelParams& p) {
    switch (mode) {
        case CouplingMode::intrinsic_j: {
            Profile J = intrinsic_J(F, p);
            for (double& v : J.values) v = s_m(v, p);
            return J;
        }
        case CouplingMode::constant_alpha: return Profile(F.grid, 1.0);
        case CouplingMode::rank_closure: {
            Profile s = F;
            for (double& v : s.values) v = std::clamp(v, 0.0, 1.0);
            return s;
        }
        case CouplingMode::prescribed_strategy: break;
    }
    throw DomainError("prescribed mode has no closure strategy");
}

ForwardStepper::ForwardStepper(const SpaceGrid& grid, const ModelParams& p, double dt,
                               ForwardConfig cfg)
    : grid_(grid), params_(p), dt_(dt), cfg_(cfg),
      diffusion_([&] {
          grid.validate();
          if (!(dt > 0.0)) throw DomainError("forward step must be positive");
          if (dt > forward_dt_max(p) * (1.0 + 1e-12))
              throw DomainError("forward step " + std::to_string(dt) + " exceeds 0.1/alpha1");
          if (p.kappa < 0.0) throw DomainError("kappa must be non-negative");
          const std::size_t n = grid.nx;
          const double r = p.kappa * dt / (grid.dx() * grid.dx());
          std::vector<double> lower(n - 1, -r), diag(n, 1.0 + 2.0 * r), upper(n - 1, -r);
          // Dirichlet rows.
          diag.front() = diag.back() = 1.0;
          upper.front() = 0.0;
          lower.back() = 0.0;
          return TridiagonalLU(lower, diag, upper);
      }()),
      rate_(grid.nx, 0.0), search_(grid.nx, 0.0) {}

void ForwardStepper::compute_rate(std::span<const double> F, std::span<const double> strategy) {
    const std::size_t n = F.size();
    switch (cfg_.mode) {
        case CouplingMode::constant_alpha:
            for (std::size_t i = 0; i < n; ++i) rate_[i] = params_.alpha1 * (1.0 - F[i]);
            return;
        case CouplingMode::rank_closure: {
            const double q1 = q_integral(1.0, params_);
            for (std::size_t i = 0; i < n; ++i)
                rate_[i] = q1 - q_integral(std::clamp(F[i], 0.0, 1.0), params_);
            return;
        }
        case CouplingMode::prescribed_strategy:
            if (strategy.size() != n) throw GridMismatch("strategy slice size mismatch");
            for (std::size_t i = 0; i < n; ++i) {
                if (!(strategy[i] >= 0.0 && strategy[i] <= 1.0))
                    throw DomainError("strategy value outside [0,1]");
                search_[i] = strategy[i] == 0.0 ? 0.0 : params_.alpha1 * std::pow(strategy[i], params_.k);
            }
            break;
        case CouplingMode::intrinsic_j:
            exponential_tail_integral(F, {}, grid_.dx(), params_.discount_gap(), payoff_);
            for (std::size_t i = 0; i < n; ++i) search_[i] = alpha_of_sm(payoff_[i], params_);
            break;
    }
    cumulative_rate(F, search_, rate_);
}

void ForwardStepper::step(std::vector<double>& F, std::span<const double> strategy) {
    const std::size_t n = grid_.nx;
    if (F.size() != n) throw GridMismatch("forward state size mismatch");
    compute_rate(F, strategy);
    for (std::size_t i = 0; i < n; ++i) F[i] += dt_ * rate_[i] * F[i];
    F.front() = 1.0;
    F.back() = 0.0;
    diffusion_.solve_in_place(F);
    const double tol = cfg_.overshoot_tol;
    for (std::size_t i = 0; i < n; ++i) {
        double& v = F[i];
        if (!std::isfinite(v)) throw NumericalError("non-finite F at node " + std::to_string(i));
        if (v > 1.0 + tol || v < -tol)
            throw NumericalError("F overshoot " + std::to_string(v) + " at node " +
                                 std::to_string(i));
        v = std::clamp(v, 0.0, 1.0);
    }
    F.front() = 1.0;
    F.back() = 0.0;
}

Profile step_forward(const Profile& F, const Profile& s_star, const ModelParams& p, double dt) {
    require_same_grid(F.grid, s_star.grid, "step_forward");
    if (!F.all_finite()) throw NumericalError("step_forward: non-finite input");
    ForwardStepper stepper(F.grid, p, dt, {CouplingMode::prescribed_strategy});
    Profile out = F;
    stepper.step(out.values, s_star.values);
    return out;
}

void check_initial_front(const Profile& F0) {
    if (F0.size() != F0.grid.nx) throw GridMismatch("initial profile size mismatch");
    const auto& v = F0.values;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0 && v[i] <= 1.0)) throw DomainError("F0 outside [0,1]");
        if (i > 0 && v[i] > v[i - 1] + 1e-12) throw DomainError("F0 is not non-increasing");
    }
    if (std::abs(v.front() - 1.0) > 1e-6 || v.back() > 1e-6)
        throw DomainError("F0 must equal 1 at x_min and 0 at x_max");
}

namespace {

SpaceTimeField run_forward(const Profile& F0, const Grid1D& grid, const ModelParams& p,
                           CouplingMode mode, const SpaceTimeField* strategy) {
    require_same_grid(F0.grid, grid.space, "solve_forward");
    check_initial_front(F0);
    SpaceTimeField out(grid);
    out.set_slice(0, F0);
    if (grid.time.nt == 0) return out;
    ForwardStepper stepper(grid.space, p, grid.time.dt(), {mode});
    std::vector<double> F = F0.values;
    for (std::size_t n = 0; n < grid.time.nt; ++n) {
        std::span<const double> s;
        if (strategy) s = strategy->slice(n);
        stepper.step(F, s);
        std::copy(F.begin(), F.end(), out.slice(n + 1).begin());
    }
    return out;
}

}  // namespace

SpaceTimeField solve_forward(const Profile& F0, const SpaceTimeField& strategy,
                             const ModelParams& p) {
    return run_forward(F0, strategy.grid, p, CouplingMode::prescribed_strategy, &strategy);
}

SpaceTimeField solve_forward(const Profile& F0, CouplingMode closure, const ModelParams& p,
                             const Grid1D& grid) {
    if (closure == CouplingMode::prescribed_strategy)
        throw DomainError("prescribed mode needs a strategy field");
    return run_forward(F0, grid, p, closure, nullptr);
}

Profile ramp_front(const SpaceGrid& grid, double L0) {
    if (!(L0 >= 0.0 && std::isfinite(L0))) throw DomainError("ramp half-width must be >= 0");
    if (!(grid.x_min < -L0 && grid.x_max > L0))
        throw DomainError("grid must extend past the ramp on both sides");
    return Profile::sample(grid, [L0](double x) {
        if (x <= -L0) return 1.0;
        if (x >= L0) return 0.0;
        return 0.5 * (1.0 - x / L0);
    });
}

}  // namespace lmfg
