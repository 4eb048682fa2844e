#include "lmfg/backward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmfg/errors.hpp"

namespace lmfg {

TerminalCondition TerminalCondition::logistic(double center, double slope) {
    if (!std::isfinite(center) || !(slope > 0.0))
        throw DomainError("logistic terminal condition needs a finite center and positive slope");
    TerminalCondition tc;
    tc.kind = Kind::logistic;
    tc.center = center;
    tc.slope = slope;
    return tc;
}

TerminalCondition TerminalCondition::from_profile(Profile w) {
    TerminalCondition tc;
    tc.kind = Kind::custom;
    tc.custom = std::move(w);
    return tc;
}

Profile TerminalCondition::evaluate(const SpaceGrid& grid) const {
    Profile w(grid);
    if (kind == Kind::logistic) {
        for (std::size_t i = 0; i < grid.nx; ++i)
            w[i] = 1.0 / (1.0 + std::exp(-slope * (grid.x(i) - center)));
    } else {
        require_same_grid(custom.grid, grid, "terminal condition");
        w = custom;
    }
    for (std::size_t i = 0; i < grid.nx; ++i) {
        if (!(w[i] >= 0.0 && w[i] <= 1.0)) throw DomainError("terminal w outside [0,1]");
        if (i > 0 && w[i] < w[i - 1]) throw DomainError("terminal w is not non-decreasing");
    }
    if (w.values.front() > 1e-6 || w.values.back() < 1.0 - 1e-6)
        throw DomainError("terminal w must reach 0 at x_min and 1 at x_max within 1e-6");
    w.values.front() = 0.0;
    w.values.back() = 1.0;
    return w;
}

double backward_dt_max(const ModelParams& p) { return 1.0 / (p.discount_gap() + p.alpha1); }

BackwardStepper::BackwardStepper(const SpaceGrid& grid, const ModelParams& p, double dt,
                                 double overshoot_tol)
    : grid_(grid), params_(p), dt_(dt), tol_(overshoot_tol),
      operator_([&] {
          grid.validate();
          if (!(dt > 0.0)) throw DomainError("backward step must be positive");
          if (!(p.discount_gap() > 0.0)) throw DomainError("backward solve needs rho > kappa");
          if (dt > backward_dt_max(p) * (1.0 + 1e-12))
              throw DomainError("backward step exceeds 1/((rho-kappa)+alpha1)");
          const std::size_t n = grid.nx;
          const double h = grid.dx();
          const double diff = p.kappa * dt / (h * h);
          const double drift = 2.0 * p.kappa * dt / h;
          std::vector<double> lower(n - 1, -diff), diag(n, 1.0 + 2.0 * diff + drift),
              upper(n - 1, -diff - drift);
          diag.front() = diag.back() = 1.0;
          upper.front() = 0.0;
          lower.back() = 0.0;
          return TridiagonalLU(lower, diag, upper);
      }()) {}

void BackwardStepper::step(std::vector<double>& w, std::span<const double> F,
                           std::span<const double> s) {
    const std::size_t n = grid_.nx;
    if (w.size() != n || F.size() != n || s.size() != n)
        throw GridMismatch("backward step size mismatch");
    const double gap = params_.discount_gap();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(s[i] >= 0.0 && s[i] <= 1.0)) throw DomainError("strategy value outside [0,1]");
        const double search = s[i] == 0.0 ? 0.0 : params_.alpha1 * std::pow(s[i], params_.k);
        w[i] += dt_ * (gap * (1.0 - s[i] - w[i]) - search * w[i] * F[i]);
    }
    w.front() = 0.0;
    w.back() = 1.0;
    operator_.solve_in_place(w);
    for (std::size_t i = 0; i < n; ++i) {
        double& v = w[i];
        if (!std::isfinite(v)) throw NumericalError("non-finite w at node " + std::to_string(i));
        if (v > 1.0 + tol_ || v < -tol_)
            throw NumericalError("w overshoot " + std::to_string(v) + " at node " +
                                 std::to_string(i));
        v = std::clamp(v, 0.0, 1.0);
    }
    w.front() = 0.0;
    w.back() = 1.0;
}

Profile step_backward_strategy(const Profile& w, const Profile& F, const Profile& s,
                               const ModelParams& p, double dt) {
    require_same_grid(w.grid, F.grid, "step_backward");
    require_same_grid(w.grid, s.grid, "step_backward");
    if (!w.all_finite() || !F.all_finite()) throw NumericalError("step_backward: non-finite input");
    BackwardStepper stepper(w.grid, p, dt);
    Profile out = w;
    stepper.step(out.values, F.values, s.values);
    return out;
}

Profile step_backward(const Profile& w, const Profile& F, const Profile& I, const ModelParams& p,
                      double dt) {
    require_same_grid(w.grid, I.grid, "step_backward");
    Profile s(I.grid);
    for (std::size_t i = 0; i < I.size(); ++i) s[i] = s_m(I[i], p);
    return step_backward_strategy(w, F, s, p, dt);
}

SpaceTimeField solve_backward(const TerminalCondition& wT, const SpaceTimeField& F_field,
                              const SpaceTimeField& strategy_field, const ModelParams& p) {
    if (!(F_field.grid == strategy_field.grid))
        throw GridMismatch("solve_backward: F and strategy fields on different grids");
    const Grid1D& grid = F_field.grid;
    SpaceTimeField out(grid);
    const std::size_t nt = grid.time.nt;
    Profile terminal = wT.evaluate(grid.space);
    out.set_slice(nt, terminal);
    if (nt == 0) return out;
    BackwardStepper stepper(grid.space, p, grid.time.dt());
    std::vector<double> w = terminal.values;
    for (std::size_t n = nt; n-- > 0;) {
        stepper.step(w, F_field.slice(n + 1), strategy_field.slice(n + 1));
        std::copy(w.begin(), w.end(), out.slice(n).begin());
    }
    return out;
}

}  // namespace lmfg
