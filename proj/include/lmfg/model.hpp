#pragma once

#include <string_view>

#include "lmfg/grid.hpp"

namespace lmfg {

/// Constants of the knowledge-diffusion game with search function
/// alpha(s) = alpha1 * s^k.
///
/// The kernels below accept the degenerate limits alpha1 = 0 and kappa = 0
/// (pure diffusion, pure jumps) so they can be checked against closed forms;
/// validate() enforces the full modelling assumptions and is what configs use.
struct ModelParams {
    double kappa = 1.0;   // innovation (diffusion) rate
    double rho = 2.0;     // discount rate
    double alpha1 = 0.25; // search amplitude
    double k = 0.5;       // search exponent

    /// rho - kappa, the effective discount of the derivative formulation.
    double discount_gap() const { return rho - kappa; }

    /// Throws DomainError unless kappa > 0, alpha1 > 0, rho > kappa and 1/2 <= k < 1.
    void validate() const;
};

enum class Regime { lottery, balanced };

std::string_view to_string(Regime r);

/// Front-speed constants predicted by the asymptotic theory.
struct TheoryPredictions {
    double c_star;      // median-front speed 2 sqrt(kappa alpha1)
    double lambda_star; // tail decay rate sqrt(alpha1 / kappa)
    double v_star;      // learning-front speed kappa + alpha1 (lottery regime)
    double i_crit;      // learning threshold 1 / alpha'(1)
    Regime regime;
};

TheoryPredictions predict(const ModelParams& p);

/// Search rate alpha1 * s^k for s in [0,1].
double alpha(double s, const ModelParams& p);

/// I_c = 1 / alpha'(1) = 1 / (k alpha1).
double critical_payoff(const ModelParams& p);

/// Optimal search fraction for pay-off I: (k alpha1 I)^(1/(1-k)) up to I_c, 1 beyond.
double s_m(double I, const ModelParams& p);

/// alpha(s_m(I)) in closed form: alpha1 (k alpha1 I)^(k/(1-k)), saturating at alpha1.
double alpha_of_sm(double I, const ModelParams& p);

/// Q(u) = integral of alpha over [0,u] = alpha1 u^(k+1) / (k+1).
double q_integral(double u, const ModelParams& p);

/// Learning pay-off I(x) = e^{-x} / (rho-kappa) * int_x^inf e^y w F dy.
///
/// Evaluated right to left as I_i = e^{dx} I_{i+1} + cell_i / (rho-kappa), where
/// cell_i integrates e^{y-x_i} (wF)(y) over [x_i, x_{i+1}] exactly for the linear
/// interpolant of wF. The tail beyond x_max is taken as zero. Values saturate at
/// the largest finite double far behind the front.
Profile payoff_I(const Profile& F, const Profile& w, const ModelParams& p);

/// Intrinsic pay-off: payoff_I with w = 1.
Profile intrinsic_J(const Profile& F, const ModelParams& p);

/// Shared kernel behind payoff_I / intrinsic_J; `weight` may be empty (w = 1).
/// Writes into `out` (resized to F.size()). No validation; callers check inputs.
void exponential_tail_integral(std::span<const double> F, std::span<const double> weight,
                               double dx, double discount_gap, std::vector<double>& out);

}  // namespace lmfg
