#include "lmfg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lmfg/errors.hpp"

namespace lmfg {

void ModelParams::validate() const {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be positive");
    if (!(alpha1 > 0.0) || !std::isfinite(alpha1)) throw DomainError("alpha1 must be positive");
    if (!(rho > kappa) || !std::isfinite(rho)) throw DomainError("rho must exceed kappa");
    if (!(k >= 0.5 && k < 1.0)) throw DomainError("search exponent k must lie in [1/2, 1)");
}

std::string_view to_string(Regime r) {
    return r == Regime::lottery ? "lottery" : "balanced";
}

TheoryPredictions predict(const ModelParams& p) {
    TheoryPredictions out{};
    out.c_star = 2.0 * std::sqrt(p.kappa * p.alpha1);
    out.lambda_star = std::sqrt(p.alpha1 / p.kappa);
    out.v_star = p.kappa + p.alpha1;
    out.i_crit = critical_payoff(p);
    out.regime = p.alpha1 < p.kappa ? Regime::lottery : Regime::balanced;
    return out;
}

double alpha(double s, const ModelParams& p) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("alpha: fraction outside [0,1]");
    if (s == 0.0) return 0.0;
    return p.alpha1 * std::pow(s, p.k);
}

double critical_payoff(const ModelParams& p) { return 1.0 / (p.k * p.alpha1); }

double s_m(double I, const ModelParams& p) {
    if (!(I >= 0.0)) throw DomainError("s_m: negative or NaN pay-off");
    if (I > critical_payoff(p)) return 1.0;
    const double base = p.k * p.alpha1 * I;
    if (base >= 1.0) return 1.0;
    return std::pow(base, 1.0 / (1.0 - p.k));
}

double alpha_of_sm(double I, const ModelParams& p) {
    if (!(I >= 0.0)) throw DomainError("alpha_of_sm: negative or NaN pay-off");
    if (I > critical_payoff(p)) return p.alpha1;
    const double exponent = p.k / (1.0 - p.k);
    const double base = std::min(1.0, p.k * p.alpha1 * I);
    return p.alpha1 * (exponent == 1.0 ? base : std::pow(base, exponent));
}

double q_integral(double u, const ModelParams& p) {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("q_integral: fraction outside [0,1]");
    return p.alpha1 * std::pow(u, p.k + 1.0) / (p.k + 1.0);
}

void exponential_tail_integral(std::span<const double> F, std::span<const double> weight,
                               double dx, double discount_gap, std::vector<double>& out) {
    const std::size_t n = F.size();
    out.resize(n);
    // Cell weights of int_0^h e^u g(u) du for g linear between g0 and g1.
    const double growth = std::exp(dx);
    const double em1 = std::expm1(dx);
    const double w1 = (dx * growth - em1) / dx;
    const double w0 = em1 - w1;
    const double scale = 1.0 / discount_gap;
    const bool unit = weight.empty();
    // Far behind the front the integral grows like e^{-x}; saturate instead of overflowing.
    constexpr double kSaturate = std::numeric_limits<double>::max();

    out[n - 1] = 0.0;
    double g_right = unit ? F[n - 1] : weight[n - 1] * F[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        const double g_left = unit ? F[i] : weight[i] * F[i];
        out[i] = std::min(growth * out[i + 1] + scale * (w0 * g_left + w1 * g_right), kSaturate);
        g_right = g_left;
    }
}

namespace {

void check_payoff_inputs(const Profile& F, const ModelParams& p) {
    F.grid.validate();
    if (F.values.size() != F.grid.nx) throw GridMismatch("profile size does not match grid");
    if (!F.all_finite()) throw DomainError("pay-off: NaN or infinite F");
    if (!(p.discount_gap() > 0.0)) throw DomainError("pay-off needs rho > kappa");
}

}  // namespace

Profile payoff_I(const Profile& F, const Profile& w, const ModelParams& p) {
    check_payoff_inputs(F, p);
    require_same_grid(F.grid, w.grid, "payoff_I");
    if (w.values.size() != F.values.size()) throw GridMismatch("payoff_I: size mismatch");
    if (!w.all_finite()) throw DomainError("payoff_I: NaN or infinite w");
    Profile out(F.grid);
    exponential_tail_integral(F.values, w.values, F.grid.dx(), p.discount_gap(), out.values);
    return out;
}

Profile intrinsic_J(const Profile& F, const ModelParams& p) {
    check_payoff_inputs(F, p);
    Profile out(F.grid);
    exponential_tail_integral(F.values, {}, F.grid.dx(), p.discount_gap(), out.values);
    return out;
}

}  // namespace lmfg
