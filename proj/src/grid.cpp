#include "lmfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmfg/errors.hpp"

namespace lmfg {

std::vector<double> SpaceGrid::nodes() const {
    std::vector<double> out(nx);
    for (std::size_t i = 0; i < nx; ++i) out[i] = x(i);
    return out;
}

void SpaceGrid::validate() const {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
        throw DomainError("space grid needs finite x_min < x_max");
    if (nx < 8) throw DomainError("space grid needs at least 8 nodes, got " + std::to_string(nx));
}

double TimeGrid::t(std::size_t n) const {
    // Last slice lands exactly on t_final.
    if (n == nt) return t_final;
    return t0 + static_cast<double>(n) * dt();
}

void TimeGrid::validate() const {
    if (!std::isfinite(t0) || !std::isfinite(t_final) || t_final < t0)
        throw DomainError("time grid needs finite t0 <= t_final");
    if (nt == 0 && t_final != t0) throw DomainError("time grid with zero steps must be empty");
}

Grid1D Grid1D::make(double x_min, double x_max, std::size_t nx, double t0, double t_final,
                    double dt) {
    Grid1D g;
    g.space = {x_min, x_max, nx};
    g.space.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("time step must be positive");
    const double horizon = t_final - t0;
    const double steps = std::round(horizon / dt);
    if (std::abs(steps * dt - horizon) > 1e-9 * std::max(1.0, std::abs(horizon)))
        throw DomainError("time step does not tile the horizon");
    g.time = {t0, t_final, static_cast<std::size_t>(steps)};
    g.time.validate();
    return g;
}

Profile::Profile(const SpaceGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.nx)
        throw GridMismatch("profile has " + std::to_string(values.size()) + " values for " +
                           std::to_string(grid.nx) + " nodes");
}

bool Profile::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

SpaceTimeField::SpaceTimeField(const Grid1D& g, double fill)
    : grid(g), values((g.time.nt + 1) * g.space.nx, fill) {}

std::span<double> SpaceTimeField::slice(std::size_t n) {
    return std::span<double>(values).subspan(n * grid.space.nx, grid.space.nx);
}

std::span<const double> SpaceTimeField::slice(std::size_t n) const {
    return std::span<const double>(values).subspan(n * grid.space.nx, grid.space.nx);
}

Profile SpaceTimeField::profile(std::size_t n) const {
    auto s = slice(n);
    return Profile(grid.space, std::vector<double>(s.begin(), s.end()));
}

void SpaceTimeField::set_slice(std::size_t n, const Profile& p) {
    require_same_grid(grid.space, p.grid, "field slice");
    std::copy(p.values.begin(), p.values.end(), slice(n).begin());
}

bool SpaceTimeField::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void require_same_grid(const SpaceGrid& a, const SpaceGrid& b, const char* what) {
    if (!(a == b)) throw GridMismatch(std::string(what) + ": grids differ");
}

double interp_linear(const Profile& prof, double x) {
    const SpaceGrid& g = prof.grid;
    if (!(x >= g.x_min && x <= g.x_max))
        throw DomainError("interpolation point " + std::to_string(x) + " outside grid");
    const double u = (x - g.x_min) / g.dx();
    auto i = static_cast<std::size_t>(std::floor(u));
    if (i >= g.nx - 1) return prof.values.back();
    const double frac = u - static_cast<double>(i);
    return prof.values[i] + frac * (prof.values[i + 1] - prof.values[i]);
}

TridiagonalLU::TridiagonalLU(std::span<const double> lower, std::span<const double> diag,
                             std::span<const double> upper)
    : lower_(lower.begin(), lower.end()), upper_(upper.begin(), upper.end()),
      pivot_inv_(diag.size()) {
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() + 1 != n || upper.size() + 1 != n)
        throw DomainError("tridiagonal system has inconsistent band lengths");
    // Forward elimination; upper_ becomes the scaled super-diagonal c'.
    double pivot = diag[0];
    for (std::size_t i = 0;; ++i) {
        if (pivot == 0.0 || !std::isfinite(pivot))
            throw SingularSystem("zero pivot at row " + std::to_string(i));
        pivot_inv_[i] = 1.0 / pivot;
        if (i + 1 == n) break;
        upper_[i] *= pivot_inv_[i];
        pivot = diag[i + 1] - lower_[i] * upper_[i];
    }
}

void TridiagonalLU::solve_in_place(std::span<double> rhs) const {
    const std::size_t n = pivot_inv_.size();
    if (rhs.size() != n) throw DomainError("right-hand side length mismatch");
    rhs[0] *= pivot_inv_[0];
    for (std::size_t i = 1; i < n; ++i)
        rhs[i] = (rhs[i] - lower_[i - 1] * rhs[i - 1]) * pivot_inv_[i];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_[i] * rhs[i + 1];
}

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs) {
    TridiagonalLU lu(lower, diag, upper);
    std::vector<double> x(rhs.begin(), rhs.end());
    lu.solve_in_place(x);
    return x;
}

}  // namespace lmfg
