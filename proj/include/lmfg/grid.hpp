#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lmfg {

/// Uniform grid in log-productivity x.
struct SpaceGrid {
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t nx = 0;

    double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
    std::vector<double> nodes() const;

    /// Throws DomainError unless nx >= 8 and x_max > x_min (both finite).
    void validate() const;

    bool operator==(const SpaceGrid&) const = default;
};

/// Uniform time grid: nt steps of length dt() covering [t0, t_final].
struct TimeGrid {
    double t0 = 0.0;
    double t_final = 0.0;
    std::size_t nt = 0;

    double dt() const { return nt == 0 ? 0.0 : (t_final - t0) / static_cast<double>(nt); }
    double t(std::size_t n) const;

    void validate() const;

    bool operator==(const TimeGrid&) const = default;
};

struct Grid1D {
    SpaceGrid space;
    TimeGrid time;

    /// Builds a grid from a requested step; nt = round((t_final - t0)/dt).
    /// Throws DomainError when dt does not tile the horizon to 1e-9 relative.
    static Grid1D make(double x_min, double x_max, std::size_t nx, double t0, double t_final,
                       double dt);

    bool operator==(const Grid1D&) const = default;
};

/// One real per node of a SpaceGrid.
struct Profile {
    SpaceGrid grid;
    std::vector<double> values;

    Profile() = default;
    explicit Profile(const SpaceGrid& g, double fill = 0.0) : grid(g), values(g.nx, fill) {}
    Profile(const SpaceGrid& g, std::vector<double> v);

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    std::span<const double> view() const { return values; }

    bool all_finite() const;

    template <class Fn>
    static Profile sample(const SpaceGrid& g, Fn&& fn) {
        Profile p(g);
        for (std::size_t i = 0; i < g.nx; ++i) p.values[i] = fn(g.x(i));
        return p;
    }
};

/// nt+1 time slices of nx values, row-major by time.
struct SpaceTimeField {
    Grid1D grid;
    std::vector<double> values;

    SpaceTimeField() = default;
    explicit SpaceTimeField(const Grid1D& g, double fill = 0.0);

    std::size_t slices() const { return grid.time.nt + 1; }
    std::span<double> slice(std::size_t n);
    std::span<const double> slice(std::size_t n) const;
    Profile profile(std::size_t n) const;
    void set_slice(std::size_t n, const Profile& p);

    bool all_finite() const;
};

/// Throws GridMismatch when the spatial grids differ.
void require_same_grid(const SpaceGrid& a, const SpaceGrid& b, const char* what);

/// Piecewise-linear interpolation; throws DomainError outside [x_min, x_max].
double interp_linear(const Profile& prof, double x);

/// LU factors of a tridiagonal matrix, reusable across right-hand sides.
///
/// lower[i] multiplies u[i] in row i+1, upper[i] multiplies u[i+1] in row i.
class TridiagonalLU {
public:
    TridiagonalLU(std::span<const double> lower, std::span<const double> diag,
                  std::span<const double> upper);

    std::size_t size() const { return pivot_inv_.size(); }
    void solve_in_place(std::span<double> rhs) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> pivot_inv_;
};

/// Thomas algorithm. Throws SingularSystem on a zero pivot.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

}  // namespace lmfg
