#pragma once

// Brute-force reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls into the solvers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Gaussian elimination with partial pivoting on a dense copy.
inline std::vector<double> dense_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Random strictly diagonally dominant tridiagonal system.
struct Tridiagonal {
    std::vector<double> lower, diag, upper, rhs;

    Matrix dense() const {
        const std::size_t n = diag.size();
        Matrix m(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            m[i][i] = diag[i];
            if (i + 1 < n) {
                m[i][i + 1] = upper[i];
                m[i + 1][i] = lower[i];
            }
        }
        return m;
    }
};

inline Tridiagonal random_tridiagonal(std::size_t n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Tridiagonal t;
    t.lower.resize(n - 1);
    t.upper.resize(n - 1);
    t.diag.resize(n);
    t.rhs.resize(n);
    for (auto& v : t.lower) v = u(gen);
    for (auto& v : t.upper) v = u(gen);
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        if (i > 0) off += std::abs(t.lower[i - 1]);
        if (i + 1 < n) off += std::abs(t.upper[i]);
        t.diag[i] = (off + 0.5 + std::abs(u(gen))) * (u(gen) < 0 ? -1.0 : 1.0);
        t.rhs[i] = 10.0 * u(gen);
    }
    return t;
}

inline double max_rel_error(const std::vector<double>& got, const std::vector<double>& want) {
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) {
        scale = std::max(scale, std::abs(want[i]));
        err = std::max(err, std::abs(got[i] - want[i]));
    }
    return err / std::max(scale, 1e-300);
}

/// 8-point Gauss-Legendre nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kGlNodes{
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGlWeights{
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

/// (1/gap) int_{x_i}^{x_end} e^{y - x_i} g(y) dy for g the piecewise-linear
/// interpolant of nodal values, summed cell by cell with Gauss-Legendre.
inline std::vector<double> direct_tail_integral(const std::vector<double>& x,
                                                const std::vector<double>& g, double gap) {
    const std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t c = i; c + 1 < n; ++c) {
            const double a = x[c], b = x[c + 1], h = b - a;
            for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
                const double y = a + 0.5 * h * (kGlNodes[q] + 1.0);
                const double lin = g[c] + (g[c + 1] - g[c]) * (y - a) / h;
                sum += 0.5 * h * kGlWeights[q] * std::exp(y - x[i]) * lin;
            }
        }
        out[i] = sum / gap;
    }
    return out;
}

/// Composite Simpson on [a, b] with an even number of panels.
template <class Fn>
double simpson(Fn&& f, double a, double b, std::size_t panels = 4000) {
    if (panels % 2) ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(a + static_cast<double>(i) * h);
    return s * h / 3.0;
}

/// Heat flow of the indicator 1{x < 0} under F_t = kappa F_xx: the mass of the
/// Gaussian kernel of variance 2 kappa t lying right of x, by quadrature.
inline double heat_step(double x, double t, double kappa) {
    const double var = 2.0 * kappa * t;
    const double sd = std::sqrt(var);
    auto density = [&](double u) {
        return std::exp(-u * u / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
    };
    return simpson(density, x, x + 40.0 * sd, 20000);
}

/// (1/N) sum_{m : x_m >= x_k} (e^{x_m - x_k} - 1) for every agent, by double sum.
inline std::vector<double> ratio_double_sum(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t m = 0; m < n; ++m)
            if (x[m] >= x[k]) s += std::exp(x[m] - x[k]) - 1.0;
        out[k] = s / static_cast<double>(n);
    }
    return out;
}

}  // namespace oracle
