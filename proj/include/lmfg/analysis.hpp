#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmfg/grid.hpp"
#include "lmfg/model.hpp"

namespace lmfg {

enum class Direction { decreasing, increasing };

/// Linear-interpolated crossing of `level` by a monotone profile.
///
/// Throws FrontError: not_bracketed_left when the profile never reaches the level
/// (decreasing profile entirely below it), not_bracketed_right when it never drops
/// below it, degenerate when a boundary value or a plateau sits exactly on it,
/// non_monotone when the profile violates the stated direction.
double locate_level(const Profile& prof, double level, Direction dir);

/// eta_m: F = 1/2.
double median_front(const Profile& F);

/// eta_l: I = I_c. Also used on J for the intrinsic front e_l.
double learning_front(const Profile& I, const ModelParams& p);

enum class FrontKind { median, learning, intrinsic };

std::string_view to_string(FrontKind k);

struct FrontTrack {
    FrontKind kind = FrontKind::median;
    std::vector<double> t;
    std::vector<double> x;

    /// Appends a sample; throws DomainError if t does not increase.
    void push(double time, double position);
    std::size_t size() const { return t.size(); }
};

struct SpeedFit {
    double speed = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::size_t samples = 0;
};

/// Ordinary least squares x = speed * t + intercept over all points (needs 2).
SpeedFit fit_line(std::span<const double> t, std::span<const double> x);

/// OLS over the samples with t in [t_begin, t_end]; non-finite samples are skipped.
/// Throws DomainError with fewer than `min_samples` usable samples.
SpeedFit estimate_speed(const FrontTrack& track, double t_begin, double t_end,
                        std::size_t min_samples = 10);

/// Window after trimming the given fractions of [t_first, t_last] at each end.
std::pair<double, double> trimmed_window(double t_first, double t_last, double burn_in,
                                         double terminal_trim);

/// Fields available at one recorded time. w, I and s are absent for closures
/// that do not define them (e.g. Fisher-KPP, particle clouds).
struct Snapshot {
    double t = 0.0;
    Profile F;
    std::optional<Profile> w;
    std::optional<Profile> I;
    std::optional<Profile> J;
    std::optional<Profile> s;
};

struct CheckResult {
    std::string check;
    bool passed = true;
    double worst = 0.0;     // largest violation magnitude (0 when clean)
    double location = 0.0;  // x of the worst violation
    double time = 0.0;
    long snapshot = -1;     // -1 for whole-run checks
    std::string note;
};

struct DiagnosticsReport {
    std::vector<CheckResult> rows;

    bool all_passed() const;
    std::size_t failures() const;
    void append(const DiagnosticsReport& other);
    /// First failing row of the named check, if any.
    const CheckResult* first_failure(std::string_view check) const;
};

struct DiagnosticsOptions {
    double mono_tol = 1e-9;        // slope / range tolerance for F, w, s
    double payoff_rel_tol = 1e-9;  // relative tolerance for I, J orderings
    double decay_slack = 1.05;     // multiplicative slack on the decay bounds
    double burn_in = 0.1;          // fractions of the recorded time span
    double terminal_trim = 0.1;
    double speed_floor = 0.95;     // intrinsic front speed >= speed_floor * kappa
    double growth_slack = 1e-6;    // J(t) >= e^{kappa dt} J(s) (1 - growth_slack)
    double tail_floor = 1e-10;     // J growth is compared where F(s, x) >= tail_floor
    double edge_tail = 1e-8;       // F next to x_max must be below this for I, J to be trusted
    double learning_speed_cap = 4.0;   // |d eta_l / dt| <= cap * (kappa + alpha1)
    double nongrowth_slope = 0.02;     // a fitted constant "stops growing" when its final-half
    double nongrowth_rel_slope = 0.01; // slope is <= max(nongrowth_slope, rel * mean |value|)
};

/// Per-snapshot checks: ranges and monotonicity of F, w, s; F negligible next to
/// x_max; search rate c <= alpha1 (1 - F); monotone I, J; I <= J; s = 1 exactly
/// where I >= I_c; decay bounds to the right of eta_l.
DiagnosticsReport run_diagnostics(const Snapshot& snap, const ModelParams& p,
                                  const DiagnosticsOptions& opt = {}, long index = 0);

/// Slope test for a fitted constant over the final half of (t, values).
/// Non-finite values are skipped; passes vacuously with fewer than 2 samples.
CheckResult nongrowth_check(std::string name, std::span<const double> t,
                            std::span<const double> values, const DiagnosticsOptions& opt = {});

/// Checks across snapshots: front sandwich e_l - L <= eta_l <= e_l with L
/// non-growing, bounded learning-front speed, intrinsic front speed, J growth
/// factor, level-set tightness and eta_m <= eta_l + L'.
DiagnosticsReport run_temporal_diagnostics(std::span<const Snapshot> snaps, const ModelParams& p,
                                           const DiagnosticsOptions& opt = {});

/// Both of the above over a run.
DiagnosticsReport run_all_diagnostics(std::span<const Snapshot> snaps, const ModelParams& p,
                                      const DiagnosticsOptions& opt = {});

}  // namespace lmfg
