#include "lmfg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lmfg/errors.hpp"
#include "lmfg/forward.hpp"

namespace lmfg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double locate_level(const Profile& prof, double level, Direction dir) {
    const std::size_t n = prof.size();
    if (n < 2 || n != prof.grid.nx) throw GridMismatch("locate_level: bad profile");
    const double sign = dir == Direction::decreasing ? 1.0 : -1.0;
    auto v = [&](std::size_t i) { return sign * prof.values[i]; };
    const double target = sign * level;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double a = v(i), b = v(i + 1);
        if (!std::isfinite(a) || !std::isfinite(b))
            throw FrontError(FrontErrorCode::non_monotone, "locate_level: non-finite profile");
        if (b > a + 1e-9 * std::max(1.0, std::abs(a)))
            throw FrontError(FrontErrorCode::non_monotone,
                             "locate_level: profile not monotone near x=" +
                                 std::to_string(prof.grid.x(i)));
    }
    if (v(0) < target)
        throw FrontError(FrontErrorCode::not_bracketed_left, "level not reached: crossing left of grid");
    if (v(n - 1) > target)
        throw FrontError(FrontErrorCode::not_bracketed_right, "level exceeded everywhere: crossing right of grid");
    if (v(0) == target || v(n - 1) == target)
        throw FrontError(FrontErrorCode::degenerate, "level sits on a boundary value");

    std::size_t i = 0;
    while (v(i + 1) >= target) ++i;
    const double dx = prof.grid.dx();
    if (v(i) == target) {
        if (i > 0 && v(i - 1) == target)
            throw FrontError(FrontErrorCode::degenerate, "level sits on a plateau");
        return prof.grid.x(i);
    }
    return prof.grid.x(i) + (v(i) - target) / (v(i) - v(i + 1)) * dx;
}

double median_front(const Profile& F) { return locate_level(F, 0.5, Direction::decreasing); }

double learning_front(const Profile& I, const ModelParams& p) {
    return locate_level(I, critical_payoff(p), Direction::decreasing);
}

std::string_view to_string(FrontKind k) {
    switch (k) {
        case FrontKind::median: return "median";
        case FrontKind::learning: return "learning";
        case FrontKind::intrinsic: return "intrinsic";
    }
    return "?";
}

void FrontTrack::push(double time, double position) {
    if (!t.empty() && !(time > t.back())) throw DomainError("front samples must be time-ordered");
    t.push_back(time);
    x.push_back(position);
}

SpeedFit fit_line(std::span<const double> t, std::span<const double> x) {
    const std::size_t n = t.size();
    if (n != x.size() || n < 2) throw DomainError("fit_line needs at least two paired samples");
    double tm = 0.0, xm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tm += t[i];
        xm += x[i];
    }
    tm /= static_cast<double>(n);
    xm /= static_cast<double>(n);
    double stt = 0.0, stx = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        stx += (t[i] - tm) * (x[i] - xm);
        sxx += (x[i] - xm) * (x[i] - xm);
    }
    if (stt == 0.0) throw DomainError("fit_line: all samples at one time");
    SpeedFit fit;
    fit.speed = stx / stt;
    fit.intercept = xm - fit.speed * tm;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = x[i] - (fit.intercept + fit.speed * t[i]);
        ss_res += r * r;
    }
    fit.r2 = sxx == 0.0 ? 1.0 : 1.0 - ss_res / sxx;
    fit.t_begin = t.front();
    fit.t_end = t.back();
    fit.samples = n;
    return fit;
}

SpeedFit estimate_speed(const FrontTrack& track, double t_begin, double t_end,
                        std::size_t min_samples) {
    std::vector<double> ts, xs;
    for (std::size_t i = 0; i < track.size(); ++i) {
        if (track.t[i] < t_begin || track.t[i] > t_end || !std::isfinite(track.x[i])) continue;
        ts.push_back(track.t[i]);
        xs.push_back(track.x[i]);
    }
    if (ts.size() < std::max<std::size_t>(2, min_samples))
        throw DomainError("estimate_speed: " + std::to_string(ts.size()) +
                          " samples in window, need " + std::to_string(min_samples));
    SpeedFit fit = fit_line(ts, xs);
    fit.t_begin = t_begin;
    fit.t_end = t_end;
    return fit;
}

std::pair<double, double> trimmed_window(double t_first, double t_last, double burn_in,
                                         double terminal_trim) {
    const double span = t_last - t_first;
    return {t_first + burn_in * span, t_last - terminal_trim * span};
}

bool DiagnosticsReport::all_passed() const { return failures() == 0; }

std::size_t DiagnosticsReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const CheckResult& r) { return !r.passed; }));
}

void DiagnosticsReport::append(const DiagnosticsReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

const CheckResult* DiagnosticsReport::first_failure(std::string_view check) const {
    for (const auto& r : rows)
        if (!r.passed && r.check == check) return &r;
    return nullptr;
}

namespace {

/// Tracks the worst violation of one check.
class Violation {
public:
    Violation(std::string name, double time, long snapshot) {
        row_.check = std::move(name);
        row_.time = time;
        row_.snapshot = snapshot;
    }

    /// Records `amount` (> 0 means violated) at x.
    void record(double amount, double x) {
        if (std::isnan(amount)) amount = std::numeric_limits<double>::infinity();
        if (amount > row_.worst) {
            row_.worst = amount;
            row_.location = x;
        }
        if (amount > 0.0) row_.passed = false;
    }

    CheckResult finish(std::string note = {}) {
        row_.note = std::move(note);
        return row_;
    }

private:
    CheckResult row_;
};

void check_monotone_range(DiagnosticsReport& rep, const char* name, const Profile& f,
                          Direction dir, double tol, double t, long idx) {
    Violation v(name, t, idx);
    const double sign = dir == Direction::decreasing ? 1.0 : -1.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = f.grid.x(i);
        v.record(std::max(-f[i], f[i] - 1.0) - tol, x);
        if (i + 1 < f.size()) v.record(sign * (f[i + 1] - f[i]) - tol, x);
    }
    rep.rows.push_back(v.finish());
}

void check_payoff_monotone(DiagnosticsReport& rep, const char* name, const Profile& f, double tol,
                           double t, long idx) {
    Violation v(name, t, idx);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = f.grid.x(i);
        v.record(-f[i] - tol, x);
        if (i + 1 < f.size())
            v.record((f[i + 1] - f[i]) / std::max(1.0, std::abs(f[i])) - tol, x);
    }
    rep.rows.push_back(v.finish());
}

}  // namespace

DiagnosticsReport run_diagnostics(const Snapshot& snap, const ModelParams& p,
                                  const DiagnosticsOptions& opt, long index) {
    DiagnosticsReport rep;
    const double t = snap.t;
    check_monotone_range(rep, "F_monotone_range", snap.F, Direction::decreasing, opt.mono_tol, t,
                         index);
    {
        Violation v("F_right_tail", t, index);
        const std::size_t n = snap.F.size();
        if (n >= 2) v.record(snap.F[n - 2] - opt.edge_tail, snap.F.grid.x(n - 2));
        rep.rows.push_back(v.finish());
    }
    if (snap.s) {
        // c telescopes to at most alpha1 (F(x_min) - F(x)) = alpha1 (1 - F).
        Violation v("search_rate_bound", t, index);
        try {
            const Profile c = nonlocal_rate(snap.F, *snap.s, p);
            for (std::size_t i = 0; i < c.size(); ++i)
                v.record(c[i] - p.alpha1 * (1.0 - snap.F[i]) - 1e-9 * p.alpha1, c.grid.x(i));
        } catch (const Error&) {
            v.record(kNaN, 0.0);
        }
        rep.rows.push_back(v.finish());
    }
    if (snap.w)
        check_monotone_range(rep, "w_monotone_range", *snap.w, Direction::increasing,
                             opt.mono_tol, t, index);
    if (snap.s)
        check_monotone_range(rep, "s_monotone_range", *snap.s, Direction::decreasing,
                             opt.mono_tol, t, index);
    if (snap.I) check_payoff_monotone(rep, "I_monotone", *snap.I, opt.payoff_rel_tol, t, index);
    if (snap.J) check_payoff_monotone(rep, "J_monotone", *snap.J, opt.payoff_rel_tol, t, index);

    if (snap.I && snap.J) {
        Violation v("I_le_J", t, index);
        const Profile& I = *snap.I;
        const Profile& J = *snap.J;
        for (std::size_t i = 0; i < I.size(); ++i)
            v.record((I[i] - J[i]) / std::max(1.0, std::abs(J[i])) - opt.payoff_rel_tol,
                     I.grid.x(i));
        rep.rows.push_back(v.finish());
    }

    if (snap.I) {
        const Profile& I = *snap.I;
        const double ic = critical_payoff(p);
        if (snap.s) {
            // Full-time search exactly where I >= I_c, strictly partial beyond.
            Violation v("learning_front_discipline", t, index);
            for (std::size_t i = 0; i < I.size(); ++i) {
                const double s = (*snap.s)[i];
                if (I[i] >= ic)
                    v.record(std::abs(1.0 - s) - 1e-12, I.grid.x(i));
                else if (s >= 1.0)
                    v.record(1.0, I.grid.x(i));
            }
            rep.rows.push_back(v.finish());
        }

        Violation vi("decay_I", t, index);
        Violation vs("decay_s", t, index);
        std::string note;
        try {
            const double eta = learning_front(I, p);
            for (std::size_t i = 0; i < I.size(); ++i) {
                const double x = I.grid.x(i);
                if (x <= eta) continue;
                const double bound_i = opt.decay_slack * ic * std::exp(-(x - eta));
                vi.record((I[i] - bound_i) / ic, x);
                const double bound_s = opt.decay_slack * std::exp(-2.0 * (x - eta));
                vs.record(s_m(std::max(0.0, I[i]), p) - bound_s, x);
            }
        } catch (const FrontError& e) {
            if (e.code() == FrontErrorCode::non_monotone || e.code() == FrontErrorCode::degenerate) {
                vi.record(kNaN, 0.0);
                vs.record(kNaN, 0.0);
            }
            note = e.what();  // off-grid front: the bounds are vacuous
        }
        rep.rows.push_back(vi.finish(note));
        rep.rows.push_back(vs.finish(note));
    }
    return rep;
}

namespace {

struct FrontSeries {
    std::vector<double> t, value;
};

CheckResult nongrowth(const char* name, const FrontSeries& series, const DiagnosticsOptions& opt) {
    return nongrowth_check(name, series.t, series.value, opt);
}

double try_level(const Profile& f, double level) {
    try {
        return locate_level(f, level, Direction::decreasing);
    } catch (const FrontError&) {
        return kNaN;
    }
}

}  // namespace

CheckResult nongrowth_check(std::string name, std::span<const double> t,
                            std::span<const double> values, const DiagnosticsOptions& opt) {
    if (t.size() != values.size()) throw DomainError("nongrowth_check: length mismatch");
    CheckResult row;
    row.check = std::move(name);
    row.snapshot = -1;
    std::vector<double> ts, vs;
    if (!t.empty()) {
        const double mid = 0.5 * (t.front() + t.back());
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] >= mid && std::isfinite(values[i])) {
                ts.push_back(t[i]);
                vs.push_back(values[i]);
            }
        row.time = mid;
    }
    if (ts.size() < 2) {
        row.note = "too few samples";
        return row;
    }
    const SpeedFit fit = fit_line(ts, vs);
    double level = 0.0;
    for (double v : vs) level += std::abs(v);
    level /= static_cast<double>(vs.size());
    const double allowed = std::max(opt.nongrowth_slope, opt.nongrowth_rel_slope * level);
    row.worst = std::max(0.0, fit.speed - allowed);
    row.passed = fit.speed <= allowed;
    row.location = *std::max_element(vs.begin(), vs.end());
    row.note = "final-half slope " + std::to_string(fit.speed) + " allowed " + std::to_string(allowed);
    return row;
}

DiagnosticsReport run_temporal_diagnostics(std::span<const Snapshot> snaps, const ModelParams& p,
                                           const DiagnosticsOptions& opt) {
    DiagnosticsReport rep;
    if (snaps.size() < 2) return rep;
    const double ic = critical_payoff(p);
    const auto [ta, tb] =
        trimmed_window(snaps.front().t, snaps.back().t, opt.burn_in, opt.terminal_trim);
    const bool have_i = std::all_of(snaps.begin(), snaps.end(), [](const Snapshot& s) { return s.I.has_value(); });
    const bool have_j = std::all_of(snaps.begin(), snaps.end(), [](const Snapshot& s) { return s.J.has_value(); });

    const std::size_t n = snaps.size();
    std::vector<double> eta(n, kNaN), e(n, kNaN), med(n, kNaN), g10(n, kNaN), g90(n, kNaN);
    for (std::size_t k = 0; k < n; ++k) {
        if (have_i) eta[k] = try_level(*snaps[k].I, ic);
        if (have_j) e[k] = try_level(*snaps[k].J, ic);
        med[k] = try_level(snaps[k].F, 0.5);
        g10[k] = try_level(snaps[k].F, 0.1);
        g90[k] = try_level(snaps[k].F, 0.9);
    }
    auto in_window = [&](std::size_t k) { return snaps[k].t >= ta && snaps[k].t <= tb; };

    // (d) sandwich e_l - L_fit <= eta_l <= e_l, L_fit the largest gap after burn-in.
    if (have_i && have_j) {
        FrontSeries gap;
        for (std::size_t k = 0; k < n; ++k)
            if (in_window(k)) {
                gap.t.push_back(snaps[k].t);
                gap.value.push_back(e[k] - eta[k]);
            }
        double l_fit = 0.0;
        for (double g : gap.value) l_fit = std::max(l_fit, std::isnan(g) ? l_fit : g);
        for (std::size_t k = 0; k < n; ++k) {
            Violation v("front_sandwich", snaps[k].t, static_cast<long>(k));
            const double dx = snaps[k].F.grid.dx();
            v.record(eta[k] - e[k] - 1e-9 * dx, eta[k]);
            if (in_window(k)) v.record(e[k] - l_fit - eta[k], eta[k]);
            rep.rows.push_back(v.finish());
        }
        rep.rows.push_back(nongrowth("front_sandwich_gap_nongrowing", gap, opt));

        FrontSeries lead;
        for (std::size_t k = 0; k < n; ++k)
            if (in_window(k)) {
                lead.t.push_back(snaps[k].t);
                lead.value.push_back(med[k] - eta[k]);
            }
        rep.rows.push_back(nongrowth("median_behind_learning_nongrowing", lead, opt));

        // The learning front's discrete speed stays bounded; the bound is fitted.
        Violation vb("learning_front_speed_bounded", 0.5 * (ta + tb), -1);
        const double cap = opt.learning_speed_cap * (p.kappa + p.alpha1);
        double m_fit = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            if (!in_window(k - 1) || !in_window(k)) continue;
            const double speed = std::abs(eta[k] - eta[k - 1]) / (snaps[k].t - snaps[k - 1].t);
            if (std::isfinite(speed)) m_fit = std::max(m_fit, speed);
            vb.record(speed - cap, eta[k]);
        }
        rep.rows.push_back(vb.finish("fitted bound " + std::to_string(m_fit) + " cap " + std::to_string(cap)));
    }

    if (have_j) {
        // (e) the intrinsic front moves right at speed >= kappa; (f) J grows by e^{kappa dt}.
        for (std::size_t k = 1; k < n; ++k) {
            const double dt = snaps[k].t - snaps[k - 1].t;
            Violation vs("intrinsic_front_speed", snaps[k].t, static_cast<long>(k));
            const double speed = (e[k] - e[k - 1]) / dt;
            vs.record(opt.speed_floor * p.kappa - speed, e[k]);
            rep.rows.push_back(vs.finish("speed " + std::to_string(speed)));

            Violation vg("J_growth", snaps[k].t, static_cast<long>(k));
            const Profile& J0 = *snaps[k - 1].J;
            const Profile& J1 = *snaps[k].J;
            const Profile& F0 = snaps[k - 1].F;
            const double factor = std::exp(p.kappa * dt) * (1.0 - opt.growth_slack);
            for (std::size_t i = 0; i < J0.size(); ++i) {
                if (F0[i] < opt.tail_floor) break;
                const double want = factor * J0[i];
                vg.record((want - J1[i]) / std::max(want, 1e-300), J0.grid.x(i));
            }
            rep.rows.push_back(vg.finish());
        }
    }

    // (g) level sets of F stay together.
    FrontSeries width;
    for (std::size_t k = 0; k < n; ++k) {
        Violation v("level_set_width", snaps[k].t, static_cast<long>(k));
        const double wdt = g10[k] - g90[k];
        v.record(std::isfinite(wdt) ? -wdt : kNaN, med[k]);
        rep.rows.push_back(v.finish("width " + std::to_string(wdt)));
        if (in_window(k)) {
            width.t.push_back(snaps[k].t);
            width.value.push_back(wdt);
        }
    }
    rep.rows.push_back(nongrowth("level_set_width_nongrowing", width, opt));
    return rep;
}

DiagnosticsReport run_all_diagnostics(std::span<const Snapshot> snaps, const ModelParams& p,
                                      const DiagnosticsOptions& opt) {
    DiagnosticsReport rep;
    for (std::size_t k = 0; k < snaps.size(); ++k)
        rep.append(run_diagnostics(snaps[k], p, opt, static_cast<long>(k)));
    rep.append(run_temporal_diagnostics(snaps, p, opt));
    return rep;
}

}  // namespace lmfg
