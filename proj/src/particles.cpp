#include "lmfg/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "lmfg/errors.hpp"

namespace lmfg {

ParticleState ParticleState::make(std::vector<double> positions, std::uint64_t seed, double t0) {
    ParticleState st;
    st.positions = std::move(positions);
    st.stream_ids.resize(st.positions.size());
    std::iota(st.stream_ids.begin(), st.stream_ids.end(), 0u);
    st.time = t0;
    st.seed = seed;
    st.validate();
    return st;
}

ParticleState quantile_placement(std::size_t n, double L0, std::uint64_t seed) {
    if (!(L0 >= 0.0 && std::isfinite(L0))) throw DomainError("ramp half-width must be >= 0");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = L0 * (2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n) - 1.0);
    return ParticleState::make(std::move(x), seed);
}

void ParticleState::validate() const {
    if (positions.size() < 2) throw DomainError("particle system needs at least 2 agents");
    if (positions.size() > std::numeric_limits<std::uint32_t>::max())
        throw DomainError("too many agents for 32-bit stream ids");
    if (stream_ids.size() != positions.size())
        throw DomainError("stream_ids and positions differ in length");
    for (double x : positions)
        if (!std::isfinite(x)) throw DomainError("non-finite particle position");
    if (!std::isfinite(time)) throw DomainError("non-finite particle time");
}

std::string_view to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::rank: return "rank";
        case StrategyKind::smoothed_rank: return "smoothed-rank";
        case StrategyKind::ratio: return "ratio";
        case StrategyKind::pde_lookup: return "pde-lookup";
    }
    return "?";
}

StrategyKind parse_strategy_kind(std::string_view name) {
    for (auto k : {StrategyKind::rank, StrategyKind::smoothed_rank, StrategyKind::ratio,
                   StrategyKind::pde_lookup})
        if (to_string(k) == name) return k;
    throw DomainError("unknown strategy rule '" + std::string(name) + "'");
}

void StrategyRule::validate() const {
    if (kind == StrategyKind::smoothed_rank && !(width > 0.0 && std::isfinite(width)))
        throw DomainError("smoothed-rank needs a positive width");
    if (kind == StrategyKind::pde_lookup && !field)
        throw DomainError("pde-lookup needs a strategy field");
}

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

namespace {

std::vector<double> sorted_positions(const ParticleState& st) {
    std::vector<double> xs = st.positions;
    std::sort(xs.begin(), xs.end());
    return xs;
}

std::vector<double> rank_strategy(const ParticleState& st) {
    const std::size_t n = st.n();
    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = {st.positions[i], i};
    std::sort(order.begin(), order.end());
    // Walking down from the top, ties share the count of everything at or above them.
    std::vector<double> s(n);
    const double inv = 1.0 / static_cast<double>(n);
    std::size_t hi = n;
    while (hi > 0) {
        std::size_t lo = hi - 1;
        while (lo > 0 && order[lo - 1].first == order[lo].first) --lo;
        const double v = static_cast<double>(n - lo) * inv;
        for (std::size_t r = lo; r < hi; ++r) s[order[r].second] = v;
        hi = lo;
    }
    return s;
}

std::vector<double> smoothed_rank_strategy(const ParticleState& st, double width) {
    const auto xs = sorted_positions(st);
    const double n = static_cast<double>(xs.size());
    std::vector<double> s(st.n());
    for (std::size_t k = 0; k < st.n(); ++k) {
        const double x = st.positions[k];
        auto lo = std::upper_bound(xs.begin(), xs.end(), x);
        auto hi = std::lower_bound(lo, xs.end(), x + width);
        double acc = static_cast<double>(xs.end() - hi);
        for (auto it = lo; it != hi; ++it) acc += smooth_step((*it - x) / width);
        s[k] = acc / n;
    }
    return s;
}

std::vector<double> lookup_strategy(const ParticleState& st, const SpaceTimeField& field) {
    const Grid1D& g = field.grid;
    std::size_t slice = 0;
    const double dt = g.time.dt();
    if (dt > 0.0) {
        const double pos = std::floor((st.time - g.time.t0) / dt + 1e-9);
        slice = pos <= 0.0 ? 0 : std::min(g.time.nt, static_cast<std::size_t>(pos));
    }
    const Profile prof = field.profile(slice);
    std::vector<double> s(st.n());
    for (std::size_t k = 0; k < st.n(); ++k) {
        const double x = std::clamp(st.positions[k], g.space.x_min, g.space.x_max);
        s[k] = std::clamp(interp_linear(prof, x), 0.0, 1.0);
    }
    return s;
}

}  // namespace

std::vector<double> ratio_sums(const ParticleState& st) {
    const auto xs = sorted_positions(st);
    const std::size_t n = xs.size();
    const double top = xs.back();
    // suffix[i] = sum_{j >= i} e^{xs_j - top}
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + std::exp(xs[i] - top);
    std::vector<double> out(st.n());
    for (std::size_t k = 0; k < st.n(); ++k) {
        const double x = st.positions[k];
        const auto lb = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
        const double sum = std::exp(top - x) * suffix[lb] - static_cast<double>(n - lb);
        out[k] = std::max(0.0, sum) / static_cast<double>(n);
    }
    return out;
}

std::vector<double> eval_strategy(const ParticleState& st, const StrategyRule& rule) {
    rule.validate();
    switch (rule.kind) {
        case StrategyKind::rank: return rank_strategy(st);
        case StrategyKind::smoothed_rank: return smoothed_rank_strategy(st, rule.width);
        case StrategyKind::ratio: {
            auto s = ratio_sums(st);
            for (double& v : s) v = std::min(1.0, v);
            return s;
        }
        case StrategyKind::pde_lookup: return lookup_strategy(st, *rule.field);
    }
    throw DomainError("unknown strategy rule");
}

double particle_dt_max(const ModelParams& p) {
    return p.alpha1 > 0.0 ? 0.1 / p.alpha1 : std::numeric_limits<double>::infinity();
}

void advance_particles(ParticleState& st, const StrategyRule& rule, const ModelParams& p,
                       double dt) {
    st.validate();
    if (!(dt > 0.0 && std::isfinite(dt))) throw DomainError("particle dt must be positive");
    if (dt > particle_dt_max(p) * (1.0 + 1e-12))
        throw DomainError("particle dt exceeds 0.1/alpha1");

    const std::size_t n = st.n();
    const std::vector<double> s = eval_strategy(st, rule);
    const std::vector<double> snap = st.positions;

    // Agents ordered by stream id; the partner draw indexes "the others" in this order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    bool identity = true;
    for (std::size_t i = 0; i < n && identity; ++i) identity = st.stream_ids[i] == i;
    if (!identity)
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return st.stream_ids[a] < st.stream_ids[b]; });
    std::vector<std::size_t> rank_of(n);
    for (std::size_t r = 0; r < n; ++r) rank_of[order[r]] = r;

    const CounterRng rng{st.seed};
    const double sigma = std::sqrt(2.0 * p.kappa * dt);
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint32_t id = st.stream_ids[k];
        const auto jw = rng.draw(st.step, id, DrawPurpose::jump);
        const double fire = -std::expm1(-alpha(s[k], p) * dt);
        if (unit_open(jw[0], jw[1]) < fire) {
            std::uint64_t r = bounded(jw[2], jw[3], n - 1);
            if (r >= rank_of[k]) ++r;
            const double target = snap[order[r]];
            if (target > snap[k]) st.positions[k] = target;
        }
        if (sigma > 0.0)
            st.positions[k] += sigma * standard_normal(rng.draw(st.step, id, DrawPurpose::innovation));
    }
    st.time += dt;
    ++st.step;
}

ParticleState step_particles(ParticleState st, const StrategyRule& rule, const ModelParams& p,
                             double dt) {
    advance_particles(st, rule, p, dt);
    return st;
}

EmpiricalCdf empirical_cdf(const ParticleState& st, const SpaceGrid& grid) {
    grid.validate();
    const auto xs = sorted_positions(st);
    const double n = static_cast<double>(xs.size());
    EmpiricalCdf out{Profile(grid), 0};
    for (std::size_t i = 0; i < grid.nx; ++i) {
        const auto ub = std::upper_bound(xs.begin(), xs.end(), grid.x(i));
        out.F.values[i] = static_cast<double>(xs.end() - ub) / n;
    }
    for (double x : xs)
        if (x < grid.x_min || x > grid.x_max) ++out.outside;
    return out;
}

double particle_median(const ParticleState& st) {
    const auto xs = sorted_positions(st);
    const std::size_t n = xs.size();
    if (n == 0) throw DomainError("median of an empty particle set");
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace lmfg
