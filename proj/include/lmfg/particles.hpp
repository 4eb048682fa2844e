#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "lmfg/grid.hpp"
#include "lmfg/model.hpp"
#include "lmfg/rng.hpp"

namespace lmfg {

/// N agents with log-productivities x_i.
///
/// stream_ids name each agent's RNG streams and define the agent order used to
/// pick search partners, so permuting positions and ids together permutes the
/// outcome of a step.
struct ParticleState {
    std::vector<double> positions;
    std::vector<std::uint32_t> stream_ids;
    double time = 0.0;
    std::uint64_t step = 0;
    std::uint64_t seed = 0;

    std::size_t n() const { return positions.size(); }

    /// Ids 0..N-1; throws DomainError for N < 2 or non-finite positions.
    static ParticleState make(std::vector<double> positions, std::uint64_t seed, double t0 = 0.0);

    void validate() const;

    bool operator==(const ParticleState&) const = default;
};

/// Deterministic placement at the quantiles of the ramp front with half-width L0:
/// x_i = L0 (2 (i + 1/2) / N - 1), i.e. F_emp matches the ramp to within 1/N.
ParticleState quantile_placement(std::size_t n, double L0, std::uint64_t seed);

enum class StrategyKind { rank, smoothed_rank, ratio, pde_lookup };

std::string_view to_string(StrategyKind k);
StrategyKind parse_strategy_kind(std::string_view name);

struct StrategyRule {
    StrategyKind kind = StrategyKind::rank;
    double width = 0.0;                            // smoothed_rank kernel width in x
    std::shared_ptr<const SpaceTimeField> field;   // pde_lookup strategy field

    void validate() const;
};

/// Per-agent search fractions in [0,1].
///
/// rank:          #{m : x_m >= x_k} / N (self included)
/// smoothed_rank: (1/N) sum_m zeta((x_m - x_k)/width), zeta a smooth step 0 -> 1 on [0,1]
/// ratio:         min(1, (1/N) sum_{z_m >= z_k} (z_m/z_k - 1)), z = e^x
/// pde_lookup:    field value at (x_k, t), piecewise constant in time
std::vector<double> eval_strategy(const ParticleState& state, const StrategyRule& rule);

/// Unclamped ratio sums (1/N) sum_{z_m >= z_k} (z_m/z_k - 1).
std::vector<double> ratio_sums(const ParticleState& state);

/// Smooth step: 0 for u <= 0, 1 for u >= 1, C-infinity in between.
double smooth_step(double u);

/// Largest step with per-agent firing probability <= 1 - e^{-0.1}: 0.1 / alpha1.
double particle_dt_max(const ModelParams& p);

/// One tau-leap of length dt with snapshot semantics: every agent fires with
/// probability 1 - exp(-alpha(s_k) dt), draws a uniform other agent and adopts
/// its start-of-step position when strictly higher; then every agent adds a
/// N(0, 2 kappa dt) innovation.
void advance_particles(ParticleState& state, const StrategyRule& rule, const ModelParams& p,
                       double dt);

ParticleState step_particles(ParticleState state, const StrategyRule& rule, const ModelParams& p,
                             double dt);

struct EmpiricalCdf {
    Profile F;
    std::size_t outside = 0;  // particles outside [x_min, x_max]
};

/// F(x) = #{i : x_i > x} / N at each node.
EmpiricalCdf empirical_cdf(const ParticleState& state, const SpaceGrid& grid);

/// Sample median of the positions (the x where the empirical F crosses 1/2).
double particle_median(const ParticleState& state);

}  // namespace lmfg
