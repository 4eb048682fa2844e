#include "lmfg/presets.hpp"

#include <array>
#include <utility>

#include "lmfg/errors.hpp"

namespace lmfg {

namespace {

constexpr const char* kKpp = R"(schema: 1
name: kpp
mode: kpp
params: {kappa: 1.0, rho: 2.0, alpha1: 1.0, k: 0.5}
grid: {x_min: -20.0, x_max: 160.0, dx: 0.05, dt: 0.01, t_final: 60.0}
initial: {ramp_half_width: 1.0}
output: {dir: kpp, snapshot_every: 10.0, front_every: 0.5}
analysis: {window: [30.0, 60.0]}
)";

constexpr const char* kLotteryIntrinsic = R"(schema: 1
name: lottery-intrinsic
mode: intrinsic
params: {kappa: 1.0, rho: 2.0, alpha1: 0.25, k: 0.5}
grid: {x_min: -20.0, x_max: auto, dx: 0.05, dt: 0.02, t_final: 120.0}
initial: {ramp_half_width: 1.0}
output: {dir: lottery-intrinsic, snapshot_every: 5.0, front_every: 0.5}
analysis: {burn_in: 0.1, terminal_trim: 0.1}
)";

constexpr const char* kLotteryNash = R"(schema: 1
name: lottery-nash
mode: nash
params: {kappa: 1.0, rho: 2.0, alpha1: 0.25, k: 0.5}
grid: {x_min: -20.0, x_max: auto, dx: 0.1, dt: 0.02, t_final: 40.0}
initial: {ramp_half_width: 1.0}
terminal: {kind: auto, slope: 1.0}
mfg: {damping: 0.5, tol: 1.0e-6, max_iter: 50}
output: {dir: lottery-nash, snapshot_every: 1.0, front_every: 0.5}
analysis: {burn_in: 0.1, terminal_trim: 0.1}
)";

constexpr const char* kBgpProbe = R"(schema: 1
name: bgp-probe
mode: intrinsic
params: {kappa: 1.0, rho: 2.0, alpha1: 4.0, k: 0.5}
grid: {x_min: -20.0, x_max: auto, dx: 0.05, dt: 0.02, t_final: 60.0}
initial: {ramp_half_width: 1.0}
output: {dir: bgp-probe, snapshot_every: 5.0, front_every: 0.5}
analysis: {window: [30.0, 60.0]}
)";

constexpr const char* kParticlesRank = R"(schema: 1
name: particles-rank
mode: particles
params: {kappa: 1.0, rho: 2.0, alpha1: 1.0, k: 0.5}
grid: {x_min: -20.0, x_max: auto, dx: 0.05, dt: 0.05, t_final: 40.0}
initial: {ramp_half_width: 1.0}
particles: {n: 20000, rule: rank, seed: 20240601}
output: {dir: particles-rank, snapshot_every: 5.0, front_every: 0.5}
analysis: {burn_in: 0.1, terminal_trim: 0.1}
)";

constexpr const char* kParticlesRatio = R"(schema: 1
name: particles-ratio
mode: particles
params: {kappa: 1.0, rho: 2.0, alpha1: 1.0, k: 0.5}
grid: {x_min: -20.0, x_max: auto, dx: 0.05, dt: 0.05, t_final: 40.0}
initial: {ramp_half_width: 1.0}
particles: {n: 20000, rule: ratio, seed: 20240602}
output: {dir: particles-ratio, snapshot_every: 5.0, front_every: 0.5}
analysis: {burn_in: 0.1, terminal_trim: 0.1}
)";

constexpr const char* kCompare = R"(schema: 1
name: compare-particle-pde
mode: compare
params: {kappa: 1.0, rho: 2.0, alpha1: 1.0, k: 0.5}
grid: {x_min: -20.0, x_max: auto, dx: 0.05, dt: 0.05, t_final: 60.0}
initial: {ramp_half_width: 1.0}
particles: {n: 100000, rule: rank, seed: 20240603}
output: {dir: compare-particle-pde, snapshot_every: 10.0, front_every: 0.5}
analysis: {burn_in: 0.1, terminal_trim: 0.1, window: [20.0, 50.0]}
)";

constexpr std::array<std::pair<const char*, const char*>, 7> kPresets{{
    {"kpp", kKpp},
    {"lottery-intrinsic", kLotteryIntrinsic},
    {"lottery-nash", kLotteryNash},
    {"bgp-probe", kBgpProbe},
    {"particles-rank", kParticlesRank},
    {"particles-ratio", kParticlesRatio},
    {"compare-particle-pde", kCompare},
}};

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : kPresets) out.emplace_back(name);
    return out;
}

std::string preset_text(std::string_view name) {
    for (const auto& [n, text] : kPresets)
        if (name == n) return text;
    throw ConfigError("preset", 0, "unknown preset '" + std::string(name) + "'");
}

}  // namespace lmfg
