#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "lmfg/backward.hpp"
#include "lmfg/grid.hpp"
#include "lmfg/mfg.hpp"
#include "lmfg/model.hpp"
#include "lmfg/particles.hpp"

namespace lmfg {

inline constexpr int kConfigSchema = 1;

enum class RunMode { kpp, intrinsic, nash, particles, compare };

std::string_view to_string(RunMode m);

struct GridSpec {
    double x_min = -20.0;
    std::optional<double> x_max;  // empty: sized from the run length and the theory speeds
    double dx = 0.05;
    double dt = 0.01;
    double t_final = 40.0;
};

struct TerminalSpec {
    bool automatic = true;  // logistic centred on the intrinsic learning front at T
    double center = 0.0;
    double slope = 1.0;
};

struct ParticleSpec {
    std::size_t n = 0;
    StrategyKind rule = StrategyKind::rank;
    double width = 1.0;
    std::uint64_t seed = 0;
};

enum class SnapshotFormat { text, binary };

struct OutputSpec {
    std::string dir;
    double snapshot_every = 0.0;   // 0: first and last slice only
    double front_every = 0.5;
    std::size_t node_stride = 1;
    SnapshotFormat format = SnapshotFormat::text;
    double checkpoint_every = 0.0; // 0: no checkpoints
};

struct AnalysisSpec {
    double burn_in = 0.1;
    double terminal_trim = 0.1;
    std::optional<std::pair<double, double>> window;
};

struct RunConfig {
    std::string name;
    RunMode mode = RunMode::intrinsic;
    ModelParams params;
    GridSpec grid;
    double ramp_half_width = 1.0;
    TerminalSpec terminal;
    MfgConfig mfg;
    ParticleSpec particles;
    OutputSpec output;
    AnalysisSpec analysis;

    /// Spatial grid with dx honoured exactly (x_max rounded up to a whole cell).
    SpaceGrid space_grid() const;
    Grid1D grid1d() const;
    /// Steps between recorded events; 0 for "never".
    std::size_t stride_steps(double every) const;
    std::pair<double, double> fit_window() const;
};

/// x_max default: the furthest theory front plus Gaussian spreading and a margin.
double auto_x_max(const ModelParams& p, double t_final);

/// Parses and validates a config document; throws ConfigError naming field and line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical YAML rendering; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const RunConfig& c);

}  // namespace lmfg
