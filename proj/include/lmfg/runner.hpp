#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lmfg/analysis.hpp"
#include "lmfg/config.hpp"
#include "lmfg/io.hpp"

namespace lmfg {

inline constexpr const char* kOutputRootEnv = "LMFG_OUTPUT_ROOT";

/// Fitted speed of one front column (or of the learning-median gap).
struct SpeedRow {
    std::string front;
    SpeedFit fit;
    std::string note;  // why the fit is missing, if it is
    bool ok() const { return note.empty(); }
};

struct RunOutcome {
    fs::path dir;
    DiagnosticsReport diagnostics;
    std::vector<SpeedRow> speeds;
    bool finished = true;      // false when stopped early at a checkpoint
    // Nash mode only.
    bool nash_converged = false;
    int nash_iterations = 0;
    double nash_residual = 0.0;

    const SpeedRow* speed(const std::string& front) const;
};

struct RunOptions {
    /// Stop right after writing the checkpoint at this step (simulated interruption).
    std::optional<std::uint64_t> stop_after_step;
};

/// output.dir under $LMFG_OUTPUT_ROOT (default: the working directory) unless absolute.
fs::path resolve_output_dir(const RunConfig& cfg);

/// Runs an experiment into `dir`, which must be empty, absent, or a previous run.
/// Throws ConfigError, NumericalError or IoError on hard failures; failed
/// diagnostics are reported in the outcome and the manifest only.
RunOutcome run_experiment(const RunConfig& cfg, const fs::path& dir, const RunOptions& opt = {});

/// Continues a run from checkpoints/<file>; the output directory is the
/// checkpoint's grandparent.
RunOutcome resume_experiment(const fs::path& checkpoint, const RunOptions& opt = {});

/// Fits every x_* column of a fronts table over [t_begin, t_end], plus the gap
/// x_learning - x_median when both are present. Names get `suffix` appended.
std::vector<SpeedRow> fit_speeds(const CsvTable& fronts, double t_begin, double t_end,
                                 const std::string& suffix = "");

/// Diagnostics over a directory of snapshots. Particle snapshots get the
/// per-snapshot checks only; PDE snapshots get the temporal checks as well.
DiagnosticsReport diagnose_snapshots(const fs::path& dir, const DiagnosticsOptions& opt = {});

void write_speeds_csv(const fs::path& path, const std::vector<SpeedRow>& rows);
void write_diagnostics_csv(const fs::path& path, const DiagnosticsReport& rep);

}  // namespace lmfg
