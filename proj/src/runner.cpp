#include "lmfg/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "lmfg/backward.hpp"
#include "lmfg/errors.hpp"
#include "lmfg/forward.hpp"
#include "lmfg/mfg.hpp"
#include "lmfg/model.hpp"
#include "lmfg/particles.hpp"

#ifndef LMFG_VERSION
#define LMFG_VERSION "unknown"
#endif

namespace lmfg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kFrontColumns = {"t", "x_median", "x_learning", "x_intrinsic"};

// Everything a run writes; only these are removed when a directory is reused.
const std::vector<std::string> kOwnedEntries = {
    "config.yaml",   "fronts.csv",   "fronts_pde.csv", "speeds.csv",    "diagnostics.csv",
    "residuals.csv", "manifest.json", "snapshots",     "snapshots_pde", "checkpoints"};

double level_or_nan(const Profile& f, double level) {
    try {
        return locate_level(f, level, Direction::decreasing);
    } catch (const FrontError&) {
        return kNaN;
    }
}

Profile subsample(const Profile& p, std::size_t stride) {
    if (stride == 1) return p;
    const std::size_t n = (p.grid.nx - 1) / stride + 1;
    SpaceGrid g{p.grid.x_min, p.grid.x(stride * (n - 1)), n};
    Profile out(g);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = p.values[i * stride];
    return out;
}

std::optional<Profile> subsample(const std::optional<Profile>& p, std::size_t stride) {
    if (!p) return std::nullopt;
    return subsample(*p, stride);
}

Profile strategy_of(const Profile& payoff, const ModelParams& p) {
    Profile s(payoff.grid);
    for (std::size_t i = 0; i < s.size(); ++i) s.values[i] = s_m(payoff.values[i], p);
    return s;
}

void require_finite(const Profile& F, double t, const char* what) {
    if (!F.all_finite())
        throw NumericalError(std::string("non-finite ") + what + " at t=" + format_double(t));
}

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
        const bool empty = fs::is_empty(dir);
        const bool ours = fs::exists(dir / "config.yaml") || fs::exists(dir / "manifest.json");
        if (!empty && !ours)
            throw IoError("output directory '" + dir.string() + "' is not empty and holds no previous run");
        for (const auto& name : kOwnedEntries) fs::remove_all(dir / name, ec);
    }
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

void ensure_subdir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

std::string step_name(const char* stem, std::size_t n, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%08zu%s", stem, n, ext);
    return buf;
}

void write_snapshot(const RunConfig& cfg, const fs::path& sub, std::size_t n, SnapshotFile file) {
    const std::size_t stride = cfg.output.node_stride;
    Snapshot& s = file.snap;
    s.F = subsample(s.F, stride);
    s.w = subsample(s.w, stride);
    s.I = subsample(s.I, stride);
    s.J = subsample(s.J, stride);
    s.s = subsample(s.s, stride);
    ensure_subdir(sub);
    if (cfg.output.format == SnapshotFormat::text)
        write_snapshot_text(sub / step_name("snap", n, ".txt"), file);
    else
        write_snapshot_binary(sub / step_name("snap", n, ".bin"), file);
}

DiagnosticsOptions diagnostics_options(const RunConfig& cfg) {
    DiagnosticsOptions opt;
    opt.burn_in = cfg.analysis.burn_in;
    opt.terminal_trim = cfg.analysis.terminal_trim;
    return opt;
}

/// Time-stepped modes: kpp, intrinsic, particles, compare.
class SteppedRun {
public:
    SteppedRun(const RunConfig& cfg, fs::path dir)
        : cfg_(cfg), dir_(std::move(dir)), grid_(cfg.grid1d()), nt_(grid_.time.nt) {
        front_stride_ = std::max<std::size_t>(1, cfg.stride_steps(cfg.output.front_every));
        snap_stride_ = cfg.stride_steps(cfg.output.snapshot_every);
        ck_stride_ = cfg.stride_steps(cfg.output.checkpoint_every);
        const double dt = std::max(grid_.time.dt(), cfg.grid.dt);
        switch (cfg.mode) {
            case RunMode::kpp: pde_mode_ = CouplingMode::constant_alpha; break;
            case RunMode::intrinsic: pde_mode_ = CouplingMode::intrinsic_j; break;
            case RunMode::compare: pde_mode_ = CouplingMode::rank_closure; break;
            default: break;
        }
        if (pde_mode_) stepper_.emplace(grid_.space, cfg.params, dt, ForwardConfig{*pde_mode_});
        fronts_.columns = kFrontColumns;
        if (cfg.mode == RunMode::compare) fronts_pde_.columns = kFrontColumns;
    }

    void start() {
        if (pde_mode_) F_ = ramp_front(grid_.space, cfg_.ramp_half_width);
        if (particle_mode())
            particles_ = quantile_placement(cfg_.particles.n, cfg_.ramp_half_width, cfg_.particles.seed);
        record(0);
        n_ = 0;
    }

    void restore(const RunCheckpoint& ck) {
        if (ck.step > nt_) throw IoError("checkpoint step lies beyond the run");
        n_ = ck.step;
        if (pde_mode_) {
            if (ck.F.size() != grid_.space.nx) throw IoError("checkpoint field size differs from grid");
            F_ = Profile(grid_.space, ck.F);
        }
        if (particle_mode()) {
            if (!ck.particles) throw IoError("checkpoint lacks the particle state");
            particles_ = *ck.particles;
            particles_->validate();
        }
        fronts_ = ck.fronts;
        fronts_pde_ = ck.fronts_pde;
    }

    /// Returns false when stopped early.
    bool advance(const RunOptions& opt) {
        const double dt = grid_.time.dt();
        const StrategyRule rule{cfg_.particles.rule, cfg_.particles.width, nullptr};
        while (n_ < nt_) {
            ++n_;
            if (stepper_) stepper_->step(F_.values);
            if (particles_) advance_particles(*particles_, rule, cfg_.params, dt);
            record(n_);
            if (ck_stride_ > 0 && n_ % ck_stride_ == 0 && n_ < nt_) {
                checkpoint();
                if (opt.stop_after_step && n_ >= *opt.stop_after_step) return false;
            }
        }
        return true;
    }

    const CsvTable& fronts() const { return fronts_; }
    const CsvTable& fronts_pde() const { return fronts_pde_; }

private:
    bool particle_mode() const {
        return cfg_.mode == RunMode::particles || cfg_.mode == RunMode::compare;
    }

    void record(std::size_t n) {
        const bool front = n % front_stride_ == 0 || n == nt_;
        const bool snap = n == 0 || n == nt_ || (snap_stride_ > 0 && n % snap_stride_ == 0);
        if (!front && !snap) return;
        const double t = grid_.time.t(n);
        const ModelParams& p = cfg_.params;
        const double ic = critical_payoff(p);

        if (pde_mode_) {
            require_finite(F_, t, "F");
            const Profile J = intrinsic_J(F_, p);
            const double e = level_or_nan(J, ic);
            const double med = level_or_nan(F_, 0.5);
            const bool intrinsic = cfg_.mode == RunMode::intrinsic;
            CsvTable& table = cfg_.mode == RunMode::compare ? fronts_pde_ : fronts_;
            if (front) table.rows.push_back({t, med, intrinsic ? e : kNaN, e});
            if (snap) {
                SnapshotFile f{std::string(to_string(*pde_mode_)), p, {t, F_, {}, {}, J, {}}};
                if (intrinsic) {
                    f.snap.w = Profile(grid_.space, 1.0);
                    f.snap.I = J;
                    f.snap.s = strategy_of(J, p);
                }
                write_snapshot(cfg_, dir_ / (cfg_.mode == RunMode::compare ? "snapshots_pde" : "snapshots"),
                               n, std::move(f));
            }
        }
        if (particles_) {
            const EmpiricalCdf cdf = empirical_cdf(*particles_, grid_.space);
            const Profile J = intrinsic_J(cdf.F, p);
            if (front) fronts_.rows.push_back({t, particle_median(*particles_), kNaN, level_or_nan(J, ic)});
            if (snap)
                write_snapshot(cfg_, dir_ / "snapshots", n,
                               SnapshotFile{"particles", p, {t, cdf.F, {}, {}, J, {}}});
        }
    }

    void checkpoint() {
        RunCheckpoint ck;
        ck.config_text = dump_config(cfg_);
        ck.step = n_;
        if (pde_mode_) ck.F = F_.values;
        ck.particles = particles_;
        ck.fronts = fronts_;
        ck.fronts_pde = fronts_pde_;
        ensure_subdir(dir_ / "checkpoints");
        write_checkpoint(dir_ / "checkpoints" / step_name("ckpt", n_, ".bin"), ck);
    }

    const RunConfig& cfg_;
    fs::path dir_;
    Grid1D grid_;
    std::size_t nt_;
    std::size_t n_ = 0;
    std::size_t front_stride_ = 1, snap_stride_ = 0, ck_stride_ = 0;
    std::optional<CouplingMode> pde_mode_;
    std::optional<ForwardStepper> stepper_;
    Profile F_;
    std::optional<ParticleState> particles_;
    CsvTable fronts_, fronts_pde_;
};

struct NashInfo {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

/// Logistic terminal data centred on the intrinsic learning front at T.
double automatic_terminal_center(const RunConfig& cfg, const Grid1D& grid) {
    Profile F = ramp_front(grid.space, cfg.ramp_half_width);
    if (grid.time.nt > 0) {
        ForwardStepper st(grid.space, cfg.params, grid.time.dt(), {CouplingMode::intrinsic_j});
        for (std::size_t n = 0; n < grid.time.nt; ++n) st.step(F.values);
    }
    const double e = level_or_nan(intrinsic_J(F, cfg.params), critical_payoff(cfg.params));
    if (!std::isfinite(e))
        throw NumericalError("intrinsic learning front at T is off the grid; set terminal.center");
    return e;
}

NashInfo run_nash(const RunConfig& cfg, const fs::path& dir, CsvTable& fronts) {
    const Grid1D grid = cfg.grid1d();
    const ModelParams& p = cfg.params;
    const Profile F0 = ramp_front(grid.space, cfg.ramp_half_width);
    const double center = cfg.terminal.automatic ? automatic_terminal_center(cfg, grid) : cfg.terminal.center;
    const TerminalCondition wT = TerminalCondition::logistic(center, cfg.terminal.slope);
    const MfgSolution sol = solve_nash(F0, wT, p, grid, cfg.mfg);

    CsvTable res{{"iteration", "residual"}, {}};
    for (std::size_t i = 0; i < sol.residuals.size(); ++i)
        res.rows.push_back({static_cast<double>(i + 1), sol.residuals[i]});
    write_csv(dir / "residuals.csv", res);

    const std::size_t nt = grid.time.nt;
    const std::size_t front_stride = std::max<std::size_t>(1, cfg.stride_steps(cfg.output.front_every));
    const std::size_t snap_stride = cfg.stride_steps(cfg.output.snapshot_every);
    const double ic = critical_payoff(p);
    fronts.columns = kFrontColumns;
    for (std::size_t n = 0; n <= nt; ++n) {
        const bool front = n % front_stride == 0 || n == nt;
        const bool snap = n == 0 || n == nt || (snap_stride > 0 && n % snap_stride == 0);
        if (!front && !snap) continue;
        const double t = grid.time.t(n);
        const Profile F = sol.F_field.profile(n);
        const Profile w = sol.w_field.profile(n);
        require_finite(F, t, "F");
        require_finite(w, t, "w");
        const Profile I = payoff_I(F, w, p);
        const Profile J = intrinsic_J(F, p);
        if (front) fronts.rows.push_back({t, level_or_nan(F, 0.5), level_or_nan(I, ic), level_or_nan(J, ic)});
        if (snap)
            write_snapshot(cfg, dir / "snapshots", n,
                           SnapshotFile{"nash", p, {t, F, w, I, J, strategy_of(I, p)}});
    }
    return {sol.converged, sol.iterations, sol.residuals.empty() ? 0.0 : sol.residuals.back()};
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_manifest(const RunConfig& cfg, const fs::path& dir, const DiagnosticsReport& diag,
                    const std::optional<NashInfo>& nash) {
    nlohmann::ordered_json m;
    m["tool"] = "lmfg";
    m["version"] = LMFG_VERSION;
    m["config_schema"] = kConfigSchema;
    m["name"] = cfg.name;
    m["mode"] = std::string(to_string(cfg.mode));
    m["config_sha256"] = sha256_file(dir / "config.yaml");
    m["seeds"] = nlohmann::json::array();
    if (cfg.mode == RunMode::particles || cfg.mode == RunMode::compare)
        m["seeds"].push_back(cfg.particles.seed);
    m["diagnostics"] = {{"passed", diag.all_passed()}, {"failures", diag.failures()},
                        {"checks", diag.rows.size()}};
    if (nash)
        m["nash"] = {{"converged", nash->converged}, {"iterations", nash->iterations},
                     {"final_residual", nash->residual}};

    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.json")
            files.push_back(fs::relative(e.path(), dir));
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
    auto& list = m["files"] = nlohmann::json::array();
    for (const auto& f : files)
        list.push_back({{"path", f.generic_string()},
                        {"sha256", sha256_file(dir / f)},
                        {"bytes", fs::file_size(dir / f)}});
    write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

RunOutcome finish(const RunConfig& cfg, const fs::path& dir, const CsvTable& fronts,
                  const CsvTable& fronts_pde, const std::optional<NashInfo>& nash) {
    RunOutcome out;
    out.dir = dir;
    write_csv(dir / "fronts.csv", fronts);
    const auto [a, b] = cfg.fit_window();
    out.speeds = fit_speeds(fronts, a, b);
    if (!fronts_pde.columns.empty()) {
        write_csv(dir / "fronts_pde.csv", fronts_pde);
        const auto pde = fit_speeds(fronts_pde, a, b, "_pde");
        out.speeds.insert(out.speeds.end(), pde.begin(), pde.end());
    }
    write_speeds_csv(dir / "speeds.csv", out.speeds);

    const DiagnosticsOptions opt = diagnostics_options(cfg);
    out.diagnostics = diagnose_snapshots(dir / "snapshots", opt);
    if (fs::exists(dir / "snapshots_pde")) {
        DiagnosticsReport pde = diagnose_snapshots(dir / "snapshots_pde", opt);
        for (auto& row : pde.rows) row.check = "pde/" + row.check;
        out.diagnostics.append(pde);
    }
    write_diagnostics_csv(dir / "diagnostics.csv", out.diagnostics);
    if (nash) {
        out.nash_converged = nash->converged;
        out.nash_iterations = nash->iterations;
        out.nash_residual = nash->residual;
    }
    write_manifest(cfg, dir, out.diagnostics, nash);
    return out;
}

}  // namespace

const SpeedRow* RunOutcome::speed(const std::string& front) const {
    for (const auto& r : speeds)
        if (r.front == front) return &r;
    return nullptr;
}

fs::path resolve_output_dir(const RunConfig& cfg) {
    const fs::path d(cfg.output.dir);
    if (d.is_absolute()) return d;
    const char* root = std::getenv(kOutputRootEnv);
    return (root && *root ? fs::path(root) : fs::current_path()) / d;
}

RunOutcome run_experiment(const RunConfig& cfg, const fs::path& dir, const RunOptions& opt) {
    prepare_dir(dir);
    write_text_file(dir / "config.yaml", dump_config(cfg));
    if (cfg.mode == RunMode::nash) {
        CsvTable fronts;
        const NashInfo info = run_nash(cfg, dir, fronts);
        return finish(cfg, dir, fronts, {}, info);
    }
    SteppedRun run(cfg, dir);
    run.start();
    if (!run.advance(opt)) {
        RunOutcome out;
        out.dir = dir;
        out.finished = false;
        return out;
    }
    return finish(cfg, dir, run.fronts(), run.fronts_pde(), std::nullopt);
}

RunOutcome resume_experiment(const fs::path& checkpoint, const RunOptions& opt) {
    const RunCheckpoint ck = read_checkpoint(checkpoint);
    const RunConfig cfg = parse_config(ck.config_text);
    if (cfg.mode == RunMode::nash) throw ConfigError("mode", 0, "nash runs are not resumable");
    const fs::path dir = fs::absolute(checkpoint).parent_path().parent_path();
    SteppedRun run(cfg, dir);
    run.restore(ck);
    if (!run.advance(opt)) {
        RunOutcome out;
        out.dir = dir;
        out.finished = false;
        return out;
    }
    return finish(cfg, dir, run.fronts(), run.fronts_pde(), std::nullopt);
}

std::vector<SpeedRow> fit_speeds(const CsvTable& fronts, double t_begin, double t_end,
                                 const std::string& suffix) {
    std::vector<SpeedRow> out;
    auto fit = [&](const std::string& name, const FrontTrack& track) {
        SpeedRow row{name + suffix, {}, {}};
        row.fit.t_begin = t_begin;
        row.fit.t_end = t_end;
        try {
            row.fit = estimate_speed(track, t_begin, t_end);
        } catch (const DomainError& e) {
            row.fit.speed = row.fit.intercept = row.fit.r2 = kNaN;
            row.note = e.what();
        }
        out.push_back(std::move(row));
    };
    auto has_finite = [](const FrontTrack& tr) {
        return std::any_of(tr.x.begin(), tr.x.end(), [](double v) { return std::isfinite(v); });
    };
    if (fronts.columns.empty() || fronts.columns[0] != "t") throw IoError("fronts table must start with t");
    for (std::size_t c = 1; c < fronts.columns.size(); ++c) {
        const std::string& col = fronts.columns[c];
        if (col.rfind("x_", 0) != 0) continue;
        const FrontTrack tr = track_from_csv(fronts, col);
        if (has_finite(tr)) fit(col.substr(2), tr);
    }
    const auto has = [&](const char* c) {
        return std::find(fronts.columns.begin(), fronts.columns.end(), c) != fronts.columns.end();
    };
    if (has("x_learning") && has("x_median")) {
        const FrontTrack lead = track_from_csv(fronts, "x_learning");
        const FrontTrack med = track_from_csv(fronts, "x_median");
        FrontTrack gap;
        for (std::size_t i = 0; i < lead.size(); ++i) gap.push(lead.t[i], lead.x[i] - med.x[i]);
        if (has_finite(gap)) fit("gap", gap);
    }
    return out;
}

DiagnosticsReport diagnose_snapshots(const fs::path& dir, const DiagnosticsOptions& opt) {
    const std::vector<SnapshotFile> files = read_snapshot_dir(dir);
    if (files.empty()) throw IoError("no snapshots in '" + dir.string() + "'");
    std::vector<Snapshot> snaps;
    snaps.reserve(files.size());
    for (const auto& f : files) snaps.push_back(f.snap);
    const ModelParams& p = files.front().params;
    if (files.front().mode == "particles") {
        DiagnosticsReport rep;
        for (std::size_t k = 0; k < snaps.size(); ++k)
            rep.append(run_diagnostics(snaps[k], p, opt, static_cast<long>(k)));
        return rep;
    }
    return run_all_diagnostics(snaps, p, opt);
}

void write_speeds_csv(const fs::path& path, const std::vector<SpeedRow>& rows) {
    std::string body = "front,speed,intercept,r2,t_begin,t_end,samples\n";
    for (const auto& r : rows)
        body += r.front + "," + format_double(r.fit.speed) + "," + format_double(r.fit.intercept) + "," +
                format_double(r.fit.r2) + "," + format_double(r.fit.t_begin) + "," +
                format_double(r.fit.t_end) + "," + std::to_string(r.fit.samples) + "\n";
    write_text_file(path, body);
}

void write_diagnostics_csv(const fs::path& path, const DiagnosticsReport& rep) {
    std::string body = "check,snapshot,t,passed,worst,location,note\n";
    for (const auto& r : rep.rows)
        body += r.check + "," + std::to_string(r.snapshot) + "," + format_double(r.time) + "," +
                (r.passed ? "1" : "0") + "," + format_double(r.worst) + "," +
                format_double(r.location) + "," + csv_quote(r.note) + "\n";
    write_text_file(path, body);
}

}  // namespace lmfg
