// lmfg: run, inspect and resume knowledge-diffusion experiments.

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>
#include <string>

#include "lmfg/config.hpp"
#include "lmfg/errors.hpp"
#include "lmfg/io.hpp"
#include "lmfg/presets.hpp"
#include "lmfg/runner.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

void print_outcome(const lmfg::RunOutcome& out) {
    if (!out.finished) {
        std::printf("stopped at checkpoint; resume from %s\n", (out.dir / "checkpoints").c_str());
        return;
    }
    std::printf("output: %s\n", out.dir.c_str());
    for (const auto& s : out.speeds) {
        if (s.ok())
            std::printf("  speed %-16s %.6f  (r2 %.5f, %zu samples, t in [%g, %g])\n", s.front.c_str(),
                        s.fit.speed, s.fit.r2, s.fit.samples, s.fit.t_begin, s.fit.t_end);
        else
            std::printf("  speed %-16s n/a (%s)\n", s.front.c_str(), s.note.c_str());
    }
    if (out.nash_iterations > 0)
        std::printf("  nash: %s after %d iterations, residual %.3g\n",
                    out.nash_converged ? "converged" : "NOT converged", out.nash_iterations,
                    out.nash_residual);
    const auto& d = out.diagnostics;
    std::printf("  diagnostics: %zu checks, %zu failed\n", d.rows.size(), d.failures());
    for (const auto& r : d.rows)
        if (!r.passed)
            std::printf("    FAIL %s (snapshot %ld, t=%g): worst %.3g at x=%g %s\n", r.check.c_str(),
                        r.snapshot, r.time, r.worst, r.location, r.note.c_str());
}

lmfg::fs::path output_dir(const lmfg::RunConfig& cfg, const std::string& override_dir) {
    return override_dir.empty() ? lmfg::resolve_output_dir(cfg) : lmfg::fs::path(override_dir);
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return kOk;
    } catch (const lmfg::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const lmfg::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const lmfg::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-diffusion mean-field game lab"};
    app.require_subcommand(1);

    std::string config_path, out_dir, preset_name, track_path, snap_dir, ckpt_path;
    std::pair<double, double> window{0.0, 0.0};
    bool print_only = false, list = false;

    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory (default: $LMFG_OUTPUT_ROOT/<output.dir>)");

    auto* preset = app.add_subcommand("preset", "run or print a shipped preset");
    preset->add_option("name", preset_name, "preset name");
    preset->add_option("--out", out_dir, "output directory");
    preset->add_flag("--print", print_only, "print the preset config instead of running it");
    preset->add_flag("--list", list, "list preset names");

    auto* speeds = app.add_subcommand("speeds", "fit front speeds in a fronts CSV");
    speeds->add_option("track", track_path, "fronts CSV")->required();
    speeds->add_option("--window", window, "fit window a,b")->delimiter(',')->required();

    auto* diag = app.add_subcommand("diag", "run the invariant checks on a snapshot directory");
    diag->add_option("dir", snap_dir, "snapshot directory")->required();

    auto* resume = app.add_subcommand("resume", "continue a run from a checkpoint");
    resume->add_option("checkpoint", ckpt_path, "checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    if (*run)
        return guarded([&] {
            const auto cfg = lmfg::load_config(config_path);
            print_outcome(lmfg::run_experiment(cfg, output_dir(cfg, out_dir)));
        });

    if (*preset)
        return guarded([&] {
            if (list || preset_name.empty()) {
                for (const auto& n : lmfg::preset_names()) std::printf("%s\n", n.c_str());
                return;
            }
            const std::string text = lmfg::preset_text(preset_name);
            if (print_only) {
                std::fputs(text.c_str(), stdout);
                return;
            }
            const auto cfg = lmfg::parse_config(text);
            print_outcome(lmfg::run_experiment(cfg, output_dir(cfg, out_dir)));
        });

    if (*speeds)
        return guarded([&] {
            const auto rows = lmfg::fit_speeds(lmfg::read_csv(track_path), window.first, window.second);
            std::printf("front,speed,intercept,r2,t_begin,t_end,samples\n");
            for (const auto& r : rows)
                std::printf("%s,%s,%s,%s,%s,%s,%zu\n", r.front.c_str(),
                            lmfg::format_double(r.fit.speed).c_str(),
                            lmfg::format_double(r.fit.intercept).c_str(),
                            lmfg::format_double(r.fit.r2).c_str(),
                            lmfg::format_double(r.fit.t_begin).c_str(),
                            lmfg::format_double(r.fit.t_end).c_str(), r.fit.samples);
        });

    if (*diag)
        return guarded([&] {
            const auto rep = lmfg::diagnose_snapshots(snap_dir);
            std::printf("%zu checks, %zu failed\n", rep.rows.size(), rep.failures());
            for (const auto& r : rep.rows)
                if (!r.passed)
                    std::printf("FAIL %s (snapshot %ld, t=%g): worst %.3g at x=%g %s\n", r.check.c_str(),
                                r.snapshot, r.time, r.worst, r.location, r.note.c_str());
        });

    if (*resume) return guarded([&] { print_outcome(lmfg::resume_experiment(ckpt_path)); });
    return kOk;
}
