#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "lmfg/config.hpp"
#include "lmfg/errors.hpp"
#include "lmfg/io.hpp"
#include "lmfg/presets.hpp"
#include "lmfg/runner.hpp"

using namespace lmfg;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() /
                       ("lmfg-unit-" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Every regular file under `root`, relative, with its bytes.
std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_bytes(e.path());
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LMFG_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

constexpr const char* kTiny = R"(schema: 1
name: tiny
mode: particles
params: {kappa: 1.0, rho: 2.0, alpha1: 1.0, k: 0.5}
grid: {x_min: -20.0, x_max: 40.0, dx: 0.1, dt: 0.05, t_final: 5.0}
initial: {ramp_half_width: 1.0}
particles: {n: 2000, rule: rank, seed: 7}
output: {dir: tiny, snapshot_every: 1.0, front_every: 0.5, checkpoint_every: 1.0}
)";

int config_error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("every preset parses and round-trips through the canonical dump") {
    CHECK(preset_names().size() == 7);
    for (const auto& name : preset_names()) {
        INFO(name);
        const RunConfig c = parse_config(preset_text(name));
        CHECK(c.name == name);
        const std::string dumped = dump_config(c);
        CHECK(dump_config(parse_config(dumped)) == dumped);
        const RunConfig back = parse_config(dumped);
        CHECK(back.space_grid() == c.space_grid());
        CHECK(back.grid1d() == c.grid1d());
        CHECK(back.particles.seed == c.particles.seed);
    }
    CHECK_THROWS_AS(preset_text("nope"), ConfigError);
}

TEST_CASE("config errors name the line and field") {
    CHECK(config_error_line(replace(kTiny, "dx: 0.1", "dx: -0.1")) == 5);
    CHECK(config_error_line(replace(kTiny, "rule: rank", "rule: sideways")) == 7);
    CHECK(config_error_line(replace(kTiny, "initial:", "inital:")) == 6);
    CHECK(config_error_line(replace(kTiny, "mode: particles", "mode: dance")) == 3);
    CHECK(config_error_line(replace(kTiny, "schema: 1", "schema: 2")) == 1);
    CHECK(config_error_line(replace(kTiny, "kappa: 1.0", "kappa: one")) == 4);
    try {
        parse_config(replace(kTiny, ", seed: 7", ""));
        FAIL("seed is mandatory");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "particles.seed");
    }
    try {
        parse_config(replace(kTiny, "dt: 0.05", "dt: 0.5"));
        FAIL("dt above the stability limit");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "grid.dt");
        CHECK(e.line() == 5);
    }
    CHECK_THROWS_AS(parse_config("schema: 1\nmode: [\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(""), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/lmfg.yaml"), IoError);
}

TEST_CASE("automatic domain") {
    ModelParams p;
    p.alpha1 = 0.25;
    const double x = auto_x_max(p, 120.0);
    CHECK(x >= (p.kappa + p.alpha1) * 120.0 + 40.0);
    const RunConfig c = parse_config(preset_text("lottery-intrinsic"));
    const SpaceGrid g = c.space_grid();
    CHECK(g.x_min == -20.0);
    CHECK(g.dx() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(g.x_max >= x);
}

TEST_CASE("particle state and field blobs round-trip") {
    ParticleState st = quantile_placement(1000, 1.0, 123);
    st.positions[5] = 3.0000000000000004;
    st.time = 1.75;
    st.step = 35;
    std::stringstream ss;
    write_particle_state(ss, st);
    CHECK(read_particle_state(ss) == st);

    SpaceTimeField f(Grid1D::make(-1.0, 2.0, 31, 0.0, 1.0, 0.25));
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = std::sin(0.37 * i) / 3.0;
    std::stringstream fs_;
    write_field(fs_, f);
    const SpaceTimeField g = read_field(fs_);
    CHECK(g.grid == f.grid);
    CHECK(g.values == f.values);

    std::string bytes = ss.str();
    bytes[4] = 9;  // format version
    std::stringstream bad(bytes);
    CHECK_THROWS_AS(read_particle_state(bad), VersionMismatch);
    std::string fb = fs_.str();
    fb[4] = 9;
    std::stringstream badf(fb);
    CHECK_THROWS_AS(read_field(badf), VersionMismatch);
    std::stringstream truncated(ss.str().substr(0, 20));
    CHECK_THROWS_AS(read_particle_state(truncated), IoError);
}

TEST_CASE("interrupted particle stepping resumes to identical positions") {
    ModelParams p;
    p.alpha1 = 1.0;
    const StrategyRule rule{StrategyKind::rank, 0.0, nullptr};
    ParticleState whole = quantile_placement(5000, 1.0, 55);
    ParticleState part = whole;
    for (int i = 0; i < 60; ++i) advance_particles(whole, rule, p, 0.05);
    for (int i = 0; i < 25; ++i) advance_particles(part, rule, p, 0.05);
    std::stringstream ss;
    write_particle_state(ss, part);
    ParticleState resumed = read_particle_state(ss);
    for (int i = 25; i < 60; ++i) advance_particles(resumed, rule, p, 0.05);
    CHECK(resumed == whole);
}

TEST_CASE("snapshots and tables round-trip") {
    const fs::path dir = scratch("io");
    fs::create_directories(dir);
    SnapshotFile s;
    s.mode = "intrinsic";
    const SpaceGrid g{-1.0, 1.0, 21};
    s.snap.t = 2.5;
    s.snap.F = Profile::sample(g, [](double x) { return 0.5 - 0.25 * x; });
    s.snap.J = Profile::sample(g, [](double x) { return std::exp(-x) / 3.0; });
    for (auto fmt : {0, 1}) {
        const fs::path f = dir / (fmt ? "a.bin" : "a.txt");
        if (fmt) write_snapshot_binary(f, s);
        else write_snapshot_text(f, s);
        const SnapshotFile r = read_snapshot(f);
        CHECK(r.mode == "intrinsic");
        CHECK(r.snap.t == 2.5);
        CHECK(r.snap.F.values == s.snap.F.values);
        CHECK(r.snap.F.grid == g);
        REQUIRE(r.snap.J.has_value());
        CHECK(r.snap.J->values == s.snap.J->values);
        CHECK_FALSE(r.snap.w.has_value());
        CHECK_FALSE(r.snap.I.has_value());
    }
    CsvTable t{{"t", "x_median"}, {{0.0, 1.0 / 3.0}, {0.5, std::nan("")}}};
    write_csv(dir / "t.csv", t);
    const CsvTable back = read_csv(dir / "t.csv");
    CHECK(back.columns == t.columns);
    CHECK(back.rows[0] == t.rows[0]);
    CHECK(std::isnan(back.rows[1][1]));
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK_THROWS_AS(read_snapshot(dir / "missing.txt"), IoError);
    fs::remove_all(dir);
}

TEST_CASE("empty-duration run writes the initial snapshot only") {
    const fs::path dir = scratch("empty");
    const std::string text = replace(preset_text("kpp"), "t_final: 60.0", "t_final: 0.0");
    const RunConfig c = parse_config(replace(text, "analysis: {window: [30.0, 60.0]}", "analysis: {}"));
    const RunOutcome out = run_experiment(c, dir);
    CHECK(out.finished);
    std::size_t snaps = 0;
    for (const auto& e : fs::directory_iterator(dir / "snapshots")) snaps += e.is_regular_file();
    CHECK(snaps == 1);
    CHECK(read_csv(dir / "fronts.csv").rows.size() == 1);
    fs::remove_all(dir);
}

TEST_CASE("manifest lists every output file with its hash") {
    const fs::path dir = scratch("manifest");
    run_experiment(parse_config(kTiny), dir);
    const auto m = nlohmann::json::parse(read_bytes(dir / "manifest.json"));
    CHECK(m["mode"] == "particles");
    CHECK(m["seeds"][0] == 7);
    CHECK(m["config_sha256"] == sha256_file(dir / "config.yaml"));
    std::set<std::string> listed;
    for (const auto& f : m["files"]) {
        const std::string path = f["path"];
        listed.insert(path);
        CHECK(f["sha256"] == sha256_file(dir / path));
        CHECK(f["bytes"] == fs::file_size(dir / path));
    }
    std::set<std::string> present;
    for (const auto& [path, bytes] : tree(dir))
        if (path != "manifest.json") present.insert(path);
    CHECK(listed == present);
    CHECK(present.count("fronts.csv") == 1);
    CHECK(present.count("speeds.csv") == 1);
    CHECK(present.count("diagnostics.csv") == 1);
    fs::remove_all(dir);
}

TEST_CASE("identical configs give byte-identical runs, and a resumed run matches") {
    const RunConfig c = parse_config(kTiny);
    const fs::path a = scratch("det-a"), b = scratch("det-b"), r = scratch("det-r");
    run_experiment(c, a);
    run_experiment(c, b);
    CHECK(tree(a) == tree(b));

    RunOptions stop;
    stop.stop_after_step = 40;
    const RunOutcome partial = run_experiment(c, r, stop);
    CHECK_FALSE(partial.finished);
    CHECK_FALSE(fs::exists(r / "manifest.json"));
    const RunOutcome resumed = resume_experiment(r / "checkpoints" / "ckpt_00000040.bin");
    CHECK(resumed.finished);
    CHECK(tree(r) == tree(a));
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(r);
}

TEST_CASE("output directory safety") {
    const fs::path dir = scratch("foreign");
    fs::create_directories(dir);
    std::ofstream(dir / "precious.txt") << "keep";
    CHECK_THROWS_AS(run_experiment(parse_config(kTiny), dir), IoError);
    CHECK(fs::exists(dir / "precious.txt"));
    fs::remove_all(dir);
}

TEST_CASE("kpp preset front speed") {
    const fs::path dir = scratch("kpp");
    const RunOutcome out = run_experiment(parse_config(preset_text("kpp")), dir);
    const SpeedRow* median = out.speed("median");
    REQUIRE(median != nullptr);
    REQUIRE(median->ok());
    CHECK(median->fit.speed == doctest::Approx(2.0).epsilon(0.05));
    CHECK(out.diagnostics.all_passed());
    const std::string speeds = read_bytes(dir / "speeds.csv");
    CHECK(speeds.rfind("front,speed,intercept,r2,t_begin,t_end,samples\nmedian,", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("command-line exit codes") {
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.yaml") << "schema: 1\nmode: kpp\ngrid: {dx: -1}\n";
    CHECK(run_cli("run " + (dir / "bad.yaml").string()) == 2);
    CHECK(run_cli("run " + (dir / "missing.yaml").string()) == 4);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("preset --list") == 0);
    CHECK(run_cli("preset nope") == 2);
    std::ofstream(dir / "tiny.yaml") << kTiny;
    std::ofstream(dir / "blocker") << "x";
    CHECK(run_cli("run " + (dir / "tiny.yaml").string() + " --out " + (dir / "blocker").string()) == 4);
    CHECK(run_cli("run " + (dir / "tiny.yaml").string() + " --out " + (dir / "ok").string()) == 0);
    CHECK(run_cli("diag " + (dir / "ok" / "snapshots").string()) == 0);
    CHECK(run_cli("speeds " + (dir / "ok" / "fronts.csv").string() + " --window 1,4") == 0);
    CHECK(run_cli("resume " + (dir / "ok" / "checkpoints" / "ckpt_00000020.bin").string()) == 0);

    // output root from the environment
    ::setenv(kOutputRootEnv, (dir / "root").string().c_str(), 1);
    CHECK(resolve_output_dir(parse_config(kTiny)) == dir / "root" / "tiny");
    ::unsetenv(kOutputRootEnv);
    fs::remove_all(dir);
}
