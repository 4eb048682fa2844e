#include "lmfg/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "lmfg/analysis.hpp"
#include "lmfg/errors.hpp"

namespace lmfg {

std::string_view to_string(RunMode m) {
    switch (m) {
        case RunMode::kpp: return "kpp";
        case RunMode::intrinsic: return "intrinsic";
        case RunMode::nash: return "nash";
        case RunMode::particles: return "particles";
        case RunMode::compare: return "compare";
    }
    return "?";
}

double auto_x_max(const ModelParams& p, double t_final) {
    const TheoryPredictions th = predict(p);
    const double lead = std::max({th.v_star * t_final, th.c_star * t_final, 2.0 * p.kappa * t_final});
    return lead + 12.0 * std::sqrt(p.kappa * t_final) + 40.0;
}

SpaceGrid RunConfig::space_grid() const {
    const double target = grid.x_max ? *grid.x_max : auto_x_max(params, grid.t_final);
    const double cells = (target - grid.x_min) / grid.dx;
    const auto n = static_cast<std::size_t>(std::ceil(cells - 1e-9));
    SpaceGrid g{grid.x_min, grid.x_min + static_cast<double>(n) * grid.dx, n + 1};
    g.validate();
    return g;
}

Grid1D RunConfig::grid1d() const {
    const SpaceGrid s = space_grid();
    return Grid1D::make(s.x_min, s.x_max, s.nx, 0.0, grid.t_final, grid.dt);
}

std::size_t RunConfig::stride_steps(double every) const {
    if (every <= 0.0) return 0;
    return static_cast<std::size_t>(std::llround(every / grid.dt));
}

std::pair<double, double> RunConfig::fit_window() const {
    if (analysis.window) return *analysis.window;
    return trimmed_window(0.0, grid.t_final, analysis.burn_in, analysis.terminal_trim);
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

/// A mapping node with its dotted path, tracking which keys were consumed.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (!node_.IsMap()) throw ConfigError(path_, line_of(node_), "expected a mapping");
    }

    bool has(const char* key) const { return static_cast<bool>(node_[key]); }
    int line() const { return line_of(node_); }
    const std::string& path() const { return path_; }

    YAML::Node raw(const char* key) const { return node_[key]; }

    Section child(const char* key) const {
        const YAML::Node n = node_[key];
        if (!n) throw ConfigError(field(key), line(), "missing section");
        return Section(n, field(key));
    }

    template <class T>
    T get(const char* key, T fallback) const {
        const YAML::Node n = node_[key];
        if (!n) return fallback;
        return convert<T>(n, key);
    }

    template <class T>
    T require(const char* key) const {
        const YAML::Node n = node_[key];
        if (!n) throw ConfigError(field(key), line(), "required field missing");
        return convert<T>(n, key);
    }

    void reject_unknown(std::initializer_list<const char*> known) const {
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            const bool ok = std::any_of(known.begin(), known.end(),
                                        [&](const char* k) { return key == k; });
            if (!ok) throw ConfigError(field(key.c_str()), line_of(kv.first), "unknown field");
        }
    }

    std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    int line_at(const char* key) const {
        const YAML::Node n = node_[key];
        return n ? line_of(n) : line();
    }

private:
    template <class T>
    T convert(const YAML::Node& n, const char* key) const {
        if (!n.IsScalar()) throw ConfigError(field(key), line_of(n), "expected a scalar");
        try {
            T v = n.as<T>();
            if constexpr (std::is_floating_point_v<T>) {
                if (!std::isfinite(v)) throw ConfigError(field(key), line_of(n), "must be finite");
            }
            return v;
        } catch (const YAML::BadConversion&) {
            throw ConfigError(field(key), line_of(n), "cannot parse '" + n.Scalar() + "'");
        }
    }

    YAML::Node node_;
    std::string path_;
};

RunMode parse_mode(const Section& root) {
    const auto name = root.require<std::string>("mode");
    for (auto m : {RunMode::kpp, RunMode::intrinsic, RunMode::nash, RunMode::particles,
                   RunMode::compare})
        if (to_string(m) == name) return m;
    throw ConfigError("mode", root.line_at("mode"), "unknown mode '" + name + "'");
}

template <class Fn>
void checked(const Section& s, const char* key, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(s.field(key), s.line_at(key), e.what());
    }
}

void require_positive(const Section& s, const char* key, double v) {
    if (!(v > 0.0)) throw ConfigError(s.field(key), s.line_at(key), "must be positive");
}

void require_nonnegative(const Section& s, const char* key, double v) {
    if (!(v >= 0.0)) throw ConfigError(s.field(key), s.line_at(key), "must be non-negative");
}

/// The event period must be a whole number of steps.
void require_tiling(const Section& s, const char* key, double every, double dt) {
    if (every <= 0.0) return;
    const double steps = every / dt;
    if (std::llround(steps) < 1 || std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
        throw ConfigError(s.field(key), s.line_at(key), "must be a positive multiple of grid.dt");
}

RunConfig parse_root(const YAML::Node& doc) {
    if (!doc || doc.IsNull()) throw ConfigError("", 0, "empty document");
    const Section root(doc, "");
    root.reject_unknown({"schema", "name", "mode", "params", "grid", "initial", "terminal", "mfg",
                         "particles", "output", "analysis"});
    const int schema = root.require<int>("schema");
    if (schema != kConfigSchema)
        throw ConfigError("schema", root.line_at("schema"),
                          "unsupported schema " + std::to_string(schema) + " (expected " +
                              std::to_string(kConfigSchema) + ")");

    RunConfig c;
    c.name = root.get<std::string>("name", "");
    c.mode = parse_mode(root);
    const bool particle_mode = c.mode == RunMode::particles || c.mode == RunMode::compare;

    {
        const Section s = root.child("params");
        s.reject_unknown({"kappa", "rho", "alpha1", "k"});
        c.params.kappa = s.require<double>("kappa");
        c.params.rho = s.get<double>("rho", c.params.rho);
        c.params.alpha1 = s.require<double>("alpha1");
        c.params.k = s.get<double>("k", c.params.k);
        checked(s, "kappa", [&] { c.params.validate(); });
    }

    {
        const Section s = root.child("grid");
        s.reject_unknown({"x_min", "x_max", "dx", "dt", "t_final"});
        c.grid.x_min = s.get<double>("x_min", c.grid.x_min);
        if (s.has("x_max")) {
            const YAML::Node n = s.raw("x_max");
            if (!(n.IsScalar() && n.Scalar() == "auto")) c.grid.x_max = s.require<double>("x_max");
        }
        c.grid.dx = s.require<double>("dx");
        c.grid.dt = s.require<double>("dt");
        c.grid.t_final = s.require<double>("t_final");
        require_positive(s, "dx", c.grid.dx);
        require_positive(s, "dt", c.grid.dt);
        require_nonnegative(s, "t_final", c.grid.t_final);
        if (c.grid.x_max && !(*c.grid.x_max > c.grid.x_min))
            throw ConfigError("grid.x_max", s.line_at("x_max"), "must exceed x_min");
        checked(s, "dt", [&] { (void)c.grid1d(); });

        double limit = forward_dt_max(c.params);
        if (c.mode == RunMode::nash) limit = std::min(limit, backward_dt_max(c.params));
        if (particle_mode) limit = std::min(limit, particle_dt_max(c.params));
        if (c.grid.dt > limit * (1.0 + 1e-12))
            throw ConfigError("grid.dt", s.line_at("dt"),
                              "exceeds the stability limit " + std::to_string(limit));
    }

    if (root.has("initial")) {
        const Section s = root.child("initial");
        s.reject_unknown({"ramp_half_width"});
        c.ramp_half_width = s.get<double>("ramp_half_width", c.ramp_half_width);
        require_nonnegative(s, "ramp_half_width", c.ramp_half_width);
        const SpaceGrid g = c.space_grid();
        if (!(g.x_min < -c.ramp_half_width && g.x_max > c.ramp_half_width))
            throw ConfigError("initial.ramp_half_width", s.line_at("ramp_half_width"),
                              "ramp does not fit inside the grid");
    }

    if (c.mode == RunMode::nash) {
        const Section t = root.child("terminal");
        t.reject_unknown({"kind", "center", "slope"});
        const auto kind = t.require<std::string>("kind");
        if (kind == "auto") {
            c.terminal.automatic = true;
        } else if (kind == "logistic") {
            c.terminal.automatic = false;
            c.terminal.center = t.require<double>("center");
        } else {
            throw ConfigError("terminal.kind", t.line_at("kind"), "expected 'auto' or 'logistic'");
        }
        c.terminal.slope = t.get<double>("slope", c.terminal.slope);
        require_positive(t, "slope", c.terminal.slope);

        const Section m = root.child("mfg");
        m.reject_unknown({"damping", "tol", "max_iter"});
        c.mfg.damping = m.get<double>("damping", c.mfg.damping);
        c.mfg.tol = m.get<double>("tol", c.mfg.tol);
        c.mfg.max_iter = m.get<int>("max_iter", c.mfg.max_iter);
        checked(m, "damping", [&] { c.mfg.validate(); });
        if (!(c.params.discount_gap() > 0.0))
            throw ConfigError("params.rho", 0, "nash mode needs rho > kappa");
    } else {
        for (const char* key : {"terminal", "mfg"})
            if (root.has(key))
                throw ConfigError(key, root.line_at(key),
                                  "only valid with mode: nash");
    }

    if (particle_mode) {
        const Section s = root.child("particles");
        s.reject_unknown({"n", "rule", "width", "seed"});
        const auto n = s.require<long long>("n");
        if (n < 2) throw ConfigError("particles.n", s.line_at("n"), "needs at least 2 agents");
        c.particles.n = static_cast<std::size_t>(n);
        const auto rule = s.require<std::string>("rule");
        checked(s, "rule", [&] { c.particles.rule = parse_strategy_kind(rule); });
        if (c.particles.rule == StrategyKind::pde_lookup)
            throw ConfigError("particles.rule", s.line_at("rule"),
                              "pde-lookup is library-only; use rank, smoothed-rank or ratio");
        if (c.mode == RunMode::compare && c.particles.rule != StrategyKind::rank)
            throw ConfigError("particles.rule", s.line_at("rule"),
                              "compare mode pairs the rank rule with its local equation");
        c.particles.width = s.get<double>("width", c.particles.width);
        require_positive(s, "width", c.particles.width);
        c.particles.seed = s.require<std::uint64_t>("seed");
    } else if (root.has("particles")) {
        throw ConfigError("particles", root.line_at("particles"),
                          "only valid with mode: particles or compare");
    }

    {
        const Section s = root.child("output");
        s.reject_unknown({"dir", "snapshot_every", "front_every", "node_stride", "format",
                          "checkpoint_every"});
        c.output.dir = s.require<std::string>("dir");
        if (c.output.dir.empty()) throw ConfigError("output.dir", s.line_at("dir"), "empty path");
        c.output.snapshot_every = s.get<double>("snapshot_every", c.output.snapshot_every);
        c.output.front_every = s.get<double>("front_every", c.output.front_every);
        c.output.checkpoint_every = s.get<double>("checkpoint_every", c.output.checkpoint_every);
        for (const char* key : {"snapshot_every", "front_every", "checkpoint_every"})
            require_nonnegative(s, key, s.get<double>(key, 0.0));
        require_positive(s, "front_every", c.output.front_every);
        require_tiling(s, "snapshot_every", c.output.snapshot_every, c.grid.dt);
        require_tiling(s, "front_every", c.output.front_every, c.grid.dt);
        require_tiling(s, "checkpoint_every", c.output.checkpoint_every, c.grid.dt);
        const auto stride = s.get<long long>("node_stride", 1);
        if (stride < 1) throw ConfigError("output.node_stride", s.line_at("node_stride"), "must be >= 1");
        c.output.node_stride = static_cast<std::size_t>(stride);
        if ((c.space_grid().nx - 1) % c.output.node_stride != 0)
            throw ConfigError("output.node_stride", s.line_at("node_stride"),
                              "must divide the number of grid cells");
        const auto fmt = s.get<std::string>("format", "text");
        if (fmt == "text") c.output.format = SnapshotFormat::text;
        else if (fmt == "binary") c.output.format = SnapshotFormat::binary;
        else throw ConfigError("output.format", s.line_at("format"), "expected 'text' or 'binary'");
        if (c.output.checkpoint_every > 0.0 && c.mode == RunMode::nash)
            throw ConfigError("output.checkpoint_every", s.line_at("checkpoint_every"),
                              "nash runs are not resumable");
    }

    if (root.has("analysis")) {
        const Section s = root.child("analysis");
        s.reject_unknown({"burn_in", "terminal_trim", "window"});
        c.analysis.burn_in = s.get<double>("burn_in", c.analysis.burn_in);
        c.analysis.terminal_trim = s.get<double>("terminal_trim", c.analysis.terminal_trim);
        if (c.analysis.burn_in < 0.0 || c.analysis.terminal_trim < 0.0 ||
            c.analysis.burn_in + c.analysis.terminal_trim >= 1.0)
            throw ConfigError("analysis", s.line(), "trims must be >= 0 and sum to less than 1");
        if (s.has("window")) {
            const YAML::Node w = s.raw("window");
            if (!w.IsSequence() || w.size() != 2)
                throw ConfigError("analysis.window", line_of(w), "expected [t_begin, t_end]");
            try {
                c.analysis.window = std::make_pair(w[0].as<double>(), w[1].as<double>());
            } catch (const YAML::BadConversion&) {
                throw ConfigError("analysis.window", line_of(w), "expected two numbers");
            }
            if (!(c.analysis.window->first < c.analysis.window->second))
                throw ConfigError("analysis.window", line_of(w), "t_begin must be below t_end");
        }
    }
    return c;
}

std::string quoted(const std::string& v) {
    std::string out = "\"";
    for (char ch : v) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    YAML::Node doc;
    try {
        doc = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError("", e.mark.is_null() ? 0 : e.mark.line + 1, e.msg);
    }
    return parse_root(doc);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
    std::ostringstream o;
    o << "schema: " << kConfigSchema << "\n";
    if (!c.name.empty()) o << "name: " << quoted(c.name) << "\n";
    o << "mode: " << to_string(c.mode) << "\n";
    o << "params:\n"
      << "  kappa: " << num(c.params.kappa) << "\n"
      << "  rho: " << num(c.params.rho) << "\n"
      << "  alpha1: " << num(c.params.alpha1) << "\n"
      << "  k: " << num(c.params.k) << "\n";
    o << "grid:\n"
      << "  x_min: " << num(c.grid.x_min) << "\n"
      << "  x_max: " << (c.grid.x_max ? num(*c.grid.x_max) : std::string("auto")) << "\n"
      << "  dx: " << num(c.grid.dx) << "\n"
      << "  dt: " << num(c.grid.dt) << "\n"
      << "  t_final: " << num(c.grid.t_final) << "\n";
    o << "initial:\n  ramp_half_width: " << num(c.ramp_half_width) << "\n";
    if (c.mode == RunMode::nash) {
        o << "terminal:\n";
        if (c.terminal.automatic) o << "  kind: auto\n";
        else o << "  kind: logistic\n  center: " << num(c.terminal.center) << "\n";
        o << "  slope: " << num(c.terminal.slope) << "\n";
        o << "mfg:\n"
          << "  damping: " << num(c.mfg.damping) << "\n"
          << "  tol: " << num(c.mfg.tol) << "\n"
          << "  max_iter: " << c.mfg.max_iter << "\n";
    }
    if (c.mode == RunMode::particles || c.mode == RunMode::compare) {
        o << "particles:\n"
          << "  n: " << c.particles.n << "\n"
          << "  rule: " << to_string(c.particles.rule) << "\n"
          << "  width: " << num(c.particles.width) << "\n"
          << "  seed: " << c.particles.seed << "\n";
    }
    o << "output:\n"
      << "  dir: " << quoted(c.output.dir) << "\n"
      << "  snapshot_every: " << num(c.output.snapshot_every) << "\n"
      << "  front_every: " << num(c.output.front_every) << "\n"
      << "  node_stride: " << c.output.node_stride << "\n"
      << "  format: " << (c.output.format == SnapshotFormat::text ? "text" : "binary") << "\n"
      << "  checkpoint_every: " << num(c.output.checkpoint_every) << "\n";
    o << "analysis:\n"
      << "  burn_in: " << num(c.analysis.burn_in) << "\n"
      << "  terminal_trim: " << num(c.analysis.terminal_trim) << "\n";
    if (c.analysis.window)
        o << "  window: [" << num(c.analysis.window->first) << ", " << num(c.analysis.window->second)
          << "]\n";
    return o.str();
}

}  // namespace lmfg
