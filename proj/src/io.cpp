#include "lmfg/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "lmfg/errors.hpp"

namespace lmfg {

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian");

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr char kSnapshotMagic[8] = {'L', 'M', 'F', 'G', 'S', 'N', 'P', '1'};
constexpr char kCheckpointMagic[8] = {'L', 'M', 'F', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kParticleTag = 0x50415254;  // "PART"
constexpr std::uint32_t kFieldTag = 0x4649454c;     // "FIEL"

class BinWriter {
public:
    explicit BinWriter(std::ostream& out) : out_(out) {}
    void bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!out_) throw IoError("binary write failed");
    }
    void u32(std::uint32_t v) { bytes(&v, sizeof v); }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void f64(double v) { bytes(&v, sizeof v); }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    void doubles(const std::vector<double>& v) {
        u64(v.size());
        bytes(v.data(), v.size() * sizeof(double));
    }

private:
    std::ostream& out_;
};

class BinReader {
public:
    explicit BinReader(std::istream& in) : in_(in) {}
    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw IoError("truncated binary data");
    }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, sizeof v); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, sizeof v); return v; }
    double f64() { double v; bytes(&v, sizeof v); return v; }
    std::uint64_t length(std::size_t elem) {
        const std::uint64_t n = u64();
        if (n > (std::uint64_t{1} << 40) / elem) throw IoError("corrupt length field");
        return n;
    }
    std::string str() {
        std::string s(length(1), '\0');
        bytes(s.data(), s.size());
        return s;
    }
    std::vector<double> doubles() {
        std::vector<double> v(length(sizeof(double)));
        bytes(v.data(), v.size() * sizeof(double));
        return v;
    }

private:
    std::istream& in_;
};

void expect_version(std::uint32_t got, const char* what) {
    if (got != kFormatVersion)
        throw VersionMismatch(std::string(what) + ": format version " + std::to_string(got) +
                              ", expected " + std::to_string(kFormatVersion));
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    return in;
}

double parse_double(const std::string& tok, const fs::path& path) {
    if (tok == "nan" || tok == "-nan") return kNaN;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw IoError("'" + path.string() + "': bad number '" + tok + "'");
    return v;
}

std::vector<double> column_or_nan(const std::optional<Profile>& p, std::size_t n) {
    return p ? p->values : std::vector<double>(n, kNaN);
}

std::optional<Profile> present(const SpaceGrid& g, std::vector<double> v) {
    if (std::all_of(v.begin(), v.end(), [](double x) { return std::isnan(x); })) return std::nullopt;
    return Profile(g, std::move(v));
}

std::string snapshot_header(const SnapshotFile& s) {
    const SpaceGrid& g = s.snap.F.grid;
    std::string h = "# lmfg-snapshot v1 mode=" + s.mode + " t=" + format_double(s.snap.t) +
                    " kappa=" + format_double(s.params.kappa) + " rho=" + format_double(s.params.rho) +
                    " alpha1=" + format_double(s.params.alpha1) + " k=" + format_double(s.params.k) +
                    " x_min=" + format_double(g.x_min) + " x_max=" + format_double(g.x_max) +
                    " nx=" + std::to_string(g.nx);
    return h;
}

SnapshotFile read_snapshot_text(const fs::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    std::getline(in, line);
    std::istringstream hs(line);
    std::string hash, tag, version;
    hs >> hash >> tag >> version;
    if (hash != "#" || tag != "lmfg-snapshot") throw IoError("'" + path.string() + "' is not a snapshot");
    if (version != "v1") throw VersionMismatch("'" + path.string() + "': snapshot " + version);
    std::map<std::string, std::string> kv;
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto get = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw IoError("'" + path.string() + "': header lacks " + key);
        return parse_double(it->second, path);
    };
    SnapshotFile s;
    s.mode = kv.count("mode") ? kv["mode"] : "";
    s.snap.t = get("t");
    s.params = ModelParams{get("kappa"), get("rho"), get("alpha1"), get("k")};
    const SpaceGrid g{get("x_min"), get("x_max"), static_cast<std::size_t>(get("nx"))};
    g.validate();

    std::vector<std::vector<double>> cols(6);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        for (auto& c : cols) {
            if (!(row >> tok)) throw IoError("'" + path.string() + "': short row");
            c.push_back(parse_double(tok, path));
        }
    }
    if (cols[0].size() != g.nx) throw IoError("'" + path.string() + "': row count differs from nx");
    s.snap.F = Profile(g, std::move(cols[1]));
    s.snap.w = present(g, std::move(cols[2]));
    s.snap.I = present(g, std::move(cols[3]));
    s.snap.J = present(g, std::move(cols[4]));
    s.snap.s = present(g, std::move(cols[5]));
    return s;
}

SnapshotFile read_snapshot_binary(const fs::path& path) {
    std::ifstream in = open_in(path, std::ios::binary);
    BinReader r(in);
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, kSnapshotMagic, 8) != 0) throw IoError("'" + path.string() + "' is not a snapshot");
    expect_version(r.u32(), "snapshot");
    SnapshotFile s;
    s.mode = r.str();
    s.snap.t = r.f64();
    s.params.kappa = r.f64();
    s.params.rho = r.f64();
    s.params.alpha1 = r.f64();
    s.params.k = r.f64();
    SpaceGrid g;
    g.x_min = r.f64();
    g.x_max = r.f64();
    g.nx = r.u64();
    g.validate();
    std::vector<std::vector<double>> cols(6);
    for (auto& c : cols) {
        c = r.doubles();
        if (c.size() != g.nx) throw IoError("'" + path.string() + "': column length differs from nx");
    }
    s.snap.F = Profile(g, std::move(cols[1]));
    s.snap.w = present(g, std::move(cols[2]));
    s.snap.I = present(g, std::move(cols[3]));
    s.snap.J = present(g, std::move(cols[4]));
    s.snap.s = present(g, std::move(cols[5]));
    return s;
}

void write_table(BinWriter& w, const CsvTable& t) {
    w.u64(t.columns.size());
    for (const auto& c : t.columns) w.str(c);
    w.u64(t.rows.size());
    for (const auto& row : t.rows) w.doubles(row);
}

CsvTable read_table(BinReader& r) {
    CsvTable t;
    t.columns.resize(r.length(8));
    for (auto& c : t.columns) c = r.str();
    t.rows.resize(r.length(8));
    for (auto& row : t.rows) row = r.doubles();
    return t;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_snapshot_text(const fs::path& path, const SnapshotFile& s) {
    const Snapshot& sn = s.snap;
    const std::size_t n = sn.F.size();
    const auto w = column_or_nan(sn.w, n), I = column_or_nan(sn.I, n), J = column_or_nan(sn.J, n),
               st = column_or_nan(sn.s, n);
    std::string body = snapshot_header(s) + "\n# x F w I J s\n";
    body.reserve(body.size() + n * 6 * 24);
    for (std::size_t i = 0; i < n; ++i) {
        body += format_double(sn.F.grid.x(i));
        for (double v : {sn.F[i], w[i], I[i], J[i], st[i]}) {
            body += ' ';
            body += format_double(v);
        }
        body += '\n';
    }
    write_text_file(path, body);
}

void write_snapshot_binary(const fs::path& path, const SnapshotFile& s) {
    std::ofstream out = open_out(path, std::ios::binary);
    BinWriter w(out);
    const Snapshot& sn = s.snap;
    const SpaceGrid& g = sn.F.grid;
    w.bytes(kSnapshotMagic, 8);
    w.u32(kFormatVersion);
    w.str(s.mode);
    w.f64(sn.t);
    w.f64(s.params.kappa);
    w.f64(s.params.rho);
    w.f64(s.params.alpha1);
    w.f64(s.params.k);
    w.f64(g.x_min);
    w.f64(g.x_max);
    w.u64(g.nx);
    w.doubles(g.nodes());
    w.doubles(sn.F.values);
    for (const auto* col : {&sn.w, &sn.I, &sn.J, &sn.s}) w.doubles(column_or_nan(*col, g.nx));
}

SnapshotFile read_snapshot(const fs::path& path) {
    std::ifstream probe = open_in(path, std::ios::binary);
    char head[8] = {};
    probe.read(head, 8);
    if (probe.gcount() == 8 && std::memcmp(head, kSnapshotMagic, 8) == 0)
        return read_snapshot_binary(path);
    return read_snapshot_text(path);
}

std::vector<SnapshotFile> read_snapshot_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".txt" || ext == ".bin")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<SnapshotFile> out;
    for (const auto& f : files) out.push_back(read_snapshot(f));
    std::stable_sort(out.begin(), out.end(),
                     [](const SnapshotFile& a, const SnapshotFile& b) { return a.snap.t < b.snap.t; });
    return out;
}

void write_csv(const fs::path& path, const CsvTable& table) {
    std::string body;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) body += ',';
        body += table.columns[c];
    }
    body += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw IoError("csv row width differs from header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) body += ',';
            body += format_double(row[c]);
        }
        body += '\n';
    }
    write_text_file(path, body);
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in = open_in(path);
    CsvTable t;
    std::string line, cell;
    if (!std::getline(in, line)) throw IoError("'" + path.string() + "' is empty");
    std::istringstream header(line);
    while (std::getline(header, cell, ',')) t.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) row.push_back(parse_double(cell, path));
        if (row.size() != t.columns.size())
            throw IoError("'" + path.string() + "': row width differs from header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

FrontTrack track_from_csv(const CsvTable& table, const std::string& column) {
    const auto it = std::find(table.columns.begin(), table.columns.end(), column);
    if (it == table.columns.end()) throw IoError("no column '" + column + "'");
    const auto c = static_cast<std::size_t>(it - table.columns.begin());
    FrontTrack track;
    for (const auto& row : table.rows) track.push(row[0], row[c]);
    return track;
}

void write_particle_state(std::ostream& out, const ParticleState& st) {
    BinWriter w(out);
    w.u32(kParticleTag);
    w.u32(kFormatVersion);
    w.doubles(st.positions);
    w.u64(st.stream_ids.size());
    w.bytes(st.stream_ids.data(), st.stream_ids.size() * sizeof(std::uint32_t));
    w.f64(st.time);
    w.u64(st.step);
    w.u64(st.seed);
}

ParticleState read_particle_state(std::istream& in) {
    BinReader r(in);
    if (r.u32() != kParticleTag) throw IoError("expected a particle state");
    expect_version(r.u32(), "particle state");
    ParticleState st;
    st.positions = r.doubles();
    st.stream_ids.resize(r.length(sizeof(std::uint32_t)));
    r.bytes(st.stream_ids.data(), st.stream_ids.size() * sizeof(std::uint32_t));
    st.time = r.f64();
    st.step = r.u64();
    st.seed = r.u64();
    return st;
}

void write_field(std::ostream& out, const SpaceTimeField& f) {
    BinWriter w(out);
    w.u32(kFieldTag);
    w.u32(kFormatVersion);
    w.f64(f.grid.space.x_min);
    w.f64(f.grid.space.x_max);
    w.u64(f.grid.space.nx);
    w.f64(f.grid.time.t0);
    w.f64(f.grid.time.t_final);
    w.u64(f.grid.time.nt);
    w.doubles(f.values);
}

SpaceTimeField read_field(std::istream& in) {
    BinReader r(in);
    if (r.u32() != kFieldTag) throw IoError("expected a space-time field");
    expect_version(r.u32(), "field");
    SpaceTimeField f;
    f.grid.space.x_min = r.f64();
    f.grid.space.x_max = r.f64();
    f.grid.space.nx = r.u64();
    f.grid.time.t0 = r.f64();
    f.grid.time.t_final = r.f64();
    f.grid.time.nt = r.u64();
    f.values = r.doubles();
    if (f.values.size() != f.grid.space.nx * (f.grid.time.nt + 1))
        throw IoError("field size differs from its grid");
    return f;
}

void write_checkpoint(const fs::path& path, const RunCheckpoint& ck) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out = open_out(tmp, std::ios::binary);
        BinWriter w(out);
        w.bytes(kCheckpointMagic, 8);
        w.u32(kFormatVersion);
        w.str(ck.config_text);
        w.u64(ck.step);
        w.doubles(ck.F);
        w.u32(ck.particles ? 1 : 0);
        if (ck.particles) write_particle_state(out, *ck.particles);
        write_table(w, ck.fronts);
        write_table(w, ck.fronts_pde);
        out.flush();
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

RunCheckpoint read_checkpoint(const fs::path& path) {
    std::ifstream in = open_in(path, std::ios::binary);
    BinReader r(in);
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw IoError("'" + path.string() + "' is not a checkpoint");
    expect_version(r.u32(), "checkpoint");
    RunCheckpoint ck;
    ck.config_text = r.str();
    ck.step = r.u64();
    ck.F = r.doubles();
    if (r.u32() != 0) ck.particles = read_particle_state(in);
    ck.fronts = read_table(r);
    ck.fronts_pde = read_table(r);
    return ck;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 15];
    }
    return out;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in = open_in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out = open_out(path, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("cannot write '" + path.string() + "'");
}

}  // namespace lmfg
