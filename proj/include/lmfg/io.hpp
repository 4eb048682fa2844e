#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lmfg/analysis.hpp"
#include "lmfg/grid.hpp"
#include "lmfg/model.hpp"
#include "lmfg/particles.hpp"

namespace lmfg {

namespace fs = std::filesystem;

/// One recorded time slice with the metadata needed to re-run diagnostics on it.
struct SnapshotFile {
    std::string mode;
    ModelParams params;
    Snapshot snap;
};

/// Columns x F w I J s; absent fields are written as nan.
/// Text: a '# lmfg-snapshot v1 ...' header then one %.17g row per node.
/// Binary: magic, version, the same header fields, then six little-endian columns.
void write_snapshot_text(const fs::path& path, const SnapshotFile& s);
void write_snapshot_binary(const fs::path& path, const SnapshotFile& s);

/// Reads either format. Columns that are entirely nan come back as absent.
SnapshotFile read_snapshot(const fs::path& path);

/// Snapshot files in a directory ordered by time.
std::vector<SnapshotFile> read_snapshot_dir(const fs::path& dir);

/// CSV with a header row; non-finite values are written as nan.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const fs::path& path, const CsvTable& table);
CsvTable read_csv(const fs::path& path);

/// Front track of one column of a fronts file (column 0 is time).
FrontTrack track_from_csv(const CsvTable& table, const std::string& column);

/// Binary round-trips. Each blob starts with a tag and a format version;
/// a different version raises VersionMismatch.
void write_particle_state(std::ostream& out, const ParticleState& st);
ParticleState read_particle_state(std::istream& in);
void write_field(std::ostream& out, const SpaceTimeField& f);
SpaceTimeField read_field(std::istream& in);

/// Everything needed to continue a stepped run bit-for-bit.
struct RunCheckpoint {
    std::string config_text;
    std::uint64_t step = 0;
    std::vector<double> F;       // PDE state (kpp, intrinsic, compare)
    std::optional<ParticleState> particles;
    CsvTable fronts;             // rows recorded so far
    CsvTable fronts_pde;
};

void write_checkpoint(const fs::path& path, const RunCheckpoint& ck);
RunCheckpoint read_checkpoint(const fs::path& path);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);
std::string sha256_hex(const std::string& bytes);

void write_text_file(const fs::path& path, const std::string& content);

/// printf("%.17g"), with "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

}  // namespace lmfg
