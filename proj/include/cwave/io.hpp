// Persistence: CSV series, CWV1 binary snapshots and run manifests.

#ifndef CWAVE_IO_HPP
#define CWAVE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cwave/grid.hpp"

namespace cwave {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t x);
/// fnv1a64 of a file's contents, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// "%.17g"; throws std::domain_error on non-finite values.
std::string format_double(double x);

// Comma-separated file with a fixed header.  Numeric cells are written at
// 17 significant digits so reruns compare byte for byte.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns);

  void row(const std::vector<double>& values);
  void row_text(const std::vector<std::string>& cells);
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::ofstream out_;
  std::vector<std::string> columns_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// CWV1 layout, all fields little-endian 64-bit:
//   magic "CWV1\r\n\x1a\n", endianness marker 0x0102030405060708,
//   mode (0 radial, 1 cartesian3d), d, n, h, dt, t, sample count,
//   then u and ut in the grid's storage order.
void write_snapshot(const std::filesystem::path& path, const FieldState& state, const GridSpec& grid);

struct Snapshot {
  GridSpec grid;
  FieldState state;
};

/// Throws SnapshotError on any header or size mismatch; never returns a
/// partial state.
Snapshot read_snapshot(const std::filesystem::path& path);

struct ManifestFile {
  std::string name;
  std::string digest;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::string config_echo;
  std::string config_digest;
  bool deterministic = false;
  int threads = 1;
  std::map<std::string, std::string> versions;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<ManifestFile> files;

  /// Records `name` (relative to dir) with its checksum.
  void add_file(const std::filesystem::path& dir, const std::string& name);
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  /// fnv1a64 of the canonical JSON text.
  std::string digest() const;
  /// Writes manifest.json into dir.
  void write(const std::filesystem::path& dir) const;
  static RunManifest read(const std::filesystem::path& file);
};

/// Module version strings recorded in manifests.
std::map<std::string, std::string> module_versions();

}  // namespace cwave

#endif  // CWAVE_IO_HPP
