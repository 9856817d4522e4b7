#include "cwave/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace cwave {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

namespace {

std::string slurp(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string file_digest(const fs::path& path) { return hex64(fnv1a64(slurp(path))); }

std::string format_double(double x)
{
  if (!std::isfinite(x)) throw std::domain_error("non-finite value in output");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const fs::path& path, std::vector<std::string> columns)
    : out_(path, std::ios::binary), columns_(std::move(columns))
{
  if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
  row_text(columns_);
}

void CsvWriter::row(const std::vector<double>& values)
{
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row_text(cells);
}

void CsvWriter::row_text(const std::vector<std::string>& cells)
{
  if (cells.size() != columns_.size())
    throw std::invalid_argument("csv row has " + std::to_string(cells.size()) + " cells, schema has " +
                                std::to_string(columns_.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
  if (!out_) throw std::runtime_error("csv write failed");
}

CsvTable read_csv(const fs::path& path)
{
  std::istringstream in(slurp(path));
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (std::getline(in, line)) t.columns = split(line);
  while (std::getline(in, line)) {
    auto cells = split(line);
    if (cells.size() != t.columns.size())
      throw std::runtime_error("csv row width mismatch in '" + path.string() + "'");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

namespace {

constexpr char kMagic[8] = {'C', 'W', 'V', '1', '\r', '\n', '\x1a', '\n'};
constexpr std::uint64_t kEndianMarker = 0x0102030405060708ULL;
constexpr std::size_t kHeaderBytes = 8 + 8 * 8;

void put_u64(std::string& out, std::uint64_t x)
{
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((x >> (8 * b)) & 0xff));
}

void put_f64(std::string& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

std::uint64_t get_u64(const std::string& in, std::size_t at)
{
  std::uint64_t x = 0;
  for (int b = 0; b < 8; ++b) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  return x;
}

double get_f64(const std::string& in, std::size_t at) { return std::bit_cast<double>(get_u64(in, at)); }

}  // namespace

void write_snapshot(const fs::path& path, const FieldState& state, const GridSpec& grid)
{
  validate_state(state, grid);
  std::string out(kMagic, 8);
  put_u64(out, kEndianMarker);
  put_u64(out, grid.radial() ? 0 : 1);
  put_u64(out, static_cast<std::uint64_t>(grid.d));
  put_u64(out, static_cast<std::uint64_t>(grid.n));
  put_f64(out, grid.h);
  put_f64(out, grid.dt);
  put_f64(out, state.t);
  put_u64(out, state.u.size());
  out.reserve(out.size() + 16 * state.u.size());
  for (double v : state.u) put_f64(out, v);
  for (double v : state.ut) put_f64(out, v);
  std::ofstream f(path, std::ios::binary);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw SnapshotError("cannot write snapshot '" + path.string() + "'");
}

Snapshot read_snapshot(const fs::path& path)
{
  std::string in;
  try {
    in = slurp(path);
  } catch (const std::exception& e) {
    throw SnapshotError(e.what());
  }
  const std::string where = " in snapshot '" + path.string() + "'";
  if (in.size() < kHeaderBytes) throw SnapshotError("truncated header" + where);
  if (std::memcmp(in.data(), kMagic, 8) != 0) throw SnapshotError("bad magic (not CWV1)" + where);
  if (get_u64(in, 8) != kEndianMarker)
    throw SnapshotError("endianness marker mismatch: expected little-endian 0x0102030405060708" + where);
  const std::uint64_t mode = get_u64(in, 16), d = get_u64(in, 24), n = get_u64(in, 32);
  const double h = get_f64(in, 40), dt = get_f64(in, 48), t = get_f64(in, 56);
  const std::uint64_t count = get_u64(in, 64);
  if (mode > 1) throw SnapshotError("unknown grid mode " + std::to_string(mode) + where);
  if (d < 1 || d > 5 || n < 5 || n > (1u << 20)) throw SnapshotError("implausible header" + where);
  const std::uint64_t expect = mode == 0 ? n : n * n * n;
  if (count != expect) throw SnapshotError("sample count does not match the grid" + where);
  if (in.size() != kHeaderBytes + 16 * count)
    throw SnapshotError((in.size() < kHeaderBytes + 16 * count ? "truncated payload" : "trailing bytes") + where);

  Snapshot s;
  const double span = h * static_cast<double>(n - 1);
  try {
    const auto m = mode == 0 ? GridMode::radial : GridMode::cartesian3d;
    s.grid = make_grid(m, static_cast<int>(d), h, mode == 0 ? span : span / 2, dt);
  } catch (const std::exception& e) {
    throw SnapshotError(std::string("invalid grid header: ") + e.what() + where);
  }
  s.state.t = t;
  s.state.u.resize(count);
  s.state.ut.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    s.state.u[i] = get_f64(in, kHeaderBytes + 8 * i);
    s.state.ut[i] = get_f64(in, kHeaderBytes + 8 * (count + i));
  }
  return s;
}

void RunManifest::add_file(const fs::path& dir, const std::string& name)
{
  const fs::path p = dir / name;
  files.push_back({name, file_digest(p), fs::file_size(p)});
}

nlohmann::json RunManifest::to_json() const
{
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config_echo;
  j["config_digest"] = config_digest;
  j["deterministic"] = deterministic;
  j["threads"] = threads;
  j["versions"] = versions;
  j["summary"] = summary;
  auto arr = nlohmann::json::array();
  for (const auto& f : files) arr.push_back({{"name", f.name}, {"fnv1a64", f.digest}, {"bytes", f.bytes}});
  j["files"] = arr;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j)
{
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config_echo = j.at("config").get<std::string>();
  m.config_digest = j.at("config_digest").get<std::string>();
  m.deterministic = j.at("deterministic").get<bool>();
  m.threads = j.at("threads").get<int>();
  m.versions = j.at("versions").get<std::map<std::string, std::string>>();
  m.summary = j.at("summary");
  for (const auto& f : j.at("files"))
    m.files.push_back({f.at("name").get<std::string>(), f.at("fnv1a64").get<std::string>(),
                       f.at("bytes").get<std::uintmax_t>()});
  return m;
}

std::string RunManifest::digest() const { return hex64(fnv1a64(to_json().dump())); }

void RunManifest::write(const fs::path& dir) const
{
  auto j = to_json();
  j["manifest_digest"] = digest();
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  f << j.dump(2) << '\n';
  if (!f) throw std::runtime_error("cannot write manifest in '" + dir.string() + "'");
}

RunManifest RunManifest::read(const fs::path& file)
{
  const auto j = nlohmann::json::parse(slurp(file));
  auto m = from_json(j);
  if (j.contains("manifest_digest") && j.at("manifest_digest").get<std::string>() != m.digest())
    throw std::runtime_error("manifest digest mismatch in '" + file.string() + "'");
  return m;
}

std::map<std::string, std::string> module_versions()
{
  return {{"exponents", "1.0"},     {"field_core", "1.0"},    {"solver", "1.0"}, {"diagnostics", "1.0"},
          {"radiation", "1.0"},     {"decomposition", "1.0"}, {"cli_io", "1.0"}};
}

}  // namespace cwave
