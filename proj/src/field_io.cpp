#include "npfb/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace npfb {

namespace {

template <class T>
void put(std::vector<unsigned char>& out, T value) {
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

template <class T>
T get(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("field dump truncated");
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

void put_header(std::vector<unsigned char>& out, const Field& field, int first, int count) {
  const SpaceTimeGrid& g = field.grid();
  out.insert(out.end(), kDumpMagic, kDumpMagic + 8);
  put<std::uint32_t>(out, kDumpVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < kMaxDim; ++a)
    put<std::uint32_t>(out, a < g.dim() ? static_cast<std::uint32_t>(g.cells(a)) : 0u);
  for (int a = 0; a < kMaxDim; ++a) put<double>(out, a < g.dim() ? g.origin()[a] : 0.0);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(first));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(count));
  put<double>(out, g.h());
  put<double>(out, g.dt());
  put<double>(out, g.final_time());
  put<double>(out, field.metadata().p);
  put<double>(out, field.metadata().eps);
  put<double>(out, field.metadata().delta);
}

DumpHeader read_header(const std::vector<unsigned char>& bytes, std::size_t& pos) {
  if (bytes.size() < kDumpHeaderBytes) throw IoError("field dump truncated: header incomplete");
  if (!std::equal(kDumpMagic, kDumpMagic + 8, bytes.begin())) throw IoError("not a field dump: bad magic");
  pos = 8;
  if (get<std::uint32_t>(bytes, pos) != kDumpVersion) throw IoError("unsupported field dump version");
  DumpHeader h;
  h.n = get<std::uint32_t>(bytes, pos);
  for (auto& c : h.cells) c = get<std::uint32_t>(bytes, pos);
  for (auto& o : h.origin) o = get<double>(bytes, pos);
  h.first_level = get<std::uint32_t>(bytes, pos);
  h.slices = get<std::uint32_t>(bytes, pos);
  h.h = get<double>(bytes, pos);
  h.dt = get<double>(bytes, pos);
  h.T = get<double>(bytes, pos);
  h.p = get<double>(bytes, pos);
  h.eps = get<double>(bytes, pos);
  h.delta = get<double>(bytes, pos);
  if (h.n < 1 || h.n > kMaxDim) throw IoError("field dump has invalid dimension");
  return h;
}

SpaceTimeGrid header_grid(const DumpHeader& h) {
  std::array<int, kMaxDim> cells{};
  Point origin(static_cast<int>(h.n));
  for (std::uint32_t a = 0; a < h.n; ++a) {
    cells[a] = static_cast<int>(h.cells[a]);
    origin[a] = h.origin[a];
  }
  try {
    return SpaceTimeGrid(static_cast<int>(h.n), h.h, h.dt, cells, origin, h.T);
  } catch (const GridError& e) {
    throw IoError(std::string("field dump grid is inconsistent: ") + e.what());
  }
}

}  // namespace

std::vector<unsigned char> encode_field(const Field& field) {
  std::vector<unsigned char> out;
  out.reserve(kDumpHeaderBytes + field.values().size() * sizeof(double));
  put_header(out, field, 0, field.grid().time_levels());
  for (Eigen::Index i = 0; i < field.values().size(); ++i) put<double>(out, field.values()[i]);
  return out;
}

std::vector<unsigned char> encode_slice(const Field& field, int k) {
  if (k < 0 || k > field.grid().last_level()) throw IoError("slice level out of range");
  std::vector<unsigned char> out;
  put_header(out, field, k, 1);
  const auto s = field.slice(k);
  for (Eigen::Index i = 0; i < s.size(); ++i) put<double>(out, s[i]);
  return out;
}

DumpHeader decode_header(const std::vector<unsigned char>& bytes) {
  std::size_t pos = 0;
  return read_header(bytes, pos);
}

Field decode_field(const std::vector<unsigned char>& bytes) {
  std::size_t pos = 0;
  const DumpHeader h = read_header(bytes, pos);
  const SpaceTimeGrid grid = header_grid(h);
  if (h.first_level != 0 || h.slices != static_cast<std::uint32_t>(grid.time_levels()))
    throw IoError("field dump does not hold every time level of its grid");
  const std::size_t expected = kDumpHeaderBytes + grid.size() * sizeof(double);
  if (bytes.size() < expected) throw IoError("field dump truncated: data incomplete");
  if (bytes.size() > expected) throw IoError("field dump has trailing bytes");
  Field field(grid, FieldMetadata{h.p, h.eps, h.delta});
  for (std::size_t i = 0; i < grid.size(); ++i) field.at(i) = get<double>(bytes, pos);
  return field;
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to " + path + " failed");
}

std::vector<unsigned char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void save_field(const Field& field, const std::string& path) { write_bytes(path, encode_field(field)); }

Field load_field(const std::string& path) { return decode_field(read_bytes(path)); }

void write_slice_csv(const Field& field, int k, const std::string& path) {
  const SpaceTimeGrid& g = field.grid();
  if (k < 0 || k > g.last_level()) throw IoError("slice level out of range");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << std::setprecision(17);
  for (int a = 0; a < g.dim(); ++a) out << 'x' << a + 1 << ',';
  out << "u\n";
  const auto s = field.slice(k);
  for (std::size_t f = 0; f < g.node_count(); ++f) {
    const Point x = g.position(g.unflat(f));
    for (int a = 0; a < g.dim(); ++a) out << x[a] << ',';
    out << s[static_cast<Eigen::Index>(f)] << '\n';
  }
  if (!out) throw IoError("write to " + path + " failed");
}

}  // namespace npfb
