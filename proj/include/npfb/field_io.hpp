#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "npfb/field.hpp"

namespace npfb {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary dump layout, all little-endian:
///
///   offset  size  content
///        0     8  magic "NPFBFLD1"
///        8     4  u32 version (1)
///       12     4  u32 n
///       16    12  u32 cells[3] (unused axes 0)
///       28    24  f64 origin[3]
///       52     4  u32 first level
///       56     4  u32 slice count
///       60    48  f64 h, dt, T, p, eps, delta
///      108        f64 values, row-major over space (last axis fastest), then time
inline constexpr char kDumpMagic[8] = {'N', 'P', 'F', 'B', 'F', 'L', 'D', '1'};
inline constexpr std::uint32_t kDumpVersion = 1;
inline constexpr std::size_t kDumpHeaderBytes = 108;

struct DumpHeader {
  std::uint32_t n = 0;
  std::array<std::uint32_t, kMaxDim> cells{};
  std::array<double, kMaxDim> origin{};
  std::uint32_t first_level = 0;
  std::uint32_t slices = 0;
  double h = 0.0, dt = 0.0, T = 0.0;
  double p = 0.0, eps = 0.0, delta = 0.0;
};

std::vector<unsigned char> encode_field(const Field& field);
Field decode_field(const std::vector<unsigned char>& bytes);

/// One retained level k as a dump with first_level = k and slice count 1.
std::vector<unsigned char> encode_slice(const Field& field, int k);
DumpHeader decode_header(const std::vector<unsigned char>& bytes);

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes);
std::vector<unsigned char> read_bytes(const std::string& path);

void save_field(const Field& field, const std::string& path);
/// Throws IoError on a bad magic, version, truncated data or inconsistent header.
Field load_field(const std::string& path);

/// x1..xn,u rows for level k.
void write_slice_csv(const Field& field, int k, const std::string& path);

}  // namespace npfb
