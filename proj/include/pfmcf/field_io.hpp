#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "pfmcf/field.hpp"

namespace pfmcf {

/// Provenance written next to a field dump.
struct FieldMetadata {
  double eps = 0.0;
  double dt = 0.0;
  double time = 0.0;
  std::string model;
};

// Binary layout: "PFMF", u8 dim, u8 log2(P), 10 zero bytes, then P^dim
// little-endian IEEE-754 doubles in row-major order.
inline constexpr std::array<char, 4> field_magic{'P', 'F', 'M', 'F'};
inline constexpr std::size_t field_header_size = 16;

inline std::filesystem::path sidecar_path(const std::filesystem::path& dump) {
  auto p = dump;
  p.replace_extension(".json");
  return p;
}

inline void write_field_dump(const std::filesystem::path& path, const ScalarField& u) {
  u.grid.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::array<unsigned char, field_header_size> header{};
  std::memcpy(header.data(), field_magic.data(), 4);
  header[4] = static_cast<unsigned char>(u.grid.dim);
  header[5] = static_cast<unsigned char>(u.grid.log2_p());
  os.write(reinterpret_cast<const char*>(header.data()), header.size());
  std::array<unsigned char, 8> bytes;
  for (double v : u.data) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xffu);
    os.write(reinterpret_cast<const char*>(bytes.data()), 8);
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

inline void write_field_dump(const std::filesystem::path& path, const ScalarField& u,
                             const FieldMetadata& meta) {
  write_field_dump(path, u);
  const nlohmann::ordered_json j{{"dim", u.grid.dim}, {"P", u.grid.p}, {"eps", meta.eps},
                                 {"dt", meta.dt},     {"time", meta.time}, {"model", meta.model}};
  std::ofstream(sidecar_path(path)) << j.dump(2) << '\n';
}

inline ScalarField read_field_dump(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::array<unsigned char, field_header_size> header{};
  is.read(reinterpret_cast<char*>(header.data()), header.size());
  if (!is || std::memcmp(header.data(), field_magic.data(), 4) != 0) {
    throw std::runtime_error(path.string() + " is not a field dump");
  }
  for (std::size_t i = 6; i < field_header_size; ++i) {
    if (header[i] != 0) throw std::runtime_error(path.string() + ": reserved header bytes not zero");
  }
  if (header[5] > 12) throw std::runtime_error(path.string() + ": implausible grid size");
  GridSpec grid{header[4], 1 << header[5]};
  grid.validate();
  ScalarField u(grid);
  std::array<unsigned char, 8> bytes;
  for (auto& v : u.data) {
    is.read(reinterpret_cast<char*>(bytes.data()), 8);
    if (!is) throw std::runtime_error(path.string() + ": truncated field data");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    v = std::bit_cast<double>(bits);
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error(path.string() + ": trailing bytes after field data");
  }
  return u;
}

}  // namespace pfmcf
