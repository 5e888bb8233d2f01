#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "schac/errors.hpp"
#include "schac/grid.hpp"

namespace schac {

/// Field snapshot file:
///
///   SCHAC-FIELD 1\n
///   dim <d>\n
///   n <N>\n
///   name <token>\n
///   time <%.17g>\n
///   endian little\n
///   END\n
///   <N^d little-endian IEEE-754 float64 values, row-major, last axis fastest>
struct Snapshot {
  int dim = 1;
  std::size_t n = 0;
  std::string name;
  double time = 0.0;
  std::vector<double> values;
};

inline constexpr const char *kSnapshotMagic = "SCHAC-FIELD 1";

namespace detail {
inline std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}
} // namespace detail

inline void write_snapshot(std::ostream &out, const std::string &name, double time, const SpectralField &field) {
  if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
    throw ContractViolation("snapshot name must be a single non-empty token");
  }
  char tbuf[64];
  std::snprintf(tbuf, sizeof tbuf, "%.17g", time);
  out << kSnapshotMagic << '\n'
      << "dim " << field.grid()->dim() << '\n'
      << "n " << field.grid()->points_per_axis() << '\n'
      << "name " << name << '\n'
      << "time " << tbuf << '\n'
      << "endian little\n"
      << "END\n";
  for (double v : field.values()) {
    std::uint64_t bits = detail::to_little(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
  if (!out) throw Error("snapshot write failed");
}

inline void write_snapshot(const std::string &path, const std::string &name, double time, const SpectralField &field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open snapshot file '" + path + "' for writing");
  write_snapshot(out, name, time, field);
}

inline Snapshot read_snapshot(std::istream &in) {
  Snapshot s;
  std::string line;
  if (!std::getline(in, line) || line != kSnapshotMagic) throw Error("snapshot: bad magic line");
  bool have_dim = false, have_n = false, have_endian = false;
  while (std::getline(in, line)) {
    if (line == "END") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dim") { ls >> s.dim; have_dim = true; }
    else if (key == "n") { ls >> s.n; have_n = true; }
    else if (key == "name") { ls >> s.name; }
    else if (key == "time") { ls >> s.time; }
    else if (key == "endian") {
      std::string e;
      ls >> e;
      if (e != "little") throw Error("snapshot: unsupported endianness '" + e + "'");
      have_endian = true;
    } else {
      throw Error("snapshot: unknown header key '" + key + "'");
    }
    if (ls.fail()) throw Error("snapshot: malformed header line '" + line + "'");
  }
  if (line != "END" || !have_dim || !have_n || !have_endian) throw Error("snapshot: incomplete header");
  if (s.dim < 1 || s.dim > 3) throw Error("snapshot: dim out of range");
  std::size_t count = 1;
  for (int a = 0; a < s.dim; ++a) count *= s.n;
  s.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw Error("snapshot: truncated payload");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    s.values[i] = std::bit_cast<double>(detail::to_little(bits));
  }
  return s;
}

inline Snapshot read_snapshot(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open snapshot file '" + path + "'");
  return read_snapshot(in);
}

inline SpectralField snapshot_field(const Snapshot &s, const GridPtr &grid) {
  if (s.dim != grid->dim() || s.n != grid->points_per_axis()) throw ContractViolation("snapshot grid does not match");
  return SpectralField::from_values(grid, s.values);
}

} // namespace schac
