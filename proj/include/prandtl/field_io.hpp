#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "prandtl/field.hpp"
#include "prandtl/ygrid.hpp"

namespace prandtl {

/// Binary field dump, little-endian:
///   "PRGV", u32 version, u32 nx, u32 ny, ny f64 nodes, nx*ny f64 values
/// with values ordered row-major in x (all y for ix = 0, then ix = 1, ...).
inline constexpr std::uint32_t kFieldDumpVersion = 1;

void write_field_dump(const std::filesystem::path& path, const Field& f);

/// Reads a dump. If `grid` is given, the stored nodes must match it exactly
/// and the returned field shares it; otherwise a grid is built from the
/// stored nodes. Throws std::runtime_error on malformed input.
Field read_field_dump(const std::filesystem::path& path,
                      std::shared_ptr<const YGrid> grid = nullptr);

/// Formats a double so that parsing it back yields the same bits.
std::string format_exact(double v);

/// Small CSV writer: fixed header, exact number formatting, flushed after
/// every row so a crash leaves a readable prefix.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  /// Mixed row; each cell is already formatted.
  void row_text(const std::vector<std::string>& cells);
  /// Marks the file as cut short, e.g. after a blow-up.
  void truncation_marker(const std::string& reason);
  std::size_t columns() const { return columns_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t columns_;
};

}  // namespace prandtl
