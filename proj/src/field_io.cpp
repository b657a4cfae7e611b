#include "prandtl/field_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace prandtl {

namespace {

static_assert(std::endian::native == std::endian::little,
              "field dumps are written with native little-endian byte order");

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw std::runtime_error("field dump " + path.string() + ": unexpected end of file");
  }
  return v;
}

}  // namespace

void write_field_dump(const std::filesystem::path& path, const Field& f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write("PRGV", 4);
  put<std::uint32_t>(out, kFieldDumpVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.nx()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.ny()));
  const auto nodes = f.grid().nodes();
  out.write(reinterpret_cast<const char*>(nodes.data()),
            static_cast<std::streamsize>(nodes.size() * sizeof(double)));
  const auto values = f.values();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Field read_field_dump(const std::filesystem::path& path, std::shared_ptr<const YGrid> grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open field dump " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || std::memcmp(magic.data(), "PRGV", 4) != 0) {
    throw std::runtime_error("field dump " + path.string() + ": bad magic");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kFieldDumpVersion) {
    throw std::runtime_error("field dump " + path.string() + ": unsupported version " +
                             std::to_string(version));
  }
  const auto nx = get<std::uint32_t>(in, path);
  const auto ny = get<std::uint32_t>(in, path);
  std::vector<double> nodes(ny);
  if (!in.read(reinterpret_cast<char*>(nodes.data()),
               static_cast<std::streamsize>(ny * sizeof(double)))) {
    throw std::runtime_error("field dump " + path.string() + ": truncated node table");
  }
  if (grid) {
    const auto g = grid->nodes();
    if (g.size() != ny || std::memcmp(g.data(), nodes.data(), ny * sizeof(double)) != 0) {
      throw std::runtime_error("field dump " + path.string() +
                               ": stored y-nodes differ from the configured grid");
    }
  } else {
    grid = YGrid::from_nodes(std::move(nodes));
  }
  Field f(nx, std::move(grid));
  auto values = f.values();
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    throw std::runtime_error("field dump " + path.string() + ": truncated values");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("field dump " + path.string() + ": trailing bytes");
  }
  return f;
}

std::string format_exact(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : impl_(std::make_unique<Impl>()), columns_(header.size()) {
  impl_->out.open(path, std::ios::trunc);
  if (!impl_->out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  row_text(header);
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_exact(v));
  row_text(cells);
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CsvWriter: wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << cells[i];
  }
  impl_->out << '\n';
  impl_->out.flush();
}

void CsvWriter::truncation_marker(const std::string& reason) {
  impl_->out << "# TRUNCATED: " << reason << '\n';
  impl_->out.flush();
}

}  // namespace prandtl
