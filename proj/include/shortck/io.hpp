#pragma once

// Serialization of run artifacts: ASCII PGM rasters, CSV tables, and
// content digests. Everything is emitted byte-for-byte deterministically:
// LF line endings, '.' decimal separator, 17 significant digits.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shortck/raster.hpp"
#include "shortck/util.hpp"

namespace shortck {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string digest_hex(const std::string& bytes) {
  return strprintf("fnv1a64:%016llx",
                   static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
}

// Plain ASCII (P2) grayscale image. The class-to-gray mapping is fixed:
// attracted 0, undecided 128, escaped 255.
inline int pgm_gray(OrbitKind kind) {
  switch (kind) {
    case OrbitKind::Attracted: return 0;
    case OrbitKind::Undecided: return 128;
    case OrbitKind::Escaped: return 255;
  }
  return 128;
}

inline std::string pgm_bytes(const Raster& r) {
  if (r.width <= 0 || r.height <= 0) throw std::invalid_argument("empty raster");
  std::ostringstream out;
  out << "P2\n" << r.width << " " << r.height << "\n255\n";
  for (int row = 0; row < r.height; ++row) {
    for (int col = 0; col < r.width; ++col) {
      if (col) out << ' ';
      out << pgm_gray(r.at(row, col).kind);
    }
    out << '\n';
  }
  return out.str();
}

// Minimal row-oriented CSV builder. Cells are preformatted strings; the
// numeric helpers below pin doubles to %.17g with a '.' decimal point.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  explicit CsvTable(std::vector<std::string> h) : header(std::move(h)) {
    if (header.empty()) throw std::invalid_argument("CSV needs a header row");
  }

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header.size())
      throw std::invalid_argument("CSV row width does not match the header");
    rows.push_back(std::move(cells));
  }

  std::string to_bytes() const {
    std::ostringstream out;
    join_line(out, header);
    for (const auto& r : rows) join_line(out, r);
    return out.str();
  }

 private:
  static void join_line(std::ostringstream& out, const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  }
};

inline std::string csv_cell(double x) { return fmt_double(x); }
inline std::string csv_cell(int x) { return std::to_string(x); }
inline std::string csv_cell(long long x) { return std::to_string(x); }
inline std::string csv_cell(uint64_t x) { return std::to_string(x); }
inline std::string csv_cell(bool b) { return b ? "1" : "0"; }
inline std::string csv_cell(const std::complex<double>& z) {
  return fmt_double(z.real()) + ";" + fmt_double(z.imag());
}

}  // namespace shortck
