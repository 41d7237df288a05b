// SPDX-License-Identifier: Apache-2.0
#include "nerfkit/npy.hpp"

#include <cstring>
#include <fstream>

#include "nerfkit/common.hpp"

namespace nerfkit::data {

namespace {
const char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};
}

void write_npy_f64(const std::string& path, size_t rows, size_t cols,
                   const std::vector<double>& values) {
  if (values.size() != rows * cols)
    throw UsageError("write_npy_f64: value count does not match shape");
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(rows) + ", " + std::to_string(cols) + "), }";
  // Pad with spaces so magic+version+len+header is a multiple of 64, ending \n.
  size_t base = 6 + 2 + 2;
  size_t total = ((base + header.size() + 1 + 63) / 64) * 64;
  header.append(total - base - header.size() - 1, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, 6);
  char version[2] = {1, 0};
  out.write(version, 2);
  uint16_t hlen = uint16_t(header.size());
  out.write(reinterpret_cast<const char*>(&hlen), 2);
  out.write(header.data(), std::streamsize(header.size()));
  out.write(reinterpret_cast<const char*>(values.data()),
            std::streamsize(values.size() * sizeof(double)));
  if (!out) throw IoError("short write to " + path);
}

NpyArray read_npy_f64(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kMagic, 6) != 0)
    throw FormatError("not an NPY file: " + path);
  char version[2];
  in.read(version, 2);
  if (version[0] != 1) throw FormatError("unsupported NPY version in " + path);
  uint16_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 2);
  std::string header(hlen, '\0');
  in.read(header.data(), hlen);
  if (!in) throw FormatError("truncated NPY header in " + path);
  if (header.find("'<f8'") == std::string::npos)
    throw FormatError("NPY dtype is not little-endian float64 in " + path);
  if (header.find("'fortran_order': False") == std::string::npos)
    throw FormatError("NPY array must be C-ordered in " + path);
  size_t sp = header.find("'shape':");
  size_t lp = header.find('(', sp);
  size_t rp = header.find(')', lp);
  if (sp == std::string::npos || lp == std::string::npos || rp == std::string::npos)
    throw FormatError("malformed NPY shape in " + path);
  std::string shape = header.substr(lp + 1, rp - lp - 1);
  NpyArray arr;
  size_t comma = shape.find(',');
  arr.rows = size_t(std::stoull(shape.substr(0, comma)));
  std::string rest = comma == std::string::npos ? "" : shape.substr(comma + 1);
  // Trim and parse the second dimension; a trailing comma means a 1-D array.
  size_t b = rest.find_first_not_of(" \t");
  arr.cols = (b == std::string::npos) ? 1 : size_t(std::stoull(rest.substr(b)));
  arr.values.resize(arr.rows * arr.cols);
  in.read(reinterpret_cast<char*>(arr.values.data()),
          std::streamsize(arr.values.size() * sizeof(double)));
  if (!in) throw FormatError("truncated NPY payload in " + path);
  return arr;
}

}  // namespace nerfkit::data
