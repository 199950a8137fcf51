#include "manquant/dataset_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "manquant/error.hpp"

namespace manquant {

namespace {

constexpr char kMagic[4] = {'M', 'R', 'C', '1'};
constexpr std::size_t kHeader = 12;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= std::uint32_t{bytes[offset + b]} << (8 * b);
  return v;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<std::uint8_t> encode_container(const Dataset& data) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  put_u32(out, static_cast<std::uint32_t>(data.ambient_dim()));
  out.reserve(kHeader + 8 * data.size() * data.ambient_dim());
  const Matrix& m = data.points();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto bits = std::bit_cast<std::uint64_t>(m(i, j));
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  return out;
}

Dataset decode_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeader) throw FormatError("truncated MRC1 header", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad MRC1 magic", 0);
  const std::size_t n = get_u32(bytes, 4);
  const std::size_t dim = get_u32(bytes, 8);
  if (n == 0 || dim == 0) throw FormatError("MRC1 container with zero rows or columns", 4);
  const std::size_t needed = kHeader + 8 * n * dim;
  if (bytes.size() != needed) {
    throw FormatError("MRC1 payload size mismatch: expected " + std::to_string(needed) +
                          " bytes, have " + std::to_string(bytes.size()),
                      std::min(bytes.size(), needed));
  }
  Matrix points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::size_t offset = kHeader;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= std::uint64_t{bytes[offset + b]} << (8 * b);
      points(i, j) = std::bit_cast<double>(bits);
      offset += 8;
    }
  }
  return Dataset(std::move(points));
}

void write_container(const Dataset& data, const std::filesystem::path& path) {
  const auto bytes = encode_container(data);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Dataset read_container(const std::filesystem::path& path) { return decode_container(slurp(path)); }

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    const std::uint64_t line_offset = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      std::string field = line.substr(pos, end - pos);
      const auto first = field.find_first_not_of(" \t");
      const auto last = field.find_last_not_of(" \t");
      field = first == std::string::npos ? "" : field.substr(first, last - first + 1);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw FormatError("unparsable CSV field '" + field + "'", line_offset + pos);
      }
      row.push_back(value);
      pos = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("CSV row width " + std::to_string(row.size()) + " differs from " +
                            std::to_string(rows.front().size()),
                        line_offset);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("CSV file has no data rows", 0);
  Matrix points(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return Dataset(std::move(points));
}

Dataset read_dataset(const std::filesystem::path& path) {
  auto bytes = slurp(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) return decode_container(bytes);
  if (bytes.size() >= 4 && bytes[0] == 0 && bytes[1] == 0 && bytes[2] == 0x08 && bytes[3] == 0x03) {
    return parse_idx3(bytes);
  }
  return read_csv(path);
}

}  // namespace manquant
