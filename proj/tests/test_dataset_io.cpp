#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "manquant/dataset_io.hpp"
#include "manquant/error.hpp"

namespace manquant {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("manquant_io_" + std::to_string(::getpid()) + "_" + name);
}

TEST(Container, RoundTripIsBitExact) {
  const Dataset data = sample_sphere(4, 9, 37, RngSeed{3});
  const auto path = temp_path("rt.mrc");
  write_container(data, path);
  const Dataset back = read_container(path);
  EXPECT_EQ(back.points(), data.points());
  fs::remove(path);
}

TEST(Container, HeaderLayout) {
  Matrix m(2, 1);
  m << 0.5, -0.25;
  const auto bytes = encode_container(Dataset(m));
  ASSERT_EQ(bytes.size(), 12u + 16u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MRC1");
  EXPECT_EQ(bytes[4], 2);
  EXPECT_EQ(bytes[8], 1);
  // 0.5 = 0x3FE0000000000000, little-endian.
  EXPECT_EQ(bytes[12 + 7], 0x3F);
  EXPECT_EQ(bytes[12 + 6], 0xE0);
}

TEST(Container, RejectsCorruptInput) {
  Matrix m(2, 2);
  m << 0.1, 0.2, 0.3, 0.4;
  auto bytes = encode_container(Dataset(m));
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_container(truncated), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_container(bad_magic), FormatError);
  EXPECT_THROW(decode_container(std::vector<std::uint8_t>{'M', 'R'}), FormatError);
}

TEST(Csv, ParsesRowsAndSkipsComments) {
  const auto path = temp_path("a.csv");
  {
    std::ofstream f(path);
    f << "# two points\n0,0\n\n1, 0\n";
  }
  const Dataset data = read_csv(path);
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data.points()(1, 0), 1.0);
  EXPECT_EQ(read_dataset(path).points(), data.points());
  fs::remove(path);
}

TEST(Csv, RaggedRowsAndGarbageAreFormatErrors) {
  const auto path = temp_path("bad.csv");
  {
    std::ofstream f(path);
    f << "0,0\n0.1\n";
  }
  EXPECT_THROW(read_csv(path), FormatError);
  {
    std::ofstream f(path, std::ios::trunc);
    f << "0,abc\n";
  }
  EXPECT_THROW(read_csv(path), FormatError);
  fs::remove(path);
  EXPECT_THROW(read_csv(path), IoError);
}

TEST(ReadDataset, DetectsContainerByMagic) {
  const Dataset data = sample_flat_disk(2, 3, 10, RngSeed{1});
  const auto path = temp_path("detect.bin");
  write_container(data, path);
  EXPECT_EQ(read_dataset(path).points(), data.points());
  fs::remove(path);
}

}  // namespace
}  // namespace manquant
