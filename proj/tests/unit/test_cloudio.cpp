#include <gtest/gtest.h>

#include <fstream>

#include "terraclass/cloudio.hpp"
#include "terraclass/error.hpp"
#include "test_util.hpp"

using namespace terraclass;

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(CloudIo, TextLineWithIntegerColor) {
  const auto dir = testutil::temp_dir("cloudio_text");
  write_file(dir / "a.xyz", "# comment\n0 0 0 255 0 0\n");
  const PointCloud c = read_cloud(dir / "a.xyz", CloudFormat::xyzrgb_text);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_TRUE(c.has_color());
  EXPECT_EQ(c[0].rgb, (std::array<float, 3>{1.f, 0.f, 0.f}));
}

TEST(CloudIo, PlyWithoutColor) {
  const auto dir = testutil::temp_dir("cloudio_nocolor");
  write_file(dir / "a.ply",
             "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
             "end_header\n0 0 0\n1 0 0\n0 1 0\n");
  const PointCloud c = read_cloud(dir / "a.ply");
  EXPECT_EQ(c.size(), 3u);
  EXPECT_FALSE(c.has_color());
  EXPECT_FALSE(c.has_labels());
}

TEST(CloudIo, RoundTripAllFormats) {
  const auto dir = testutil::temp_dir("cloudio_roundtrip");
  const PointCloud src = testutil::random_cloud(1000, 11, 100.0);
  for (CloudFormat f : {CloudFormat::ply_ascii, CloudFormat::ply_binary_le, CloudFormat::xyzrgb_text}) {
    const auto path = dir / ("c_" + std::string(format_name(f)));
    write_cloud(src, path, f);
    const PointCloud back = read_cloud(path, f);
    ASSERT_EQ(back.size(), src.size());
    EXPECT_TRUE(back.has_color());
    EXPECT_TRUE(back.has_labels());
    for (std::size_t i = 0; i < src.size(); ++i) {
      EXPECT_NEAR(back[i].pos.x, src[i].pos.x, 1e-6);
      EXPECT_NEAR(back[i].pos.y, src[i].pos.y, 1e-6);
      EXPECT_NEAR(back[i].pos.z, src[i].pos.z, 1e-6);
      EXPECT_EQ(back[i].rgb, src[i].rgb);
      EXPECT_EQ(back[i].label, src[i].label);
    }
  }
}

TEST(CloudIo, LabelWrittenAsClassification) {
  const auto dir = testutil::temp_dir("cloudio_label");
  PointCloud c({}, true, true);
  c.push_back({{1, 2, 3}, {0.5f, 0.5f, 0.5f}, cls::building});
  write_cloud(c, dir / "a.ply", CloudFormat::ply_ascii);
  const std::string text = slurp(dir / "a.ply");
  EXPECT_NE(text.find("property uchar classification"), std::string::npos);
  EXPECT_NE(text.find(" 2\n"), std::string::npos);
}

TEST(CloudIo, ColorizeUsesPalette) {
  const auto dir = testutil::temp_dir("cloudio_colorize");
  PointCloud c({}, true, true);
  c.push_back({{0, 0, 0}, {0, 0, 0}, cls::building});
  write_cloud(c, dir / "a.ply", CloudFormat::ply_binary_le, {.colorize = true});
  const PointCloud back = read_cloud(dir / "a.ply");
  EXPECT_EQ(back[0].rgb, (std::array<float, 3>{0xEF / 255.f, 0x29 / 255.f, 0x29 / 255.f}));
  PointCloud unl({}, true, false);
  unl.push_back({{0, 0, 0}, {0, 0, 0}, kUnlabeled});
  EXPECT_THROW(write_cloud(unl, dir / "b.ply", CloudFormat::ply_ascii, {.colorize = true}), std::invalid_argument);
}

TEST(CloudIo, EmptyCloudNeverWritesAFile) {
  const auto dir = testutil::temp_dir("cloudio_empty");
  EXPECT_THROW(write_cloud(PointCloud(), dir / "e.ply", CloudFormat::ply_ascii), std::invalid_argument);
  EXPECT_FALSE(std::filesystem::exists(dir / "e.ply"));
}

TEST(CloudIo, ErrorsNameLineOrOffset) {
  const auto dir = testutil::temp_dir("cloudio_errors");
  write_file(dir / "bad.xyz", "0 0 0\n1 2 x\n");
  try {
    read_cloud(dir / "bad.xyz", CloudFormat::xyzrgb_text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }

  const PointCloud src = testutil::random_cloud(10, 3);
  write_cloud(src, dir / "full.ply", CloudFormat::ply_binary_le);
  std::string bytes = slurp(dir / "full.ply");
  bytes.resize(bytes.size() - 7);
  write_file(dir / "trunc.ply", bytes);
  try {
    read_cloud(dir / "trunc.ply");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos) << e.what();
  }

  write_file(dir / "hdr.ply", "ply\nformat ascii 1.0\nelement vertex 1\nproperty quux x\nend_header\n0\n");
  EXPECT_THROW(read_cloud(dir / "hdr.ply"), ParseError);
  EXPECT_THROW(read_cloud(dir / "missing.ply"), IoError);
}

TEST(CloudIo, DeclaredFormatMustMatchHeader) {
  const auto dir = testutil::temp_dir("cloudio_mismatch");
  write_cloud(testutil::random_cloud(5, 1), dir / "a.ply", CloudFormat::ply_ascii);
  EXPECT_THROW(read_cloud(dir / "a.ply", CloudFormat::ply_binary_le), ParseError);
  EXPECT_EQ(detect_format(dir / "a.ply"), CloudFormat::ply_ascii);
}

TEST(CloudIo, SkipsForeignElementsAndReadsFloatColor) {
  const auto dir = testutil::temp_dir("cloudio_foreign");
  write_file(dir / "a.ply",
             "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\nproperty double x\nproperty double y\n"
             "property double z\nproperty float red\nproperty float green\nproperty float blue\nproperty float nx\n"
             "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
             "0 0 0 0.25 0.5 1 7\n1 1 1 0 0 0 7\n3 0 1 1\n");
  const PointCloud c = read_cloud(dir / "a.ply");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_FLOAT_EQ(c[0].rgb[0], 0.25f);
  EXPECT_FLOAT_EQ(c[0].rgb[2], 1.f);
}

TEST(CloudIo, RejectsUnknownClassificationValue) {
  const auto dir = testutil::temp_dir("cloudio_badlabel");
  write_file(dir / "a.ply",
             "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n"
             "property uchar classification\nend_header\n0 0 0 9\n");
  EXPECT_THROW(read_cloud(dir / "a.ply"), ParseError);
}
