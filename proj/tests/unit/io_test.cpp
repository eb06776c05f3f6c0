#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "generators.hpp"
#include "radloc/pipeline.hpp"
#include "radloc/raster_io.hpp"
#include "radloc/scan_io.hpp"

namespace radloc {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("radloc_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

using ScanIo = TempDir;
using RasterIo = TempDir;

PolarScan positive_scan(testing::Gen& gen) {
  PolarScan s = gen.scan(40, 70);
  for (auto& v : s.data()) v = std::max(v, 0.0f);
  s.set_timestamp(12.75);
  return s;
}

TEST_F(ScanIo, LosslessEncodingsRoundTripBitExact) {
  testing::Gen gen(71);
  const PolarScan s = positive_scan(gen);
  for (const auto enc : {ScanEncoding::kFloat32, ScanEncoding::kSparse, choose_lossless_encoding(s)}) {
    const fs::path p = dir_ / "a.rsc";
    write_scan(p, s, enc);
    const PolarScan back = read_scan(p);
    EXPECT_EQ(back.azimuth_count(), s.azimuth_count());
    EXPECT_EQ(back.range_bin_count(), s.range_bin_count());
    EXPECT_EQ(back.range_resolution(), s.range_resolution());
    EXPECT_EQ(back.timestamp(), s.timestamp());
    EXPECT_TRUE(std::equal(s.data().begin(), s.data().end(), back.data().begin()));
  }
}

TEST_F(ScanIo, Uint8QuantizesWithinHalfStep) {
  testing::Gen gen(72);
  PolarScan s = positive_scan(gen);
  const double scale = 1.0 / 200.0;
  write_scan(dir_ / "q.rsc", s, ScanEncoding::kUint8, scale);
  const PolarScan back = read_scan(dir_ / "q.rsc");
  for (std::size_t i = 0; i < s.data().size(); ++i) EXPECT_NEAR(back.data()[i], s.data()[i], scale / 2.0 + 1e-7);
}

TEST_F(ScanIo, CsvFormRoundTrips) {
  testing::Gen gen(73);
  const PolarScan s = positive_scan(gen);
  write_scan_csv(dir_ / "s.csv", s);
  const PolarScan back = read_scan(dir_ / "s.csv");
  EXPECT_TRUE(std::equal(s.data().begin(), s.data().end(), back.data().begin()));
  EXPECT_EQ(back.timestamp(), s.timestamp());
}

TEST_F(ScanIo, SparseIsChosenForSparseScans) {
  PolarScan s(400, 3000, 0.043);
  s.at(3, 100) = 1.0f;
  EXPECT_EQ(choose_lossless_encoding(s), ScanEncoding::kSparse);
  for (auto& v : s.data()) v = 0.5f;
  EXPECT_EQ(choose_lossless_encoding(s), ScanEncoding::kFloat32);
}

TEST_F(ScanIo, CorruptFilesThrow) {
  std::ofstream(dir_ / "bad.rsc", std::ios::binary) << "RSC";
  EXPECT_THROW(read_scan(dir_ / "bad.rsc"), std::runtime_error);
  EXPECT_THROW(read_scan(dir_ / "missing.rsc"), std::runtime_error);
}

TEST_F(RasterIo, SixteenBitRoundTripWithinQuantum) {
  testing::Gen gen(74);
  OccupancyImage img = gen.occupancy(33, 21);
  img.set_origin(Pose2(12.5, -7.25, 0.0));
  write_occupancy(dir_ / "o.pgm", img, 16);
  const OccupancyImage back = read_occupancy(dir_ / "o.pgm");
  ASSERT_EQ(back.width(), 33u);
  ASSERT_EQ(back.height(), 21u);
  EXPECT_EQ(back.meters_per_pixel(), img.meters_per_pixel());
  EXPECT_EQ(back.origin().x(), 12.5);
  EXPECT_EQ(back.origin().y(), -7.25);
  for (std::size_t i = 0; i < img.values().size(); ++i) EXPECT_NEAR(back.values()[i], img.values()[i], 0.5 / 65535.0 + 1e-12);
  EXPECT_TRUE(fs::exists(raster_meta_path(dir_ / "o.pgm")));
}

TEST_F(RasterIo, LabelsRoundTrip) {
  testing::Gen gen(75);
  const OccupancyLabels l = gen.labels(17, 9);
  write_labels(dir_ / "l.pgm", dir_ / "m.pgm", l, OccupancyImage(17, 9, 0.433));
  const OccupancyLabels back = read_labels(dir_ / "l.pgm", dir_ / "m.pgm");
  EXPECT_EQ(back.label, l.label);
  EXPECT_EQ(back.mask, l.mask);
}

TEST(Config, EntriesRoundTripExactly) {
  PipelineConfig c;
  c.sigma_sat_xy = 0.1 + 0.2;
  c.delta_sat = 1.0 / 3.0;
  c.k_sat = 11;
  c.seed = 18446744073709551557ull;
  c.origin = {43.7822, -79.4661, 271.25};
  c.unary_blackout_begin = 100;
  c.unary_blackout_end = 120;
  c.disable_unary = true;
  std::ostringstream text;
  for (const auto& [k, v] : config_entries(c)) text << k << '=' << v << '\n';
  std::istringstream in(text.str());
  const PipelineConfig back = parse_config(in);
  EXPECT_EQ(config_entries(back), config_entries(c));
  EXPECT_EQ(back.sigma_sat_xy, c.sigma_sat_xy);
  EXPECT_EQ(back.delta_sat, c.delta_sat);
  EXPECT_EQ(back.seed, c.seed);
}

TEST(Config, CommentsOverridesAndErrors) {
  std::istringstream in("# tuned\n\nsigma_sat_xy = 0.25  # m\ntau_fit=0.7\n");
  std::vector<std::string> overridden;
  const PipelineConfig c = parse_config(in, {}, &overridden);
  EXPECT_EQ(c.sigma_sat_xy, 0.25);
  EXPECT_EQ(c.tau_fit, 0.7);
  EXPECT_EQ(overridden, (std::vector<std::string>{"sigma_sat_xy", "tau_fit"}));
  std::istringstream unknown("bogus_key=1\n");
  EXPECT_THROW(parse_config(unknown), std::invalid_argument);
  std::istringstream malformed("tau_fit=abc\n");
  EXPECT_THROW(parse_config(malformed), std::invalid_argument);
  std::istringstream no_equals("tau_fit\n");
  EXPECT_THROW(parse_config(no_equals), std::invalid_argument);
}

TEST(Config, ValidateRejectsBadValues) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tau_fit = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.sigma_sat_xy = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.k_radar = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace radloc
