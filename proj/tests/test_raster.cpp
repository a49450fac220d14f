#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "surfgraph/raster.hpp"
#include "test_support.hpp"

using namespace surfgraph;

namespace {

constexpr const char* kSmallGrid =
    "ncols 3\n"
    "nrows 2\n"
    "xllcorner 0\n"
    "yllcorner 0\n"
    "cellsize 0.1\n"
    "NODATA_value -9999\n"
    "1 2 3\n"
    "4 -9999 6\n";

HeightField shifted(const std::string& label, double offset) {
  std::vector<double> v;
  for (int i = 1; i <= 6; ++i) v.push_back(i + offset);
  return fixtures::field_from(label, 2, 3, v);
}

}  // namespace

TEST(ParseAsciiGrid, ReadsHeaderValuesAndNodata) {
  const auto f = parse_ascii_grid(kSmallGrid, "2010");
  EXPECT_EQ(f.year_label(), "2010");
  EXPECT_EQ(f.n_rows(), 2u);
  EXPECT_EQ(f.n_cols(), 3u);
  EXPECT_DOUBLE_EQ(f.grid().cell_size, 0.1);
  EXPECT_DOUBLE_EQ(f.value(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.value(0, 2), 3.0);
  EXPECT_DOUBLE_EQ(f.value(1, 2), 6.0);
  EXPECT_TRUE(f.is_nodata(1, 1));
  EXPECT_EQ(std::count(f.nodata_mask().begin(), f.nodata_mask().end(), true), 1);
  EXPECT_DOUBLE_EQ(f.max_value(), 6.0);
  EXPECT_DOUBLE_EQ(f.min_value(), 1.0);
}

TEST(ParseAsciiGrid, HeaderKeysAreCaseInsensitive) {
  const auto f = parse_ascii_grid("NCOLS 2\nNRows 1\nXLLCORNER 5\nyllCorner 7\nCellSize 2\n0 1\n", "y");
  EXPECT_EQ(f.n_cols(), 2u);
  EXPECT_DOUBLE_EQ(f.grid().origin_lon, 5.0);
  EXPECT_DOUBLE_EQ(f.grid().origin_lat, 7.0);
}

TEST(ParseAsciiGrid, CenterRegisteredHeaderShiftsOrigin) {
  const auto f = parse_ascii_grid("ncols 2\nnrows 1\nxllcenter 5\nyllcenter 7\ncellsize 2\n0 1\n", "y");
  EXPECT_DOUBLE_EQ(f.grid().origin_lon, 4.0);
  EXPECT_DOUBLE_EQ(f.grid().origin_lat, 6.0);
}

TEST(ParseAsciiGrid, AllNodataIsRejected) {
  try {
    parse_ascii_grid("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n-9999 -9999\n", "x");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("all cells are nodata"), std::string::npos);
  }
}

TEST(ParseAsciiGrid, ShortLineNamesTheLine) {
  try {
    parse_ascii_grid("ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n4 5\n", "x");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
  }
}

TEST(ParseAsciiGrid, NonNumericTokenNamesLineAndColumn) {
  try {
    parse_ascii_grid("ncols 3\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 abc 3\n", "x");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 6u);
    EXPECT_EQ(e.column(), 3u);
  }
}

TEST(ParseAsciiGrid, MalformedHeadersAreRejected) {
  EXPECT_THROW(parse_ascii_grid("ncols 3\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n", "x"), ParseError);
  EXPECT_THROW(parse_ascii_grid("ncols 2.5\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n", "x"), ParseError);
  EXPECT_THROW(parse_ascii_grid("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 0\n1 2\n", "x"), ParseError);
  EXPECT_THROW(parse_ascii_grid("ncols 2\nnrows 1\nbogus 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n", "x"),
               ParseError);
  EXPECT_THROW(parse_ascii_grid("ncols 2\nncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n", "x"),
               ParseError);
}

TEST(ParseAsciiGrid, WrongRowCountIsRejected) {
  EXPECT_THROW(parse_ascii_grid("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n", "x"), ParseError);
  EXPECT_THROW(parse_ascii_grid("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3 4\n", "x"),
               ParseError);
}

TEST(ParseAsciiGrid, NegativeThicknessIsRejected) {
  EXPECT_THROW(parse_ascii_grid("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 -2\n", "x"), ParseError);
  EXPECT_THROW(parse_ascii_grid("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 nan\n", "x"), ParseError);
}

TEST(ParseAsciiGrid, RoundTripPreservesField) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = synthesize_field(seed, 9, 12, 3, 37.5, "s");
    EXPECT_EQ(parse_ascii_grid(to_ascii_grid(f), "s"), f);
  }
  const auto with_nodata = parse_ascii_grid(kSmallGrid, "2010");
  EXPECT_EQ(parse_ascii_grid(to_ascii_grid(with_nodata), "2010"), with_nodata);
}

TEST(ValidateDataset, ComputesGlobalExtremes) {
  const auto ds = validate_dataset({shifted("2010", 0), shifted("2012", 1)});
  EXPECT_DOUBLE_EQ(ds.global_min(), 1.0);
  EXPECT_DOUBLE_EQ(ds.global_max(), 7.0);
  EXPECT_EQ(ds.year_labels(), (std::vector<std::string>{"2010", "2012"}));
}

TEST(ValidateDataset, RequiresTwoYears) {
  try {
    validate_dataset({shifted("2010", 0)});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "at least 2 study years required");
  }
}

TEST(ValidateDataset, RejectsGridMismatchAndDuplicates) {
  auto a = fixtures::constant_field("a", 4, 4, 1.0, 1.0);
  auto b = fixtures::constant_field("b", 4, 4, 1.0, 0.5);
  EXPECT_THROW(validate_dataset({a, b}), ValidationError);
  auto c = fixtures::constant_field("a", 4, 4, 2.0, 1.0);
  EXPECT_THROW(validate_dataset({a, c}), ValidationError);
  auto d = fixtures::constant_field("d", 4, 5, 2.0, 1.0);
  EXPECT_THROW(validate_dataset({a, d}), ValidationError);
}

TEST(ValidateDataset, ExtremesDoNotDependOnOrder) {
  std::vector<HeightField> fields;
  for (int i = 0; i < 4; ++i) fields.push_back(synthesize_field(10 + i, 8, 8, 2, 10.0 * (i + 1), "y" + std::to_string(i)));
  const auto ref = validate_dataset(fields);
  std::sort(fields.begin(), fields.end(), [](const auto& a, const auto& b) { return a.year_label() < b.year_label(); });
  do {
    const auto ds = validate_dataset(fields);
    EXPECT_EQ(ds.global_min(), ref.global_min());
    EXPECT_EQ(ds.global_max(), ref.global_max());
    for (std::size_t i = 0; i < fields.size(); ++i) EXPECT_EQ(ds[i].year_label(), fields[i].year_label());
  } while (std::next_permutation(fields.begin(), fields.end(),
                                 [](const auto& a, const auto& b) { return a.year_label() < b.year_label(); }));
}

TEST(SynthesizeField, IsDeterministic) {
  EXPECT_EQ(synthesize_field(0, 16, 16, 4, 50.0), synthesize_field(0, 16, 16, 4, 50.0));
  EXPECT_NE(synthesize_field(0, 16, 16, 4, 50.0).values(), synthesize_field(1, 16, 16, 4, 50.0).values());
}

TEST(SynthesizeField, ZeroBumpsIsFlatZero) {
  const auto f = synthesize_field(3, 8, 8, 0, 10.0);
  for (double v : f.values()) EXPECT_EQ(v, 0.0);
}

TEST(SynthesizeField, RangeAndSmoothness) {
  const auto f = synthesize_field(1, 32, 32, 5, 100.0);
  EXPECT_GE(f.max_value(), 90.0);
  EXPECT_LE(f.max_value(), 100.0);
  EXPECT_GE(f.min_value(), 0.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = synthesize_field(seed, 8 + seed % 30, 8 + (seed * 7) % 30, 1 + seed % 8, 100.0);
    for (std::size_t r = 0; r < g.n_rows(); ++r) {
      for (std::size_t c = 0; c < g.n_cols(); ++c) {
        if (c + 1 < g.n_cols()) {
          ASSERT_LT(std::abs(g.value(r, c) - g.value(r, c + 1)), 50.0);
        }
        if (r + 1 < g.n_rows()) {
          ASSERT_LT(std::abs(g.value(r, c) - g.value(r + 1, c)), 50.0);
        }
      }
    }
    EXPECT_GE(g.max_value(), 90.0);
  }
}

TEST(SynthesizeField, RejectsTinyGrids) {
  EXPECT_THROW(synthesize_field(0, 7, 8, 1, 1.0), ValidationError);
  EXPECT_THROW(synthesize_field(0, 8, 8, 1, 0.0), ValidationError);
}

TEST(DatasetManifest, WriteThenLoad) {
  fixtures::TempDir dir;
  const auto ds = synthesize_dataset(5, 3, 10, 12);
  const auto manifest = write_dataset(ds, dir.path());
  const auto loaded = load_dataset_manifest(manifest);
  ASSERT_EQ(loaded.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(loaded[i], ds[i]);
  EXPECT_EQ(loaded.global_max(), ds.global_max());
}

TEST(DatasetManifest, AcceptsBareArrayAndReportsMissingFiles) {
  fixtures::TempDir dir;
  std::ofstream(dir / "a.asc") << kSmallGrid;
  std::ofstream(dir / "b.asc") << kSmallGrid;
  std::ofstream(dir / "m.json") << R"([{"year_label":"2010","path":"a.asc"},{"year_label":"2012","path":"b.asc"}])";
  EXPECT_EQ(load_dataset_manifest(dir / "m.json").size(), 2u);
  std::ofstream(dir / "bad.json") << R"([{"year_label":"2010","path":"missing.asc"},{"year_label":"2012","path":"b.asc"}])";
  EXPECT_THROW(load_dataset_manifest(dir / "bad.json"), IoError);
}
