#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "hpreg/config.hpp"
#include "hpreg/csv.hpp"
#include "hpreg/errors.hpp"

using namespace hpreg;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io;
}

}  // namespace

TEST(Config, SectionsAndComments) {
  const auto doc = ConfigDocument::parse(
      "# header comment\n"
      "band = 0.1, 3.0\n"
      "name = demo  # trailing\n"
      "\n"
      "[harmonic]\n"
      "A = 1\n"
      "[harmonic]\n"
      "A = -2.5e-1\n");
  EXPECT_EQ(doc.root().get("name"), "demo");
  EXPECT_EQ(doc.root().get_list("band"), (std::vector<double>{0.1, 3.0}));
  const auto blocks = doc.blocks("harmonic");
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[1]->get_double("A"), -0.25);
  EXPECT_EQ(doc.blocks("missing").size(), 0u);
}

TEST(Config, TypedAccessAndDefaults) {
  const auto doc = ConfigDocument::parse("n = 12\nflag = true\nx = 2.5\n");
  EXPECT_EQ(doc.root().get_int("n"), 12);
  EXPECT_TRUE(doc.root().get_bool_or("flag", false));
  EXPECT_FALSE(doc.root().get_bool_or("other", false));
  EXPECT_EQ(doc.root().get_double_or("y", 4.0), 4.0);
  EXPECT_EQ(doc.root().get_or("s", "fallback"), "fallback");
}

TEST(Config, Errors) {
  EXPECT_EQ(code_of([] { ConfigDocument::parse("no equals sign\n"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([] { ConfigDocument::parse("a = 1\na = 2\n"); }), ErrorCode::validation);
  const auto doc = ConfigDocument::parse("x = abc\nn = 1.5\n");
  EXPECT_EQ(code_of([&] { doc.root().get_double("x"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([&] { doc.root().get_int("n"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([&] { doc.root().get("missing"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([] { ConfigDocument::load("/nonexistent/file.cfg"); }), ErrorCode::io);
}

TEST(Config, DoubleFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0}) {
    EXPECT_EQ(parse_double(format_double(v), "test"), v);
  }
}

TEST(Csv, HeaderIsMandatory) {
  const auto t = CsvTable::parse("t,x\n0,1.5\n0.25,-2\n");
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.column("x")[1], -2.0);
  EXPECT_TRUE(t.has("t"));
  EXPECT_FALSE(t.has("signal"));
  EXPECT_EQ(code_of([] { CsvTable::parse("0,1\n1,2\n"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([&] { t.column("noise"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([] { CsvTable::parse("t,x\n0,1\n1\n"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([] { CsvTable::parse("t,x\n0,abc\n"); }), ErrorCode::validation);
}

TEST(Csv, RoundTripIsExact) {
  const CsvTable t({"t", "x"}, {{0.0, 0.25}, {1.0 / 3.0, -1e-17}});
  const auto back = CsvTable::parse(t.to_string());
  EXPECT_EQ(back.column("x"), t.column("x"));
  const auto path = std::filesystem::temp_directory_path() / "hpreg_csv_roundtrip.csv";
  t.save(path);
  EXPECT_EQ(CsvTable::load(path).column("x"), t.column("x"));
  std::filesystem::remove(path);
}
