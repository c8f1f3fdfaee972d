#include <gtest/gtest.h>

#include "tablemaster/normalize.hpp"

using namespace tablemaster;

namespace {

Table names_and_ages() { return Table({"Name", "Age"}, {{"Alice", "30"}, {"Bob", "41"}, {"Carol", "25"}}); }

}  // namespace

// Hand-computed: row-major body columns Name (all text) and Age (all integers)
// are both homogeneous, score 1.0. The transpose has one body row, so no
// column holds two cells and its score is 0.
TEST(DetectOrientation, NamesAndIntegersAreRowMajor) {
  Orientation o = detect_orientation(names_and_ages());
  EXPECT_EQ(o.value, OrientationValue::row_major);
  EXPECT_DOUBLE_EQ(o.row_major_score, 1.0);
  EXPECT_DOUBLE_EQ(o.column_major_score, 0.0);
  EXPECT_DOUBLE_EQ(o.confidence, 1.0);
}

TEST(DetectOrientation, TransposeIsColumnMajor) {
  Orientation o = detect_orientation(transpose(names_and_ages()));
  EXPECT_EQ(o.value, OrientationValue::column_major);
  EXPECT_DOUBLE_EQ(o.row_major_score, 0.0);
  EXPECT_DOUBLE_EQ(o.column_major_score, 1.0);
}

TEST(DetectOrientation, TinyTablesDefaultToRowMajor) {
  EXPECT_EQ(detect_orientation(Table({"a"}, {{"1"}})).value, OrientationValue::row_major);
  EXPECT_EQ(detect_orientation(Table({"a", "b"}, {})).value, OrientationValue::row_major);
}

TEST(InferColumnKind, SpecExamples) {
  ColumnKind k = infer_column_kind({"1,234", "567", "8"});
  EXPECT_EQ(k.kind, Kind::integer);
  EXPECT_DOUBLE_EQ(k.parse_ratio, 1.0);
  EXPECT_EQ(infer_column_kind({"Jan 5, 2020", "2020-02-01"}).kind, Kind::date);
  ColumnKind mixed = infer_column_kind({"abc", "7"});
  EXPECT_EQ(mixed.kind, Kind::mixed);
  EXPECT_DOUBLE_EQ(mixed.parse_ratio, 0.5);
  EXPECT_EQ(infer_column_kind({"abc", "def"}).kind, Kind::text);
}

TEST(InferColumnKind, ToleratesFootnoteCells) {
  ColumnKind k = infer_column_kind({"1", "2", "3", "4", "n/a"});
  EXPECT_EQ(k.kind, Kind::integer);
  EXPECT_DOUBLE_EQ(k.parse_ratio, 0.8);
  EXPECT_EQ(infer_column_kind({"1.5", "2", "3.25"}).kind, Kind::decimal);
}

TEST(CanonicalNumbers, SeparatorsAndCurrency) {
  EXPECT_EQ(canonical_integer("1,234"), "1234");
  EXPECT_EQ(canonical_integer("$56"), "56");
  EXPECT_EQ(canonical_integer("-7"), "-7");
  EXPECT_FALSE(canonical_integer("12,34").has_value());
  EXPECT_FALSE(canonical_integer("1.5").has_value());
  EXPECT_EQ(canonical_decimal("€1,234.50"), "1234.50");
  EXPECT_FALSE(canonical_decimal("abc").has_value());
}

TEST(ParseDate, Forms) {
  EXPECT_EQ(parse_date("Jan 5, 2020")->iso, "2020-01-05");
  EXPECT_EQ(parse_date("5 January 2020")->iso, "2020-01-05");
  EXPECT_EQ(parse_date("2020-2-1")->iso, "2020-02-01");
  EXPECT_EQ(parse_date("March 3rd, 2019")->iso, "2019-03-03");
  auto dm = parse_date("25/12/2020");
  EXPECT_EQ(dm->iso, "2020-12-25");
  EXPECT_FALSE(dm->ambiguous);
  auto md = parse_date("03/04/2020");
  EXPECT_EQ(md->iso, "2020-03-04");
  EXPECT_TRUE(md->ambiguous);
  EXPECT_FALSE(parse_date("2021-02-30").has_value());
  EXPECT_FALSE(parse_date("soon").has_value());
}

TEST(Normalize, NumericColumn) {
  NormalizedTable n = normalize(Table({"Item", "Price"}, {{"tea", "1,234"}, {"cake", "$56"}}));
  EXPECT_EQ(n.table.column(1), (std::vector<std::string>{"1234", "56"}));
  EXPECT_EQ(n.column_kinds[1].kind, Kind::integer);
  EXPECT_FALSE(n.transposed);
}

TEST(Normalize, DateColumn) {
  NormalizedTable n = normalize(Table({"Event", "When"}, {{"launch", "Jan 5, 2020"}, {"review", "2020-03-01"}}));
  EXPECT_EQ(n.table.cell(0, 1), "2020-01-05");
  EXPECT_EQ(n.column_kinds[1].kind, Kind::date);
}

TEST(Normalize, UnparsedCellsStayVerbatimAndAreFlagged) {
  NormalizedTable n =
      normalize(Table({"Team", "Goals"}, {{"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}, {"e", "n/a"}}));
  EXPECT_EQ(n.table.cell(4, 1), "n/a");
  bool flagged = false;
  for (const auto& p : n.provenance[1]) flagged = flagged || p.rfind("unparsed", 0) == 0;
  EXPECT_TRUE(flagged);
  EXPECT_TRUE(n.provenance[0].empty());
}

// Hand-built column-major fixture: attributes run down the first column.
TEST(Normalize, ColumnMajorFixtureIsTransposed) {
  Table wild({"Name", "Alice", "Bob"}, {{"Age", "30", "41"}, {"Joined", "Jan 5, 2020", "2019-03-02"}});
  NormalizedTable n = normalize(wild);
  EXPECT_TRUE(n.transposed);
  EXPECT_EQ(n.table, Table({"Name", "Age", "Joined"}, {{"Alice", "30", "2020-01-05"}, {"Bob", "41", "2019-03-02"}}));
}

TEST(Normalize, CleanTableIsFixpoint) {
  Table clean({"Name", "Age"}, {{"Alice", "30"}, {"Bob", "41"}});
  EXPECT_EQ(normalize(clean).table, clean);
  NormalizedTable once = normalize(Table({"a", "b"}, {{"x", "1,000"}, {"y", "Jan 1, 2001"}}));
  EXPECT_EQ(normalize(once.table).table, once.table);
}

TEST(ClassifyOnly, LeavesCellsAlone) {
  Table t({"Item", "Price"}, {{"tea", "1,234"}, {"cake", "$56"}});
  NormalizedTable n = classify_only(t);
  EXPECT_EQ(n.table, t);
  EXPECT_EQ(n.column_kinds[1].kind, Kind::integer);
}
