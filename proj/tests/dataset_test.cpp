#include "synaudit/dataset.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "synaudit/common.hpp"

namespace {

using namespace synaudit;

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

// --- schema inference -------------------------------------------------------

TEST(InferSchemaTest, AllNumericCells) {
  const auto schema = infer_schema({{"1.5"}, {"2"}, {"3e1"}}, {"x"});
  ASSERT_EQ(schema.size(), 1u);
  EXPECT_EQ(schema[0].kind, ColumnKind::numeric);
}

TEST(InferSchemaTest, NonNumericCellsBecomeCategories) {
  const auto schema = infer_schema({{"a"}, {"b"}, {"a"}}, {"c"});
  ASSERT_EQ(schema.size(), 1u);
  EXPECT_EQ(schema[0].kind, ColumnKind::categorical);
  EXPECT_EQ(schema[0].categories, (std::vector<std::string>{"a", "b"}));
}

TEST(InferSchemaTest, OneUnparseableCellForcesCategorical) {
  const auto schema = infer_schema({{"1"}, {"x"}}, {"c"});
  EXPECT_EQ(schema[0].kind, ColumnKind::categorical);
  EXPECT_EQ(schema[0].categories, (std::vector<std::string>{"1", "x"}));
}

TEST(InferSchemaTest, InfinityIsNotAFiniteNumber) {
  const auto schema = infer_schema({{"inf"}, {"1"}}, {"c"});
  EXPECT_EQ(schema[0].kind, ColumnKind::categorical);
}

TEST(InferSchemaTest, RaggedRowsRejected) {
  EXPECT_THROW(infer_schema({{"1", "2"}, {"3"}}, {"a", "b"}), IngestError);
}

TEST(InferSchemaTest, EmptyHeaderRejected) {
  EXPECT_THROW(infer_schema({}, {}), IngestError);
}

TEST(InferSchemaTest, PermutationInvariant) {
  const std::vector<std::vector<std::string>> rows = {{"a", "1"}, {"b", "2"}, {"c", "0.5"}};
  std::vector<std::vector<std::string>> shuffled = {rows[2], rows[0], rows[1]};
  EXPECT_EQ(infer_schema(rows, {"c", "x"}), infer_schema(shuffled, {"c", "x"}));
}

// --- CSV parsing -------------------------------------------------------------

TEST(CsvTest, BasicLoad) {
  const auto path = temp_file("synaudit_basic.csv");
  std::ofstream(path) << "x,color\n1.5,red\n2.5,blue\n-1,red\n";
  const TabularDataset ds = load_csv(path);
  EXPECT_EQ(ds.row_count(), 3u);
  EXPECT_EQ(ds.column_count(), 2u);
  EXPECT_EQ(ds.schema()[0].kind, ColumnKind::numeric);
  EXPECT_EQ(ds.schema()[1].kind, ColumnKind::categorical);
  EXPECT_DOUBLE_EQ(ds.numeric_at(0, 0), 1.5);
  EXPECT_EQ(ds.category_at(1, 1), "blue");
}

TEST(CsvTest, MissingFile) {
  try {
    load_csv(temp_file("synaudit_definitely_missing.csv"));
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_EQ(e.kind(), IngestError::Kind::missing_file);
  }
}

TEST(CsvTest, ValueOutsideProvidedNumericColumn) {
  const auto path = temp_file("synaudit_badnum.csv");
  std::ofstream(path) << "x\nzz\n";
  std::vector<ColumnSchema> schema{{"x", ColumnKind::numeric, {}}};
  try {
    load_csv(path, schema);
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_EQ(e.kind(), IngestError::Kind::parse);
  }
}

TEST(CsvTest, UnseenCategoryAgainstProvidedSchema) {
  const auto path = temp_file("synaudit_badcat.csv");
  std::ofstream(path) << "c\nz\n";
  std::vector<ColumnSchema> schema{{"c", ColumnKind::categorical, {"a", "b"}}};
  try {
    load_csv(path, schema);
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_EQ(e.kind(), IngestError::Kind::schema);
  }
}

TEST(CsvTest, EmptyDataSectionIsLegal) {
  const auto path = temp_file("synaudit_empty.csv");
  std::ofstream(path) << "x,y\n";
  const TabularDataset ds = load_csv(path);
  EXPECT_EQ(ds.row_count(), 0u);
  EXPECT_EQ(ds.column_count(), 2u);
}

TEST(CsvTest, EmptyCellInNumericColumnIsAParseFailure) {
  const auto path = temp_file("synaudit_missingcell.csv");
  std::ofstream(path) << "x\n1\n\n2\n";  // blank line = empty cell in a 1-col file
  EXPECT_THROW(load_csv(path), IngestError);
}

TEST(CsvTest, QuotedFieldsWithCommasQuotesNewlines) {
  const auto path = temp_file("synaudit_quoted.csv");
  std::ofstream(path) << "c\n\"a,b\"\n\"say \"\"hi\"\"\"\n\"two\nlines\"\n";
  const TabularDataset ds = load_csv(path);
  ASSERT_EQ(ds.row_count(), 3u);
  EXPECT_EQ(ds.category_at(0, 0), "a,b");
  EXPECT_EQ(ds.category_at(1, 0), "say \"hi\"");
  EXPECT_EQ(ds.category_at(2, 0), "two\nlines");
}

TEST(CsvTest, CrlfLineEndings) {
  const auto path = temp_file("synaudit_crlf.csv");
  std::ofstream(path) << "x\r\n1\r\n2\r\n";
  EXPECT_EQ(load_csv(path).row_count(), 2u);
}

TEST(CsvTest, UnterminatedQuoteRejected) {
  EXPECT_THROW(parse_csv_text("c\n\"oops\n"), IngestError);
}

TEST(CsvTest, RoundTripIdentity) {
  Rng rng(123);
  std::vector<ColumnSchema> schema{
      {"x", ColumnKind::numeric, {}},
      {"label", ColumnKind::categorical, {"a,b", "plain", "with \"q\""}}};
  std::vector<Row> rows;
  const std::vector<std::string> cats = schema[1].categories;
  for (int i = 0; i < 50; ++i) {
    // Awkward doubles on purpose: shortest round-trip formatting must hold.
    const double v = rng.normal() * std::pow(10.0, static_cast<double>(i % 9) - 4.0);
    rows.push_back({v, cats[rng.below(cats.size())]});
  }
  const TabularDataset ds(schema, rows);
  const auto path = temp_file("synaudit_roundtrip.csv");
  write_csv(ds, path);
  const TabularDataset back = load_csv(path, schema);
  EXPECT_EQ(ds, back);
}

// --- split_disjoint ----------------------------------------------------------

TabularDataset sequential_dataset(std::size_t n) {
  std::vector<ColumnSchema> schema{{"id", ColumnKind::numeric, {}}};
  std::vector<Row> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back({static_cast<double>(i)});
  return TabularDataset(schema, rows);
}

TEST(SplitDisjointTest, CoversDistinctRows) {
  const auto ds = sequential_dataset(12);
  const SplitTriple split = split_disjoint(ds, 4, 99);
  EXPECT_EQ(split.train.row_count(), 4u);
  EXPECT_EQ(split.reference.row_count(), 4u);
  EXPECT_EQ(split.holdout.row_count(), 4u);
  std::set<double> seen;
  for (const auto* part : {&split.train, &split.reference, &split.holdout})
    for (std::size_t i = 0; i < part->row_count(); ++i) seen.insert(part->numeric_at(i, 0));
  EXPECT_EQ(seen.size(), 12u);
}

TEST(SplitDisjointTest, Deterministic) {
  const auto ds = sequential_dataset(30);
  const SplitTriple a = split_disjoint(ds, 5, 7);
  const SplitTriple b = split_disjoint(ds, 5, 7);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.reference, b.reference);
  EXPECT_EQ(a.holdout, b.holdout);
  const SplitTriple c = split_disjoint(ds, 5, 8);
  EXPECT_FALSE(a.train == c.train);
}

TEST(SplitDisjointTest, InsufficientRows) {
  EXPECT_THROW(split_disjoint(sequential_dataset(10), 4, 0), InsufficientRows);
}

TEST(SplitDisjointTest, DisjointnessProperty) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t total = 6 + rng.below(60);
    const std::size_t n = 1 + rng.below(total / 3);
    const auto ds = sequential_dataset(total);
    const SplitTriple split = split_disjoint(ds, n, rng.next_u64());
    std::set<double> seen;
    std::size_t count = 0;
    for (const auto* part : {&split.train, &split.reference, &split.holdout})
      for (std::size_t i = 0; i < part->row_count(); ++i, ++count)
        seen.insert(part->numeric_at(i, 0));
    EXPECT_EQ(count, 3 * n);
    EXPECT_EQ(seen.size(), 3 * n);  // pairwise intersections empty
  }
}

// --- dataset invariants ------------------------------------------------------

TEST(TabularDatasetTest, RejectsNaN) {
  std::vector<ColumnSchema> schema{{"x", ColumnKind::numeric, {}}};
  EXPECT_THROW(TabularDataset(schema, {{std::nan("")}}), Error);
}

TEST(TabularDatasetTest, RejectsUnknownCategory) {
  std::vector<ColumnSchema> schema{{"c", ColumnKind::categorical, {"a"}}};
  EXPECT_THROW(TabularDataset(schema, {{std::string("b")}}), Error);
}

TEST(TabularDatasetTest, RejectsDuplicateColumnNames) {
  std::vector<ColumnSchema> schema{{"x", ColumnKind::numeric, {}},
                                   {"x", ColumnKind::numeric, {}}};
  EXPECT_THROW(TabularDataset(schema, {}), Error);
}

TEST(ConcatRowsTest, MergesCategoryVocabularies) {
  std::vector<ColumnSchema> sa{{"c", ColumnKind::categorical, {"a"}}};
  std::vector<ColumnSchema> sb{{"c", ColumnKind::categorical, {"b"}}};
  const TabularDataset a(sa, {{std::string("a")}});
  const TabularDataset b(sb, {{std::string("b")}});
  const TabularDataset both = concat_rows({&a, &b});
  EXPECT_EQ(both.row_count(), 2u);
  EXPECT_EQ(both.schema()[0].categories, (std::vector<std::string>{"a", "b"}));
}

}  // namespace
