#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace tabens;

namespace {

TableSchema small_schema() {
  using K = ColumnKind;
  using R = ColumnRole;
  return TableSchema({{"id", K::integer, R::identifier},
                      {"total_area", K::real, R::feature},
                      {"market", K::text, R::feature},
                      {"furniture", K::text, R::feature},
                      {"price", K::integer, R::target}});
}

Row row(std::int64_t id, double area, const char* market, const char* furniture, std::int64_t price) {
  return {id, area, std::string(market), std::string(furniture), price};
}

}  // namespace

TEST(DropColumns, RemovesIdentifierFromListings) {
  const auto ds = generate_synthetic({20, 100.0, 1});
  const auto out = drop_columns(ds, {"id"});
  EXPECT_EQ(out.column_count(), 11u);
  EXPECT_FALSE(out.schema().index_of("id"));
  EXPECT_EQ(out.row_count(), 20u);
  EXPECT_EQ(out.at(3, 0), ds.at(3, 1));
}

TEST(DropColumns, EmptyListIsIdentityAndErrors) {
  const Dataset ds(small_schema(), {row(1, 50, "primary", "yes", 100)});
  EXPECT_EQ(drop_columns(ds, {}), ds);
  EXPECT_THROW(drop_columns(ds, {"price"}), TargetDropForbidden);
  EXPECT_THROW(drop_columns(ds, {"nope"}), UnknownColumn);
}

TEST(Dedupe, Examples) {
  const auto a = row(0, 50, "primary", "yes", 100);
  const auto b = row(0, 60, "primary", "yes", 100);
  const Dataset ds(small_schema(), {a, b, a});
  EXPECT_EQ(dedupe_rows(ds).rows(), (std::vector<Row>{a, b}));
  const Dataset distinct(small_schema(), {a, b});
  EXPECT_EQ(dedupe_rows(distinct), distinct);
  EXPECT_EQ(dedupe_rows(Dataset(small_schema(), {a, a, a})).row_count(), 1u);
}

TEST(DedupeProperty, NoTwoOutputRowsEqualAndOrderKept) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Row> rows;
    const auto n = rng.index(30);
    for (std::size_t i = 0; i < n; ++i)
      rows.push_back(row(0, static_cast<double>(rng.index(3)), rng.index(2) ? "a" : "b", "x",
                         static_cast<std::int64_t>(rng.index(2))));
    const auto out = dedupe_rows(Dataset(small_schema(), rows)).rows();
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = i + 1; j < out.size(); ++j) EXPECT_NE(out[i], out[j]);
    // Output is the subsequence of first occurrences.
    std::size_t k = 0;
    std::vector<Row> seen;
    for (const auto& r : rows) {
      if (std::find(seen.begin(), seen.end(), r) != seen.end()) continue;
      seen.push_back(r);
      ASSERT_LT(k, out.size());
      EXPECT_EQ(out[k++], r);
    }
    EXPECT_EQ(k, out.size());
  }
}

TEST(DropMissing, ThresholdZeroDropsAnyMissingColumn) {
  std::vector<Row> rows;
  for (int i = 0; i < 100; ++i) rows.push_back(row(i, 40 + i, "primary", "yes", 1000 + i));
  rows[17][3] = Missing{};
  const Dataset ds(small_schema(), rows);

  const auto r0 = drop_missing_columns(ds);
  EXPECT_EQ(r0.dropped, std::vector<std::string>{"furniture"});
  EXPECT_EQ(r0.dataset.column_count(), 4u);
  EXPECT_EQ(r0.dataset.row_count(), 100u);
  EXPECT_EQ(r0.rows_removed, 0u);

  const auto r5 = drop_missing_columns(ds, 0.05);
  EXPECT_TRUE(r5.dropped.empty());
  EXPECT_EQ(r5.dataset.column_count(), 5u);
  EXPECT_EQ(r5.dataset.row_count(), 99u);
  EXPECT_EQ(r5.rows_removed, 1u);
}

TEST(DropMissing, CleanDataUnchangedAndTargetErrors) {
  const Dataset ds(small_schema(), {row(1, 50, "primary", "yes", 100), row(2, 51, "primary", "no", 110)});
  const auto r = drop_missing_columns(ds);
  EXPECT_EQ(r.dataset, ds);
  EXPECT_TRUE(r.dropped.empty());

  auto bad = ds.rows();
  bad[1][4] = Missing{};
  EXPECT_THROW(drop_missing_columns(Dataset(small_schema(), bad)), TargetHasMissing);
  EXPECT_THROW(drop_missing_columns(ds, 1.0), InvalidArgument);
  EXPECT_THROW(drop_missing_columns(ds, -0.1), InvalidArgument);
}

TEST(DropMissing, IdentifierColumnIsNeverDropped) {
  auto rows = std::vector<Row>{row(1, 50, "primary", "yes", 100), row(2, 51, "primary", "no", 110)};
  rows[0][0] = Missing{};
  const auto r = drop_missing_columns(Dataset(small_schema(), rows), 0.0);
  EXPECT_TRUE(r.dropped.empty());
  EXPECT_EQ(r.rows_removed, 1u);
}

TEST(Encoding, LexicographicCodes) {
  using K = ColumnKind;
  using R = ColumnRole;
  TableSchema s({{"wall_material", K::text, R::feature}, {"price", K::real, R::target}});
  const auto m = fit_ordinal_encoding(
      Dataset(s, {{std::string("panel"), 1.0}, {std::string("brick"), 2.0}, {std::string("brick"), 3.0}}));
  ASSERT_EQ(m.columns().size(), 1u);
  EXPECT_EQ(m.columns()[0].categories, (std::vector<std::string>{"brick", "panel"}));
  EXPECT_EQ(m.code("wall_material", "brick"), 0u);
  EXPECT_EQ(m.code("wall_material", "panel"), 1u);

  const auto single = fit_ordinal_encoding(Dataset(s, {{std::string("block"), 1.0}}));
  EXPECT_EQ(single.code("wall_material", "block"), 0u);
}

TEST(Encoding, IndependentMapsPerColumn) {
  const Dataset ds(small_schema(), {row(1, 50, "secondary", "yes", 100), row(2, 51, "primary", "no", 110)});
  const auto m = fit_ordinal_encoding(ds);
  EXPECT_EQ(m.code("market", "primary"), 0u);
  EXPECT_EQ(m.code("market", "secondary"), 1u);
  EXPECT_EQ(m.code("furniture", "no"), 0u);
  EXPECT_EQ(m.code("furniture", "yes"), 1u);
  EXPECT_EQ(m.columns().size(), 2u);
}

TEST(Encoding, RequiresNoMissing) {
  auto rows = std::vector<Row>{row(1, 50, "primary", "yes", 100)};
  rows[0][2] = Missing{};
  EXPECT_THROW(fit_ordinal_encoding(Dataset(small_schema(), rows)), InvalidArgument);
}

TEST(Encoding, JsonRoundTrip) {
  const auto m = fit_ordinal_encoding(generate_synthetic({50, 0.0, 3}));
  const nlohmann::json j = m;
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j[0].at("column"), m.columns()[0].column);
  EXPECT_EQ(m.find("wall_material")->categories, (std::vector<std::string>{"block", "brick", "panel"}));
  EXPECT_EQ(nlohmann::json::parse(j.dump()).get<EncodingMap>(), m);
  EXPECT_THROW(nlohmann::json::parse(R"([{"column": "c", "categories": ["b", "a"]}])").get<EncodingMap>(),
               InvalidArgument);
}

TEST(Encode, SingleRowExample) {
  using K = ColumnKind;
  using R = ColumnRole;
  TableSchema s({{"total_area", K::real, R::feature}, {"market", K::text, R::feature}, {"price", K::integer, R::target}});
  const EncodingMap map({{"market", {"primary", "secondary"}}});
  const auto e = encode(Dataset(s, {{60.0, std::string("secondary"), std::int64_t{50000}}}), map);
  EXPECT_EQ(e.x.rows(), 1u);
  EXPECT_EQ(e.x.cols(), 2u);
  EXPECT_EQ(e.x.values(), (std::vector<double>{60.0, 1.0}));
  EXPECT_EQ(e.y, std::vector<double>{50000.0});
  EXPECT_EQ(e.x.feature_names(), (std::vector<std::string>{"total_area", "market"}));

  EXPECT_THROW(encode(Dataset(s, {{60.0, std::string("auction"), std::int64_t{1}}}), map), UnseenCategory);
}

TEST(Encode, OneHotColumns) {
  const Dataset ds(small_schema(), {row(1, 50, "secondary", "yes", 100), row(2, 51, "primary", "no", 110)});
  const auto e = encode(ds, fit_ordinal_encoding(ds), CategoricalEncoding::one_hot);
  EXPECT_EQ(e.x.feature_names(), (std::vector<std::string>{"total_area", "market=primary", "market=secondary",
                                                           "furniture=no", "furniture=yes"}));
  EXPECT_EQ(e.x.values(), (std::vector<double>{50, 0, 1, 0, 1, 51, 1, 0, 1, 0}));
}

// encode after fit on the same data never fails, and text columns hold only
// integer codes in [0, k-1]; the identifier never reaches the matrix.
TEST(EncodeProperty, CodesWithinRange) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ds = drop_columns(generate_synthetic({40 + seed * 10, 5000.0, seed}), {"id"});
    const auto map = fit_ordinal_encoding(ds);
    const auto e = encode(ds, map);
    EXPECT_EQ(e.x.cols(), 10u);
    for (std::size_t j = 0; j < e.x.cols(); ++j) {
      const auto* cats = map.find(e.x.feature_names()[j]);
      if (cats == nullptr) continue;
      for (std::size_t i = 0; i < e.x.rows(); ++i) {
        const double v = e.x(i, j);
        EXPECT_EQ(v, std::floor(v));
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, static_cast<double>(cats->categories.size()));
      }
    }
  }
}

TEST(Split, Examples) {
  const auto s = train_test_split(1200, 0.25, 42);
  EXPECT_EQ(s.test.size(), 300u);
  EXPECT_EQ(s.train.size(), 900u);
  EXPECT_EQ(train_test_split(1200, 0.25, 42), s);
  EXPECT_NE(train_test_split(1200, 0.25, 43), s);

  const auto small = train_test_split(8, 0.25, 7);
  EXPECT_EQ(small.test.size(), 2u);
  std::set<std::size_t> all(small.train.begin(), small.train.end());
  for (auto i : small.test) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all, (std::set<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(Split, Preconditions) {
  EXPECT_THROW(train_test_split(3, 0.25, 1), InvalidArgument);
  EXPECT_THROW(train_test_split(10, 0.0, 1), InvalidArgument);
  EXPECT_THROW(train_test_split(10, 1.0, 1), InvalidArgument);
}

TEST(SplitProperty, PartitionsEveryIndex) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 4 + rng.index(300);
    const double f = rng.uniform(0.05, 0.95);
    const auto s = train_test_split(n, f, rng.next());
    std::vector<int> hits(n, 0);
    for (auto i : s.train) ++hits[i];
    for (auto i : s.test) ++hits[i];
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    const auto expect = std::clamp<long long>(std::llround(static_cast<double>(n) * f), 1,
                                              static_cast<long long>(n) - 1);
    EXPECT_EQ(static_cast<long long>(s.test.size()), expect);
  }
}

// Running the cleaning steps on their own output finds nothing more to do.
TEST(PipelineProperty, CleaningIsIdempotent) {
  auto rows = drop_columns(generate_synthetic({200, 4000.0, 9}), {"id"}).rows();
  rows.push_back(rows[3]);
  rows.push_back(rows[10]);
  rows[5][6] = Missing{};
  const Dataset ds(drop_columns(generate_synthetic({20, 0.0, 1}), {"id"}).schema(), rows);

  const auto once = drop_missing_columns(dedupe_rows(ds));
  EXPECT_EQ(once.dropped.size(), 1u);
  const auto twice = drop_missing_columns(dedupe_rows(once.dataset));
  EXPECT_EQ(twice.dataset, once.dataset);
  EXPECT_TRUE(twice.dropped.empty());
  EXPECT_EQ(twice.rows_removed, 0u);
}
