#include "synaudit/toygen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "synaudit/common.hpp"
#include "synaudit/dataset.hpp"

namespace {

using namespace synaudit;

PopulationSpec gaussian_population(double mean = 0.0, double variance = 1.0) {
  PopulationSpec spec;
  spec.columns = {{"x", ColumnKind::numeric, {}}};
  spec.mixture = {{1.0, {mean}, {variance}}};
  return spec;
}

PopulationSpec mixed_population() {
  PopulationSpec spec;
  spec.columns = {{"x", ColumnKind::numeric, {}},
                  {"c", ColumnKind::categorical, {"a", "b"}}};
  spec.mixture = {{0.6, {0.0}, {1.0}}, {0.4, {4.0}, {2.0}}};
  spec.categorical_probs["c"] = {0.7, 0.3};
  return spec;
}

TEST(PopulationSpecTest, ValidationCatchesBadWeightsAndTables) {
  PopulationSpec bad_weights = mixed_population();
  bad_weights.mixture[0].weight = 0.7;  // sums to 1.1
  EXPECT_THROW(bad_weights.validate(), ConfigError);

  PopulationSpec bad_table = mixed_population();
  bad_table.categorical_probs["c"] = {1.0};  // wrong arity
  EXPECT_THROW(bad_table.validate(), ConfigError);

  PopulationSpec bad_variance = mixed_population();
  bad_variance.mixture[1].variance[0] = 0.0;
  EXPECT_THROW(bad_variance.validate(), ConfigError);
}

TEST(PopulationSpecTest, JsonRoundTrip) {
  const PopulationSpec spec = mixed_population();
  const PopulationSpec back = PopulationSpec::from_json(spec.to_json());
  EXPECT_EQ(back.columns.size(), 2u);
  EXPECT_EQ(back.mixture.size(), 2u);
  EXPECT_DOUBLE_EQ(back.categorical_probs.at("c")[0], 0.7);
}

TEST(SamplePopulationTest, DeterministicInSeed) {
  const PopulationSpec spec = mixed_population();
  const TabularDataset a = sample_population(spec, 3, 5);
  const TabularDataset b = sample_population(spec, 3, 5);
  EXPECT_EQ(a, b);
  const TabularDataset c = sample_population(spec, 3, 6);
  EXPECT_FALSE(a == c);
}

TEST(SamplePopulationTest, DegenerateCategoryTable) {
  PopulationSpec spec = mixed_population();
  spec.categorical_probs["c"] = {1.0, 0.0};
  const TabularDataset ds = sample_population(spec, 50, 1);
  for (std::size_t i = 0; i < ds.row_count(); ++i) EXPECT_EQ(ds.category_at(i, 1), "a");
}

TEST(SamplePopulationTest, SampleMeanWithinCltBound) {
  const PopulationSpec spec = gaussian_population(2.0, 4.0);
  const std::size_t n = 10000;
  const TabularDataset ds = sample_population(spec, n, 17);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += ds.numeric_at(i, 0);
  mean /= static_cast<double>(n);
  EXPECT_NEAR(mean, 2.0, 4.0 * 2.0 / std::sqrt(static_cast<double>(n)));
}

TEST(GenerateTest, PureMemorizerCopiesTrainingRows) {
  const PopulationSpec spec = mixed_population();
  const TabularDataset train = sample_population(spec, 40, 3);
  GeneratorSpec gen;
  gen.kind = GeneratorKind::memorizer;
  gen.noise_fraction = 0.0;
  gen.resample_prob = 0.0;
  const TabularDataset synth = generate(gen, train, 60, 9);
  std::set<Row> train_rows(train.rows().begin(), train.rows().end());
  for (const Row& row : synth.rows()) EXPECT_TRUE(train_rows.count(row)) << "row not from T";
}

TEST(GenerateTest, MemorizerNoiseStaysNearSource) {
  const PopulationSpec spec = gaussian_population();
  const TabularDataset train = sample_population(spec, 50, 4);
  GeneratorSpec gen;
  gen.kind = GeneratorKind::memorizer;
  gen.noise_fraction = 0.01;
  const TabularDataset synth = generate(gen, train, 100, 5);
  for (std::size_t i = 0; i < synth.row_count(); ++i) {
    double best = 1e30;
    for (std::size_t t = 0; t < train.row_count(); ++t)
      best = std::min(best, std::abs(synth.numeric_at(i, 0) - train.numeric_at(t, 0)));
    EXPECT_LT(best, 0.1);  // noise sigma ~ 0.01 * sigma(T)
  }
}

TEST(GenerateTest, OracleIgnoresTrainingSet) {
  const PopulationSpec spec = mixed_population();
  const TabularDataset t1 = sample_population(spec, 30, 100);
  const TabularDataset t2 = sample_population(spec, 30, 200);
  GeneratorSpec gen;
  gen.kind = GeneratorKind::population_oracle;
  gen.population = spec;
  EXPECT_EQ(generate(gen, t1, 25, 7), generate(gen, t2, 25, 7));
}

TEST(GenerateTest, OracleWithoutPopulationRejected) {
  GeneratorSpec gen;
  gen.kind = GeneratorKind::population_oracle;
  const TabularDataset train = sample_population(gaussian_population(), 10, 1);
  EXPECT_THROW(generate(gen, train, 5, 1), ConfigError);
}

TEST(GenerateTest, ParametricFitTracksTrainingMean) {
  const PopulationSpec spec = gaussian_population(3.0, 1.0);
  const TabularDataset train = sample_population(spec, 2000, 11);
  double t_mean = 0.0;
  for (std::size_t i = 0; i < train.row_count(); ++i) t_mean += train.numeric_at(i, 0);
  t_mean /= static_cast<double>(train.row_count());

  GeneratorSpec gen;
  gen.kind = GeneratorKind::parametric_fit;
  const std::size_t m = 4000;
  const TabularDataset synth = generate(gen, train, m, 13);
  double s_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) s_mean += synth.numeric_at(i, 0);
  s_mean /= static_cast<double>(m);
  EXPECT_NEAR(s_mean, t_mean, 4.0 / std::sqrt(static_cast<double>(m)));
}

TEST(GenerateTest, InvalidKnobsRejected) {
  const PopulationSpec spec = gaussian_population();
  const TabularDataset train = sample_population(spec, 10, 1);
  GeneratorSpec gen;
  gen.kind = GeneratorKind::memorizer;
  gen.noise_fraction = -0.1;
  EXPECT_THROW(generate(gen, train, 5, 1), ConfigError);
  gen.noise_fraction = 0.0;
  gen.resample_prob = 1.5;
  EXPECT_THROW(generate(gen, train, 5, 1), ConfigError);
}

TEST(GenerateTest, EmptyTrainingSetRejected) {
  const PopulationSpec spec = gaussian_population();
  const TabularDataset empty(spec.columns, {});
  GeneratorSpec gen;
  gen.kind = GeneratorKind::memorizer;
  EXPECT_THROW(generate(gen, empty, 5, 1), Error);
  gen.kind = GeneratorKind::parametric_fit;
  EXPECT_THROW(generate(gen, empty, 5, 1), Error);
}

}  // namespace
