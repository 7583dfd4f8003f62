#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rubricnet/synth.hpp"
#include "tau_check.hpp"

using namespace rubricnet;
using V = std::vector<double>;

TEST_CASE("tau-c basics") {
  CHECK(kendall_tau_c(V{1, 2, 3, 4}, V{1, 2, 3, 4}) == 1.0);
  CHECK(kendall_tau_c(V{4, 3, 2, 1}, V{1, 2, 3, 4}) == -1.0);
  const V x = {1, 1, 2, 3}, y = {1, 2, 2, 3};
  CHECK(kendall_tau_c(x, y) == doctest::Approx(oracle::tau_c(x, y)).epsilon(1e-15));
  // C = 4, D = 0, m = 3, n = 4: 2 * 3 * 4 / (16 * 2)
  CHECK(kendall_tau_c(x, y) == doctest::Approx(0.75));
  CHECK(kendall_tau_c(V{1, 1, 1}, V{1, 2, 3}) == 0.0);
  CHECK(kendall_tau_c(V{}, V{}) == 0.0);
  CHECK_THROWS_AS(kendall_tau_c(V{1, 2}, V{1}), Error);
}

TEST_CASE("tau-c agrees with the pair-count oracle on tied data") {
  CHECK(testing_support::max_tau_deviation(100, 77) <= 1e-12);
}

TEST_CASE("feature-difficulty table") {
  std::mt19937_64 rng(1);
  // balanced classes, so a feature equal to the label reaches exactly 1
  std::vector<FeatureArray> features(999);
  std::vector<int> labels(999);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 0; n < features.size(); ++n) {
    labels[n] = 1 + int(n % 9);
    for (auto& v : features[n]) v = u(rng);
    features[n][3] = labels[n];
  }
  const auto table = feature_difficulty_table(features, labels);
  REQUIRE(table.entries.size() == kNumFeatures);
  CHECK(table.entries[0].slot == 3);
  CHECK(table.entries[0].name == "PitchRange-L");
  CHECK(table.entries[0].tau == doctest::Approx(1.0));
  for (std::size_t i = 1; i < table.entries.size(); ++i) {
    CHECK(std::abs(table.entries[i].tau) < 0.1);
    CHECK(std::abs(table.entries[i].tau) <= std::abs(table.entries[i - 1].tau));
  }
  CHECK(correlation_table_csv(table).rfind("feature,tau_c\nPitchRange-L,", 0) == 0);
}

TEST_CASE("conditional correlation matrix") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = 600;
  Matrix cols(3, std::vector<double>(n));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = 1 + int(i % 3);
    cols[0][i] = normal(rng) + labels[i];
    cols[1][i] = cols[0][i];
    cols[2][i] = normal(rng);
  }
  const Matrix m = conditional_tau_matrix(cols, labels);
  CHECK(m[0][0] == 1.0);
  CHECK(m[0][1] == doctest::Approx(1.0));
  CHECK(std::abs(m[0][2]) < 0.1);
  CHECK(m[2][0] == m[0][2]);

  const std::vector<int> one_class(n, 4);
  const Matrix single = conditional_tau_matrix(cols, one_class);
  CHECK(single[0][2] == kendall_tau_c(cols[0], cols[2]));

  // a level with a single sample is skipped
  std::vector<int> sparse(n, 1);
  sparse[0] = 2;
  CHECK_NOTHROW(conditional_tau_matrix(cols, sparse));
  CHECK_THROWS_AS(conditional_tau_matrix(Matrix(3, std::vector<double>(2)), std::vector<int>{1, 2}), Error);
}

TEST_CASE("agglomerative clustering") {
  SUBCASE("perfectly correlated pair merges first at distance 0") {
    const Matrix corr = {{1, 1, 0.2}, {1, 1, 0.2}, {0.2, 0.2, 1}};
    const auto d = agglomerative_cluster(correlation_to_distance(corr));
    REQUIRE(d.merges.size() == 2);
    CHECK(d.merges[0].a == 0);
    CHECK(d.merges[0].b == 1);
    CHECK(d.merges[0].distance == 0.0);
    CHECK(d.merges[1].a == 2);
    CHECK(d.merges[1].b == 3);
    CHECK(d.merges[1].distance == doctest::Approx(0.8));
    CHECK(d.merges[1].size == 3);
  }
  SUBCASE("all-zero correlations merge at distance 1") {
    Matrix corr(4, std::vector<double>(4, 0.0));
    for (int i = 0; i < 4; ++i) corr[i][i] = 1.0;
    const auto d = agglomerative_cluster(correlation_to_distance(corr));
    for (const auto& m : d.merges) CHECK(m.distance == 1.0);
    CHECK(d.merges[0].a == 0);
    CHECK(d.merges[0].b == 1);
  }
  SUBCASE("merge order matches brute-force average linkage") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 3 + trial % 10;
      Matrix corr(n, std::vector<double>(n, 1.0));
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) corr[i][j] = corr[j][i] = u(rng);
      const Matrix dist = correlation_to_distance(corr);
      const auto fast = agglomerative_cluster(dist);
      const auto slow = oracle::average_linkage(dist);
      REQUIRE(fast.merges.size() == slow.size());
      for (std::size_t k = 0; k < slow.size(); ++k) {
        CHECK(fast.merges[k].a == slow[k].a);
        CHECK(fast.merges[k].b == slow[k].b);
        CHECK(fast.merges[k].distance == doctest::Approx(slow[k].distance).epsilon(1e-12));
      }
      CHECK(leaf_order(fast).size() == std::size_t(n));
    }
  }
  SUBCASE("asymmetric input is rejected") {
    CHECK_THROWS_AS(correlation_to_distance(Matrix{{1, 0.5}, {0.4, 1}}), Error);
  }
}

TEST_CASE("dendrogram json names the leaves") {
  const auto d = agglomerative_cluster(Matrix{{0, 0.3}, {0.3, 0}});
  const std::vector<std::string> names = {"a", "b"};
  const std::string json = dendrogram_json(d, names);
  CHECK(json.find("\"a\"") != std::string::npos);
  CHECK(json.find("\"distance\": 0.3") != std::string::npos);
}

namespace {

ModelParams identity_like(int k) {
  ModelParams p = ModelParams::zeros(k);
  p.w.fill(0.5);
  for (std::size_t i = 0; i < p.w_f.size(); ++i) {
    p.w_f[i] = 1.0;
    p.b_f[i] = -(-6.0 + 12.0 * double(i + 1) / double(k));
  }
  return p;
}

}  // namespace

TEST_CASE("grade contributions") {
  const ModelParams p = identity_like(3);
  SUBCASE("identical pieces in every grade") {
    Dataset data;
    for (int g = 1; g <= 3; ++g) {
      for (int i = 0; i < 4; ++i) {
        Sample s;
        s.level = g;
        s.x.fill(0.7);
        data.push_back(s);
      }
    }
    const auto profile = grade_contributions(p, data);
    for (const auto& row : profile.relative) {
      REQUIRE(row.has_value());
      for (double v : *row) CHECK(v == 0.0);
    }
  }
  SUBCASE("monotone synthetic corpus") {
    SynthSpec spec;
    spec.num_levels = 3;
    spec.mode = SynthMode::feature_level;
    spec.n_per_class = 20;
    const Dataset data = gen_feature_dataset(spec);
    ModelParams q = p;
    std::vector<FeatureArray> xs;
    for (const auto& s : data) xs.push_back(s.x);
    q.scaler = Scaler::fit(xs);
    const auto profile = grade_contributions(q, data);
    for (Descriptor d : {Descriptor::pitch_entropy, Descriptor::pitch_range, Descriptor::pitch_set_lz}) {
      for (Hand h : {Hand::right, Hand::left}) {
        const std::size_t j = feature_slot(d, h);
        CHECK((*profile.relative[0])[j] == 0.0);
        CHECK((*profile.relative[1])[j] <= (*profile.relative[2])[j]);
        CHECK((*profile.relative[1])[j] > 0.0);
      }
    }
    const std::vector<SplitData> splits = {{&q, &data}, {&q, &data}};
    const auto averaged = grade_contributions(splits);
    for (std::size_t g = 0; g < 3; ++g) {
      for (std::size_t j = 0; j < kNumFeatures; ++j) {
        CHECK((*averaged.relative[g])[j] == doctest::Approx((*profile.relative[g])[j]).epsilon(1e-15));
      }
    }
    CHECK(contribution_csv(profile).rfind("level,PitchEntropy-R", 0) == 0);
  }
  SUBCASE("grade 1 missing") {
    Dataset data(2);
    data[0].level = 2;
    data[1].level = 3;
    try {
      grade_contributions(p, data);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::contribution);
    }
  }
}

TEST_CASE("grade statistics and divergence") {
  const ModelParams p = identity_like(3);
  Dataset data;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int g = 1; g <= 3; ++g) {
    for (int i = 0; i < 5; ++i) {
      Sample s;
      s.level = g;
      for (auto& v : s.x) v = normal(rng) + g;
      data.push_back(s);
    }
  }
  const GradeStatistics stats = compute_grade_statistics(p, data);
  CHECK(stats.count == std::vector<long>{5, 5, 5});
  CHECK(parse_grade_statistics(grade_statistics_json(stats)) == stats);
  const GradeStatistics partial = compute_grade_statistics(p, Dataset(data.begin(), data.begin() + 10));
  CHECK_FALSE(partial.mean[2].has_value());
  CHECK(parse_grade_statistics(grade_statistics_json(partial)) == partial);

  // a piece whose tanh scores equal the grade-2 mean (w = 0.5, b = 0) diverges by 0
  FeatureArray x;
  for (std::size_t j = 0; j < kNumFeatures; ++j) x[j] = 2.0 * std::atanh(2.0 * (*stats.mean[1])[j] - 1.0);
  const auto d = grade_divergence(p, x, 2, stats);
  for (double v : d.values) CHECK(std::abs(v) < 1e-9);
  CHECK_FALSE(d.from_prediction);

  const auto from_pred = grade_divergence(p, data[0].x, std::nullopt, stats);
  CHECK(from_pred.from_prediction);
  CHECK(from_pred.reference_level == predict_level(p, forward(p, data[0].x)));
  CHECK_THROWS_AS(grade_divergence(p, x, 3, partial), Error);
}
