#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "reqsmell/balance.hpp"

using namespace reqsmell;

namespace {

FeatureMatrix dense_matrix(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix m;
  m.n_cols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    m.rows.push_back(sparse_from_dense(rows[r]));
    m.row_ids.push_back("r" + std::to_string(r));
  }
  return m;
}

struct Dataset {
  FeatureMatrix x;
  LabelMatrix y;
};

Dataset random_dataset(std::mt19937_64& eng) {
  std::uniform_int_distribution<int> nrows(3, 25), ncols(1, 8), nlabels(1, 4);
  std::uniform_real_distribution<double> val(-2.0, 2.0), u(0.0, 1.0);
  for (;;) {
    const int n = nrows(eng), c = ncols(eng), l = nlabels(eng);
    std::vector<std::vector<double>> rows(n, std::vector<double>(c, 0.0));
    for (auto& r : rows)
      for (auto& v : r) v = u(eng) < 0.4 ? 0.0 : val(eng);
    LabelMatrix y(n, l);
    for (int j = 0; j < l; ++j) {
      const double p = u(eng) * 0.8;
      for (int i = 0; i < n; ++i) y.set(i, j, u(eng) < p);
    }
    if (smote_applicable(y)) return {dense_matrix(rows), y};
  }
}

} // namespace

TEST(Smote, MidpointWithForcedDraw) {
  // Label 1 has the two rows (1,0) and (3,0); label 0 has six rows, so the
  // target for label 1 is three and one synthetic row is needed.
  auto x = dense_matrix({{1, 0}, {3, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}});
  LabelMatrix y{{0, 1}, {0, 1}, {1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}};
  auto res = smote(x, y, SmoteConfig{5, 0.5, 42}, [](std::size_t, Engine&) { return 0.5; });
  ASSERT_EQ(res.synthetic_count(), 1u);
  EXPECT_EQ(res.x.dense_row(8), (std::vector<double>{2.0, 0.0}));
  EXPECT_EQ(res.y.row(8), (std::vector<std::uint8_t>{0, 1}));
  EXPECT_EQ(res.report[1].before, 2u);
  EXPECT_EQ(res.report[1].after, 3u);
  EXPECT_EQ(res.report[1].synthetic_added, 1u);
  EXPECT_EQ(res.report[0].synthetic_added, 0u);
}

TEST(Smote, BalancedInputIsUnchanged) {
  auto x = dense_matrix({{1, 0}, {0, 1}, {1, 1}, {2, 2}});
  LabelMatrix y{{1, 0}, {0, 1}, {1, 1}, {0, 0}};
  auto res = smote(x, y, SmoteConfig{});
  EXPECT_EQ(res.x, x);
  EXPECT_EQ(res.y, y);
  EXPECT_EQ(res.synthetic_count(), 0u);
}

TEST(Smote, MinorityRaisedMajorityUntouched) {
  std::vector<std::vector<double>> rows;
  LabelMatrix y(0, 2);
  for (int i = 0; i < 8; ++i) {
    rows.push_back({1.0 + i, 0.5 * i});
    y.append_row({1, 0});
  }
  rows.push_back({-1.0, 2.0});
  y.append_row({0, 1});
  rows.push_back({-2.0, 3.0});
  y.append_row({0, 1});
  auto res = smote(dense_matrix(rows), y, SmoteConfig{5, 0.5, 3});
  EXPECT_GE(res.y.column_count(1), 4u);
  EXPECT_EQ(res.y.column_count(0), 8u);
  EXPECT_EQ(res.report[1].target, 4u);
}

TEST(Smote, SinglePositiveLabelIsSkippedWithReason) {
  auto x = dense_matrix({{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 5}});
  LabelMatrix y{{1, 0}, {1, 0}, {1, 0}, {1, 0}, {0, 1}};
  auto res = smote(x, y, SmoteConfig{});
  ASSERT_TRUE(res.report[1].skipped_reason.has_value());
  EXPECT_EQ(res.synthetic_count(), 0u);
  auto j = res.report_json({"A", "B"});
  EXPECT_TRUE(j["B"].contains("skipped_reason"));
  EXPECT_FALSE(j["A"].contains("skipped_reason"));
}

TEST(Smote, Preconditions) {
  auto x = dense_matrix({{1, 0}});
  EXPECT_THROW(smote(x, LabelMatrix{{1}}, SmoteConfig{}), Error);
  auto x2 = dense_matrix({{1, 0}, {0, 1}});
  EXPECT_THROW(smote(x2, LabelMatrix{{1}, {0}}, SmoteConfig{}), Error);
  EXPECT_THROW(smote(x2, LabelMatrix{{1}}, SmoteConfig{}), Error);
  EXPECT_THROW(smote(x2, LabelMatrix{{1}, {1}}, SmoteConfig{0, 0.5, 0}), Error);
  EXPECT_THROW(smote(x2, LabelMatrix{{1}, {1}}, SmoteConfig{5, 1.5, 0}), Error);
}

TEST(Smote, RandomDatasetProperties) {
  std::mt19937_64 eng(99);
  for (int trial = 0; trial < 200; ++trial) {
    auto d = random_dataset(eng);
    SmoteConfig cfg{1 + trial % 5, 0.3 + 0.7 * (trial % 8) / 7.0, static_cast<std::uint64_t>(trial)};
    auto res = smote(d.x, d.y, cfg);
    const std::size_t n = d.x.n_rows();

    for (std::size_t r = 0; r < n; ++r) {
      ASSERT_EQ(res.x.rows[r], d.x.rows[r]);
      ASSERT_EQ(res.y.row(r), d.y.row(r));
    }
    ASSERT_EQ(res.x.n_rows(), n + res.synthetic_count());
    ASSERT_EQ(res.y.rows(), res.x.n_rows());

    for (std::size_t s = 0; s < res.synthetic_count(); ++s) {
      const auto& o = res.origins[s];
      ASSERT_LT(o.seed_row, n);
      ASSERT_LT(o.neighbor_row, n);
      ASSERT_NE(o.seed_row, o.neighbor_row);
      ASSERT_TRUE(d.y.at(o.seed_row, o.label));
      ASSERT_TRUE(d.y.at(o.neighbor_row, o.label));
      ASSERT_TRUE(o.u >= 0.0 && o.u < 1.0);
      auto a = d.x.dense_row(o.seed_row), b = d.x.dense_row(o.neighbor_row), v = res.x.dense_row(n + s);
      for (std::size_t c = 0; c < v.size(); ++c) {
        ASSERT_GE(v[c], std::min(a[c], b[c]) - 1e-9);
        ASSERT_LE(v[c], std::max(a[c], b[c]) + 1e-9);
      }
      ASSERT_TRUE(res.y.at(n + s, o.label));
    }

    std::size_t max_count = 0;
    for (std::size_t l = 0; l < d.y.cols(); ++l) max_count = std::max(max_count, d.y.column_count(l));
    const auto target = static_cast<std::size_t>(std::ceil(cfg.target_ratio * static_cast<double>(max_count) - 1e-12));
    for (std::size_t l = 0; l < d.y.cols(); ++l) {
      if (d.y.column_count(l) >= 2) ASSERT_GE(res.y.column_count(l), target) << "trial " << trial;
      ASSERT_EQ(res.report[l].after, res.y.column_count(l));
    }

    auto again = smote(d.x, d.y, cfg);
    ASSERT_EQ(again.x, res.x);
    ASSERT_EQ(again.y, res.y);
  }
}

TEST(Smote, NeighborsAreNearest) {
  // With k = 1 every synthetic row must interpolate towards the closest
  // positive row of its seed.
  auto x = dense_matrix({{0, 0}, {1, 0}, {10, 0}, {11, 0}, {50, 50}, {50, 51}, {50, 52}, {50, 53}, {50, 54},
                         {50, 55}, {50, 56}, {50, 57}});
  LabelMatrix y(12, 2);
  for (int r = 0; r < 4; ++r) y.set(r, 0, true);
  for (int r = 4; r < 12; ++r) y.set(r, 1, true);
  auto res = smote(x, y, SmoteConfig{1, 1.0, 8});
  ASSERT_EQ(res.synthetic_count(), 4u);
  for (const auto& o : res.origins) {
    const std::size_t expect = o.seed_row ^ 1u;
    EXPECT_EQ(o.neighbor_row, expect);
  }
}
