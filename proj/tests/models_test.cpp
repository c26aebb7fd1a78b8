#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "reqsmell/models.hpp"
#include "support.hpp"

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

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Two well-separated blobs in 4 dimensions; label 0 marks the first blob,
// label 1 marks rows with a positive third coordinate.
struct Toy {
  FeatureMatrix x;
  LabelMatrix y;
};

Toy separable(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> noise(0.0, 0.3);
  std::vector<std::vector<double>> rows;
  LabelMatrix y(0, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = i % 2 == 0;
    const bool b = (i / 2) % 2 == 0;
    rows.push_back({a ? 1.0 + noise(eng) : noise(eng), a ? noise(eng) : 1.0 + noise(eng), b ? 1.0 : 0.0,
                    noise(eng)});
    y.append_row({static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)});
  }
  return {dense_matrix(rows), y};
}

MlpModel zero_mlp(std::size_t in, std::size_t hidden, std::size_t out) {
  MlpHyper h;
  h.hidden = hidden;
  auto m = init_mlp(in, out, h, 1);
  std::fill(m.w1.data.begin(), m.w1.data.end(), 0.0);
  std::fill(m.w2.data.begin(), m.w2.data.end(), 0.0);
  return m;
}

} // namespace

TEST(Mlp, InitIsGlorotUniformWithZeroBiases) {
  MlpHyper h;
  h.hidden = 30;
  auto m = init_mlp(50, 3, h, 7);
  const double r1 = std::sqrt(6.0 / 80.0), r2 = std::sqrt(6.0 / 33.0);
  for (double v : m.w1.data) EXPECT_LE(std::abs(v), r1);
  for (double v : m.w2.data) EXPECT_LE(std::abs(v), r2);
  for (double v : m.b1) EXPECT_EQ(v, 0.0);
  for (double v : m.b2) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(m, init_mlp(50, 3, h, 7));
  EXPECT_NE(m.w1, init_mlp(50, 3, h, 8).w1);
}

TEST(Mlp, ZeroEpochsReturnsInitialization) {
  auto t = separable(10, 1);
  MlpHyper h;
  h.hidden = 6;
  h.epochs = 0;
  EXPECT_EQ(train_mlp(t.x, t.y, h, 5), init_mlp(4, 2, h, 5));
}

TEST(Mlp, SingleInstanceConverges) {
  auto x = dense_matrix({{0.6, 0.8}});
  LabelMatrix y{{1}};
  MlpHyper h;
  h.hidden = 8;
  h.learning_rate = 0.5;
  h.epochs = 500;
  h.batch_size = 1;
  h.l2 = 0.0;
  auto m = train_mlp(x, y, h, 3);
  EXPECT_LT(mlp_bce(m, x, y, {0}), 0.01);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> val(-1.0, 1.0), u(0.0, 1.0);
  double worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    std::vector<std::vector<double>> dense(6, std::vector<double>(5, 0.0));
    std::vector<std::vector<int>> ylist(6, std::vector<int>(2, 0));
    LabelMatrix y(6, 2);
    for (std::size_t r = 0; r < 6; ++r) {
      for (auto& v : dense[r]) v = u(eng) < 0.3 ? 0.0 : val(eng);
      for (std::size_t l = 0; l < 2; ++l) {
        ylist[r][l] = u(eng) < 0.5;
        y.set(r, l, ylist[r][l] != 0);
      }
    }
    auto x = dense_matrix(dense);
    MlpHyper h;
    h.hidden = 4;
    h.l2 = 0.01;
    auto m = init_mlp(5, 2, h, static_cast<std::uint64_t>(point));
    for (auto& b : m.b1) b = 0.2 * val(eng);
    for (auto& b : m.b2) b = 0.2 * val(eng);

    const auto rows = all_rows(6);
    EXPECT_NEAR(mlp_loss(m, x, y, rows), testsupport::mlp_objective(m, dense, ylist, h.l2), 1e-12);
    auto g = mlp_gradient(m, x, y, rows);

    auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        const double step = 1e-5;
        params[i] = saved + step;
        const double up = testsupport::mlp_objective(m, dense, ylist, h.l2);
        params[i] = saved - step;
        const double down = testsupport::mlp_objective(m, dense, ylist, h.l2);
        params[i] = saved;
        const double numeric = (up - down) / (2 * step);
        const double rel = std::abs(numeric - analytic[i]) / std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
        worst = std::max(worst, rel);
      }
    };
    check(m.w1.data, g.w1.data);
    check(m.b1, g.b1);
    check(m.w2.data, g.w2.data);
    check(m.b2, g.b2);
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Mlp, FullBatchLossNeverIncreases) {
  auto t = separable(20, 4);
  MlpHyper h;
  h.hidden = 16;
  h.learning_rate = 0.01;
  h.epochs = 10;
  h.batch_size = 20;
  h.l2 = 0.0;
  std::vector<double> losses{mlp_bce(init_mlp(4, 2, h, 9), t.x, t.y, all_rows(20))};
  train_mlp(t.x, t.y, h, 9, [&](std::size_t, double loss) { losses.push_back(loss); });
  ASSERT_EQ(losses.size(), 11u);
  for (std::size_t i = 1; i < losses.size(); ++i) EXPECT_LE(losses[i], losses[i - 1]) << "epoch " << i;
  EXPECT_LT(losses.back(), losses.front());
}

TEST(Mlp, LearnsSeparableToy) {
  auto t = separable(40, 2);
  MlpHyper h;
  h.hidden = 16;
  h.learning_rate = 0.5;
  h.epochs = 200;
  h.batch_size = 8;
  auto m = train_mlp(t.x, t.y, h, 1);
  EXPECT_EQ(predict(m, t.x).decision_matrix(), t.y);
}

TEST(Mlp, DeterministicForFixedSeed) {
  auto t = separable(30, 3);
  MlpHyper h;
  h.hidden = 8;
  h.epochs = 5;
  h.batch_size = 7;
  EXPECT_EQ(train_mlp(t.x, t.y, h, 12), train_mlp(t.x, t.y, h, 12));
  EXPECT_NE(train_mlp(t.x, t.y, h, 12), train_mlp(t.x, t.y, h, 13));
}

TEST(Mlp, NonFiniteLossReportsEpochAndBatch) {
  auto t = separable(8, 1);
  MlpHyper h;
  h.hidden = 4;
  h.learning_rate = 1e300;
  h.epochs = 5;
  h.batch_size = 4;
  try {
    train_mlp(t.x, t.y, h, 1);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("epoch"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch"), std::string::npos) << msg;
  }
}

TEST(Mlp, RejectsEmptyFeatures) {
  FeatureMatrix x;
  x.n_cols = 3;
  x.rows = {{}, {}};
  x.row_ids = {"a", "b"};
  EXPECT_THROW(train_mlp(x, LabelMatrix{{1}, {0}}, MlpHyper{}, 1), Error);
}

TEST(Predict, ZeroWeightsScoreOneHalf) {
  auto m = zero_mlp(3, 4, 2);
  auto x = dense_matrix({{1, 2, 3}, {0, 0, 0}, {-1, 5, 0}});
  auto p = predict(m, x);
  for (double s : p.scores) EXPECT_EQ(s, 0.5);
  for (auto d : p.decisions) EXPECT_EQ(d, 1);
  auto hi = predict(m, x, 1.1);
  for (auto d : hi.decisions) EXPECT_EQ(d, 0);
  auto lo = predict(m, x, 0.0);
  for (auto d : lo.decisions) EXPECT_EQ(d, 1);
}

TEST(Predict, ThresholdsAndBoundsOnTrainedModels) {
  auto t = separable(30, 5);
  MlpHyper h;
  h.hidden = 8;
  h.epochs = 20;
  auto mlp = train_mlp(t.x, t.y, h, 2);
  auto svm = train_svm_ovr(t.x, t.y, SvmHyper{}, 2);
  auto nb = train_nb(t.x, t.y);
  for (double thr : {0.0, 0.3, 0.5, 0.9, 1.1}) {
    for (const auto& p : {predict(mlp, t.x, thr), predict(svm, t.x, thr), predict(nb, t.x, thr)}) {
      for (std::size_t i = 0; i < p.scores.size(); ++i) {
        EXPECT_GE(p.scores[i], 0.0);
        EXPECT_LE(p.scores[i], 1.0);
        EXPECT_EQ(p.decisions[i] != 0, p.scores[i] >= thr);
      }
    }
  }
  auto narrow = dense_matrix({{1, 2, 3}});
  EXPECT_THROW(predict(mlp, narrow), Error);
  EXPECT_THROW(predict(svm, narrow), Error);
}

TEST(Svm, SeparableOneFeatureGetsPositiveWeight) {
  std::vector<std::vector<double>> rows;
  LabelMatrix y(0, 1);
  for (int i = 0; i < 10; ++i) {
    rows.push_back({i % 2 ? 1.0 : -1.0});
    y.append_row({static_cast<std::uint8_t>(i % 2)});
  }
  auto x = dense_matrix(rows);
  auto m = train_svm_ovr(x, y, SvmHyper{0.01, 50}, 1);
  EXPECT_GT(m.labels[0].w[0], 0.0);
  EXPECT_EQ(predict(m, x).decision_matrix(), y);
}

TEST(Svm, DegenerateLabelIsConstant) {
  auto x = dense_matrix({{1, 0}, {0, 1}, {1, 1}});
  LabelMatrix y{{1, 0}, {1, 1}, {1, 0}};
  auto m = train_svm_ovr(x, y, SvmHyper{}, 1);
  ASSERT_TRUE(m.labels[0].constant.has_value());
  EXPECT_TRUE(*m.labels[0].constant);
  EXPECT_FALSE(m.labels[1].constant.has_value());
  EXPECT_EQ(m.warnings.size(), 1u);
  auto p = predict(m, dense_matrix({{5, 5}, {0, 0}, {-3, 2}}));
  for (std::size_t r = 0; r < 3; ++r) EXPECT_TRUE(p.decision(r, 0));
  auto q = predict(m, x, 0.99);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_TRUE(q.decision(r, 0));
}

TEST(Svm, HeavyRegularizationShrinksWeights) {
  auto t = separable(20, 8);
  auto m = train_svm_ovr(t.x, t.y, SvmHyper{1e6, 20}, 3);
  for (const auto& lab : m.labels) {
    double sq = lab.b * lab.b;
    for (double w : lab.w) sq += w * w;
    EXPECT_LT(std::sqrt(sq), 1e-2);
  }
}

TEST(Svm, DeterministicAndSeedSensitive) {
  auto t = separable(25, 6);
  EXPECT_EQ(train_svm_ovr(t.x, t.y, SvmHyper{}, 4), train_svm_ovr(t.x, t.y, SvmHyper{}, 4));
  EXPECT_FALSE(train_svm_ovr(t.x, t.y, SvmHyper{}, 4) == train_svm_ovr(t.x, t.y, SvmHyper{}, 5));
}

TEST(NaiveBayes, DisjointTermsClassifyToOwnLabel) {
  auto x = dense_matrix({{1, 0}, {0, 1}});
  LabelMatrix y{{1, 0}, {0, 1}};
  auto p = predict(train_nb(x, y), x);
  EXPECT_EQ(p.decision_matrix(), y);
}

TEST(NaiveBayes, UniformRowsScoreThePrior) {
  // Every row spreads its weight evenly over all terms, so each class's
  // smoothed term distribution is uniform and the term log-ratios vanish.
  auto x = dense_matrix({{0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}});
  LabelMatrix y{{1, 1}, {0, 1}, {0, 1}, {0, 0}};
  auto p = predict(train_nb(x, y), x);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_NEAR(p.score(r, 0), 0.25, 1e-12);
    EXPECT_NEAR(p.score(r, 1), 0.75, 1e-12);
  }
}

TEST(NaiveBayes, HugeSmoothingGivesThePrior) {
  auto t = separable(20, 7);
  auto m = train_nb(t.x, t.y, 1e6);
  auto p = predict(m, t.x);
  for (std::size_t l = 0; l < 2; ++l) {
    const double prior = static_cast<double>(t.y.column_count(l)) / 20.0;
    for (double w : m.labels[l].w) EXPECT_NEAR(w, 0.0, 1e-3);
    for (std::size_t r = 0; r < 20; ++r) EXPECT_NEAR(p.score(r, l), prior, 1e-3);
  }
}

TEST(Ensemble, MeanScoreArithmetic) {
  auto x = dense_matrix({{1.0}});
  auto member = [&](double score) {
    LinearOvrModel m;
    m.kind = LinearKind::naive_bayes;
    m.input_dim = 1;
    m.labels.push_back(LinearLabel{{0.0}, std::log(score / (1 - score)), std::nullopt});
    return m;
  };
  EnsembleModel e({member(0.9), member(0.4), member(0.8)}, EnsembleRule::mean_score, 0.5);
  auto p = ensemble_predict(e, x);
  EXPECT_NEAR(p.score(0, 0), 0.7, 1e-12);
  EXPECT_TRUE(p.decision(0, 0));

  auto constant = [&](bool v) {
    auto m = member(0.5);
    m.labels[0].constant = v;
    return m;
  };
  EnsembleModel tie({constant(true), constant(false)}, EnsembleRule::majority_vote, 0.5);
  auto q = ensemble_predict(tie, x);
  EXPECT_EQ(q.score(0, 0), 0.5);
  EXPECT_TRUE(q.decision(0, 0));

  EnsembleModel tie_low({member(0.6), member(0.2)}, EnsembleRule::majority_vote, 0.5);
  EXPECT_FALSE(ensemble_predict(tie_low, x).decision(0, 0));

  // Two of three vote positive although the mean is below threshold.
  EnsembleModel votes({member(0.55), member(0.55), member(0.01)}, EnsembleRule::majority_vote, 0.5);
  auto v = ensemble_predict(votes, x);
  EXPECT_LT(v.score(0, 0), 0.5);
  EXPECT_TRUE(v.decision(0, 0));
  EnsembleModel means({member(0.55), member(0.55), member(0.01)}, EnsembleRule::mean_score, 0.5);
  EXPECT_FALSE(ensemble_predict(means, x).decision(0, 0));
}

TEST(Ensemble, SingleAndRepeatedMembersMatchTheMember) {
  auto t = separable(24, 9);
  MlpHyper h;
  h.hidden = 8;
  h.epochs = 30;
  auto mlp = train_mlp(t.x, t.y, h, 3);
  auto svm = train_svm_ovr(t.x, t.y, SvmHyper{}, 3);
  for (auto rule : {EnsembleRule::mean_score, EnsembleRule::majority_vote}) {
    EXPECT_EQ(ensemble_predict(EnsembleModel({mlp}, rule), t.x), predict(mlp, t.x));
    EXPECT_EQ(ensemble_predict(EnsembleModel({svm}, rule), t.x), predict(svm, t.x));
    auto three = ensemble_predict(EnsembleModel({svm, svm, svm}, rule), t.x);
    auto one = predict(svm, t.x);
    EXPECT_EQ(three.decisions, one.decisions);
    for (std::size_t i = 0; i < one.scores.size(); ++i) EXPECT_NEAR(three.scores[i], one.scores[i], 1e-15);
  }
}

TEST(Ensemble, IncompatibleMembersRejected) {
  MlpHyper h;
  h.hidden = 2;
  EXPECT_THROW(EnsembleModel({init_mlp(3, 2, h, 1), init_mlp(4, 2, h, 1)}, EnsembleRule::mean_score), Error);
  EXPECT_THROW(EnsembleModel({init_mlp(3, 2, h, 1), init_mlp(3, 1, h, 1)}, EnsembleRule::mean_score), Error);
  EXPECT_THROW(EnsembleModel({}, EnsembleRule::mean_score), Error);
}

TEST(Serialization, RoundTripIsBitExact) {
  auto t = separable(24, 10);
  MlpHyper h;
  h.hidden = 8;
  h.epochs = 10;
  auto mlp = train_mlp(t.x, t.y, h, 5);
  auto svm = train_svm_ovr(t.x, t.y, SvmHyper{}, 5);
  auto nb = train_nb(t.x, t.y, 0.5);
  const std::vector<std::string> names = {"A", "B"};
  for (const AnyModel& model :
       {AnyModel(mlp), AnyModel(svm), AnyModel(nb),
        AnyModel(EnsembleModel({mlp, svm, nb}, EnsembleRule::majority_vote, 0.4))}) {
    auto text = model_to_json(model, names).dump();
    auto loaded = model_from_json(nlohmann::ordered_json::parse(text));
    EXPECT_EQ(loaded.label_names, names);
    EXPECT_TRUE(loaded.model == model);
    EXPECT_EQ(predict(loaded.model, t.x), predict(model, t.x));
    EXPECT_EQ(model_to_json(loaded.model, names).dump(), text);
  }
}
