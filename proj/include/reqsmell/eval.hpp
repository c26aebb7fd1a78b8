#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reqsmell/balance.hpp"
#include "reqsmell/corpus.hpp"
#include "reqsmell/error.hpp"
#include "reqsmell/features.hpp"
#include "reqsmell/models.hpp"
#include "reqsmell/random.hpp"
#include "reqsmell/taxonomy.hpp"

namespace reqsmell {

// ---------------------------------------------------------------------------
// Metrics

struct LabelMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool zero_support = false;
};

struct EvalReport {
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double hamming_loss = 0.0;
  double example_based_f1 = 0.0;
  std::vector<LabelMetrics> per_label;

  nlohmann::ordered_json to_json(const std::vector<std::string>& label_names = {}) const {
    nlohmann::ordered_json j;
    j["micro"] = {{"precision", micro_precision}, {"recall", micro_recall}, {"f1", micro_f1}};
    j["macro"] = {{"precision", macro_precision}, {"recall", macro_recall}, {"f1", macro_f1}};
    j["hamming_loss"] = hamming_loss;
    j["example_based_f1"] = example_based_f1;
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t l = 0; l < per_label.size(); ++l) {
      const auto& m = per_label[l];
      nlohmann::ordered_json e;
      e["label"] = l < label_names.size() ? label_names[l] : std::to_string(l);
      e["precision"] = m.precision;
      e["recall"] = m.recall;
      e["f1"] = m.f1;
      e["support"] = m.support;
      if (m.zero_support) e["zero_support"] = true;
      arr.push_back(std::move(e));
    }
    j["per_label"] = arr;
    return j;
  }
};

namespace detail {
inline double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
inline double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }
} // namespace detail

/// Multi-label metrics over decision matrices. Micro pools TP/FP/FN over all
/// cells; macro averages per-label values with zero-support labels counted
/// as 0; any 0/0 precision or recall is 0. Example-based F1 scores a row
/// with empty truth and empty prediction as 1.
inline EvalReport evaluate(const LabelMatrix& truth, const LabelMatrix& pred) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols())
    throw Error("evaluate: shape mismatch (" + std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()) +
                " vs " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) + ")");
  EvalReport rep;
  const std::size_t n = truth.rows();
  const std::size_t L = truth.cols();
  double tp = 0, fp = 0, fn = 0, mismatched = 0;
  rep.per_label.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    double ltp = 0, lfp = 0, lfn = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const bool t = truth.at(r, l), p = pred.at(r, l);
      ltp += (t && p) ? 1 : 0;
      lfp += (!t && p) ? 1 : 0;
      lfn += (t && !p) ? 1 : 0;
    }
    auto& m = rep.per_label[l];
    m.support = static_cast<std::size_t>(ltp + lfn);
    m.zero_support = m.support == 0;
    if (!m.zero_support) {
      m.precision = detail::ratio(ltp, ltp + lfp);
      m.recall = detail::ratio(ltp, ltp + lfn);
      m.f1 = detail::f1_of(m.precision, m.recall);
    }
    tp += ltp;
    fp += lfp;
    fn += lfn;
    mismatched += lfp + lfn;
  }
  rep.micro_precision = detail::ratio(tp, tp + fp);
  rep.micro_recall = detail::ratio(tp, tp + fn);
  rep.micro_f1 = detail::f1_of(rep.micro_precision, rep.micro_recall);
  if (L > 0) {
    for (const auto& m : rep.per_label) {
      rep.macro_precision += m.precision;
      rep.macro_recall += m.recall;
      rep.macro_f1 += m.f1;
    }
    rep.macro_precision /= static_cast<double>(L);
    rep.macro_recall /= static_cast<double>(L);
    rep.macro_f1 /= static_cast<double>(L);
  }
  rep.hamming_loss = n * L == 0 ? 0.0 : mismatched / static_cast<double>(n * L);
  if (n > 0) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double inter = 0, t = 0, p = 0;
      for (std::size_t l = 0; l < L; ++l) {
        inter += (truth.at(r, l) && pred.at(r, l)) ? 1 : 0;
        t += truth.at(r, l) ? 1 : 0;
        p += pred.at(r, l) ? 1 : 0;
      }
      sum += t + p == 0.0 ? 1.0 : 2.0 * inter / (t + p);
    }
    rep.example_based_f1 = sum / static_cast<double>(n);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Training pipeline: vocabulary -> TF-IDF -> SMOTE -> model.

enum class ModelKind { mlp, svm, nb, ensemble };

inline constexpr std::string_view name(ModelKind k) {
  switch (k) {
  case ModelKind::mlp: return "mlp";
  case ModelKind::svm: return "svm";
  case ModelKind::nb: return "nb";
  case ModelKind::ensemble: return "ensemble";
  }
  return "?";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::mlp, ModelKind::svm, ModelKind::nb, ModelKind::ensemble})
    if (name(k) == s) return k;
  return std::nullopt;
}

enum class LabelChoice { auto_detect, core, all };

struct PipelineConfig {
  ModelKind model = ModelKind::mlp;
  LabelChoice labels = LabelChoice::auto_detect;
  FeatureOptions features;
  bool smote_enabled = true;
  std::size_t smote_k_neighbors = 5;
  double smote_target_ratio = 0.5;
  MlpHyper mlp;
  SvmHyper svm;
  double nb_smoothing = 1.0;
  EnsembleRule ensemble_rule = EnsembleRule::mean_score;
  double threshold = 0.5;
  FoldMode fold_mode = FoldMode::iterative_stratified;
};

inline LabelConfig resolve_labels(const Corpus& corpus, LabelChoice choice) {
  switch (choice) {
  case LabelChoice::core: return LabelConfig::core();
  case LabelChoice::all: return LabelConfig::all();
  case LabelChoice::auto_detect: break;
  }
  return infer_label_config(corpus);
}

struct TrainedPipeline {
  Vocabulary vocabulary;
  LabelConfig labels;
  AnyModel model;
  std::vector<nlohmann::ordered_json> notes; // SMOTE reports and training warnings

  PredictionMatrix predict(const Corpus& corpus, double threshold) const {
    return reqsmell::predict(model, vectorize(corpus, vocabulary), threshold);
  }
};

/// Fits vocabulary, resampling and model on `train` only.
inline TrainedPipeline fit_pipeline(const Corpus& train, const LabelConfig& labels, const PipelineConfig& cfg,
                                    std::uint64_t seed) {
  auto vocab = build_vocabulary(train, cfg.features);
  auto x = vectorize(train, vocab);
  auto y = label_matrix(train, labels);
  std::vector<nlohmann::ordered_json> notes;
  if (cfg.smote_enabled && x.n_rows() >= 2 && smote_applicable(y)) {
    SmoteConfig sc{cfg.smote_k_neighbors, cfg.smote_target_ratio, seed};
    auto res = smote(x, y, sc);
    notes.push_back({{"smote", res.report_json(labels.names())}});
    x = std::move(res.x);
    y = std::move(res.y);
  }
  auto train_mlp_member = [&] { return train_mlp(x, y, cfg.mlp, seed); };
  auto train_svm_member = [&] { return train_svm_ovr(x, y, cfg.svm, seed); };
  auto train_nb_member = [&] { return train_nb(x, y, cfg.nb_smoothing); };

  auto record_warnings = [&](const LinearOvrModel& m) {
    for (const auto& w : m.warnings) notes.push_back({{"warning", std::string(name(m.kind)) + ": " + w}});
  };

  AnyModel model = MlpModel{};
  switch (cfg.model) {
  case ModelKind::mlp: model = train_mlp_member(); break;
  case ModelKind::svm: {
    auto m = train_svm_member();
    record_warnings(m);
    model = std::move(m);
    break;
  }
  case ModelKind::nb: {
    auto m = train_nb_member();
    record_warnings(m);
    model = std::move(m);
    break;
  }
  case ModelKind::ensemble: {
    auto svm = train_svm_member();
    auto nb = train_nb_member();
    record_warnings(svm);
    record_warnings(nb);
    model = EnsembleModel({train_mlp_member(), std::move(svm), std::move(nb)}, cfg.ensemble_rule, cfg.threshold);
    break;
  }
  }
  return TrainedPipeline{std::move(vocab), labels, std::move(model), std::move(notes)};
}

// ---------------------------------------------------------------------------
// Cross-validation

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
};

struct CvReport {
  std::vector<EvalReport> folds;
  FoldPlan plan;
  std::vector<std::string> label_names;
  std::vector<std::size_t> vocabulary_sizes;

  /// Mean and sample standard deviation of one scalar metric across folds.
  MetricSummary summary(const std::function<double(const EvalReport&)>& metric) const {
    MetricSummary s;
    if (folds.empty()) return s;
    for (const auto& f : folds) s.mean += metric(f);
    s.mean /= static_cast<double>(folds.size());
    if (folds.size() > 1) {
      double ss = 0.0;
      for (const auto& f : folds) ss += (metric(f) - s.mean) * (metric(f) - s.mean);
      s.stddev = std::sqrt(ss / static_cast<double>(folds.size() - 1));
    }
    return s;
  }

  nlohmann::ordered_json to_json() const {
    using R = const EvalReport&;
    const std::vector<std::pair<std::string, std::function<double(R)>>> metrics = {
        {"micro_precision", [](R r) { return r.micro_precision; }},
        {"micro_recall", [](R r) { return r.micro_recall; }},
        {"micro_f1", [](R r) { return r.micro_f1; }},
        {"macro_precision", [](R r) { return r.macro_precision; }},
        {"macro_recall", [](R r) { return r.macro_recall; }},
        {"macro_f1", [](R r) { return r.macro_f1; }},
        {"hamming_loss", [](R r) { return r.hamming_loss; }},
        {"example_based_f1", [](R r) { return r.example_based_f1; }},
    };
    nlohmann::ordered_json j;
    j["k"] = plan.k;
    j["labels"] = label_names;
    nlohmann::ordered_json mean, sd;
    for (const auto& [key, fn] : metrics) {
      auto s = summary(fn);
      mean[key] = s.mean;
      sd[key] = s.stddev;
    }
    j["mean"] = mean;
    j["stddev"] = sd;
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < folds.size(); ++f) {
      auto fj = folds[f].to_json(label_names);
      nlohmann::ordered_json e;
      e["fold"] = f;
      e["test_size"] = plan.members(f).size();
      e["vocabulary_size"] = vocabulary_sizes[f];
      for (auto it = fj.begin(); it != fj.end(); ++it) e[it.key()] = it.value();
      arr.push_back(std::move(e));
    }
    j["folds"] = arr;
    j["fold_plan"] = plan.to_json();
    return j;
  }
};

/// Per-fold hook, called with the fold index, the fitted pipeline and the
/// held-out corpus.
using FoldObserver = std::function<void(std::size_t fold, const TrainedPipeline&, const Corpus& held_out)>;

/// k-fold cross-validation. Vocabulary, SMOTE and model are fitted on each
/// training portion only.
inline CvReport cross_validate(const Corpus& corpus, const PipelineConfig& cfg, std::size_t k, std::uint64_t seed,
                               const FoldObserver& observer = {}) {
  if (!corpus.all_labeled()) throw Error("cross_validate: corpus must be fully labeled");
  const auto labels = resolve_labels(corpus, cfg.labels);
  CvReport rep;
  rep.plan = split_folds(corpus, k, cfg.fold_mode, seed);
  rep.label_names = labels.names();
  for (std::size_t f = 0; f < k; ++f) {
    try {
      auto train = corpus.subset(rep.plan.complement(f));
      auto test = corpus.subset(rep.plan.members(f));
      auto fitted = fit_pipeline(train, labels, cfg, seed + 1000003ULL * (f + 1));
      auto pred = fitted.predict(test, cfg.threshold);
      rep.folds.push_back(evaluate(label_matrix(test, labels), pred.decision_matrix()));
      rep.vocabulary_sizes.push_back(fitted.vocabulary.size());
      if (observer) observer(f, fitted, test);
    } catch (const Error& e) {
      throw Error("fold " + std::to_string(f) + ": " + e.what());
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Learning curve

struct CurvePoint {
  double train_fraction = 0.0;
  std::size_t train_size = 0;
  double train_score = 0.0;
  double val_score = 0.0;
};

struct LearningCurve {
  std::vector<CurvePoint> points;
  double gap = 0.0;
  double gap_threshold = 0.1;
  bool overfit_flag = false;

  /// CSV with header train_fraction,train_score,val_score.
  std::string to_csv() const {
    std::string out = "train_fraction,train_score,val_score\n";
    char buf[128];
    for (const auto& p : points) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", p.train_fraction, p.train_score, p.val_score);
      out += buf;
    }
    return out;
  }

  nlohmann::ordered_json summary_json() const {
    nlohmann::ordered_json j;
    j["gap"] = gap;
    j["overfit_flag"] = overfit_flag;
    j["gap_threshold"] = gap_threshold;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : points)
      arr.push_back({{"train_fraction", p.train_fraction}, {"train_size", p.train_size},
                     {"train_score", p.train_score}, {"val_score", p.val_score}});
    j["points"] = arr;
    return j;
  }
};

inline std::vector<double> default_curve_fractions() {
  std::vector<double> f;
  for (int i = 1; i <= 10; ++i) f.push_back(i / 10.0);
  return f;
}

/// Train/validation micro-F1 as the training set grows. A fixed seeded
/// 80/20 split is made once; each point trains from scratch on a prefix of
/// the shuffled training part. gap is the mean train-minus-validation score
/// over the last three points.
inline LearningCurve learning_curve(const Corpus& corpus, const PipelineConfig& cfg,
                                    const std::vector<double>& fractions, double gap_threshold, std::uint64_t seed) {
  if (!corpus.all_labeled()) throw Error("learning_curve: corpus must be fully labeled");
  if (fractions.empty()) throw Error("learning_curve: no fractions");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] <= 1.0)) throw Error("learning_curve: fractions must lie in (0, 1]");
    if (i > 0 && !(fractions[i] > fractions[i - 1])) throw Error("learning_curve: fractions must increase");
  }
  const auto labels = resolve_labels(corpus, cfg.labels);
  const std::size_t n = corpus.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto eng = make_engine(seed, Stream::curve_split);
  shuffle(order, eng);
  const auto n_train = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(n) + 1e-9));
  if (n_train == 0 || n_train == n) throw Error("learning_curve: corpus too small for an 80/20 split");
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  const auto val = corpus.subset(val_idx);
  const auto val_truth = label_matrix(val, labels);

  LearningCurve curve;
  curve.gap_threshold = gap_threshold;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const auto m = static_cast<std::size_t>(std::floor(fractions[i] * static_cast<double>(n_train) + 1e-9));
    if (m < 2)
      throw Error("learning_curve: fraction " + std::to_string(fractions[i]) + " gives " + std::to_string(m) +
                  " training instance(s); need at least 2");
    std::vector<std::size_t> used(train_idx.begin(), train_idx.begin() + static_cast<std::ptrdiff_t>(m));
    const auto sub = corpus.subset(used);
    auto fitted = fit_pipeline(sub, labels, cfg, seed + 7919ULL * (i + 1));
    CurvePoint p;
    p.train_fraction = fractions[i];
    p.train_size = m;
    p.train_score = evaluate(label_matrix(sub, labels), fitted.predict(sub, cfg.threshold).decision_matrix()).micro_f1;
    p.val_score = evaluate(val_truth, fitted.predict(val, cfg.threshold).decision_matrix()).micro_f1;
    curve.points.push_back(p);
  }
  const std::size_t tail = std::min<std::size_t>(3, curve.points.size());
  double sum = 0.0;
  for (std::size_t i = curve.points.size() - tail; i < curve.points.size(); ++i)
    sum += curve.points[i].train_score - curve.points[i].val_score;
  curve.gap = sum / static_cast<double>(tail);
  curve.overfit_flag = curve.gap > gap_threshold;
  return curve;
}

} // namespace reqsmell
