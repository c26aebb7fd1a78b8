#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "reqsmell/error.hpp"
#include "reqsmell/features.hpp"
#include "reqsmell/random.hpp"
#include "reqsmell/taxonomy.hpp"

namespace reqsmell {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

/// Binary cross-entropy of sigmoid(z) against y, computed from the logit.
inline double bce_from_logit(double z, bool y) {
  return std::max(z, 0.0) - (y ? z : 0.0) + std::log1p(std::exp(-std::abs(z)));
}

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Per-row label scores in [0, 1] and thresholded decisions.
struct PredictionMatrix {
  std::size_t n_rows = 0;
  std::size_t n_labels = 0;
  std::vector<double> scores;
  std::vector<std::uint8_t> decisions;

  PredictionMatrix() = default;
  PredictionMatrix(std::size_t r, std::size_t l) : n_rows(r), n_labels(l), scores(r * l, 0.0), decisions(r * l, 0) {}

  double score(std::size_t r, std::size_t l) const { return scores[r * n_labels + l]; }
  bool decision(std::size_t r, std::size_t l) const { return decisions[r * n_labels + l] != 0; }

  LabelMatrix decision_matrix() const {
    LabelMatrix m(n_rows, n_labels);
    for (std::size_t r = 0; r < n_rows; ++r)
      for (std::size_t l = 0; l < n_labels; ++l) m.set(r, l, decision(r, l));
    return m;
  }

  friend bool operator==(const PredictionMatrix&, const PredictionMatrix&) = default;
};

namespace detail {

inline void check_training_input(const FeatureMatrix& x, const LabelMatrix& y, const char* who) {
  if (y.rows() != x.n_rows())
    throw Error(std::string(who) + ": label matrix has " + std::to_string(y.rows()) + " rows, features have " +
                std::to_string(x.n_rows()));
  if (y.cols() == 0) throw Error(std::string(who) + ": no label columns");
}

inline void check_dims(std::size_t model_dim, const FeatureMatrix& x) {
  if (model_dim != x.n_cols)
    throw Error("predict: model expects " + std::to_string(model_dim) + " input columns, got " +
                std::to_string(x.n_cols));
}

inline void threshold_all(PredictionMatrix& p, double threshold) {
  for (std::size_t i = 0; i < p.scores.size(); ++i) p.decisions[i] = p.scores[i] >= threshold ? 1 : 0;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Multilayer perceptron: input -> ReLU hidden layer -> per-label sigmoid.

struct MlpHyper {
  std::size_t hidden = 128;
  double learning_rate = 0.01;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double l2 = 1e-4;

  friend bool operator==(const MlpHyper&, const MlpHyper&) = default;
};

struct MlpModel {
  Matrix w1; // hidden x input
  std::vector<double> b1;
  Matrix w2; // labels x hidden
  std::vector<double> b2;
  MlpHyper hyper;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return w1.cols; }
  std::size_t hidden() const { return w1.rows; }
  std::size_t n_labels() const { return w2.rows; }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Glorot-uniform weights in [-r, r], r = sqrt(6 / (fan_in + fan_out));
/// zero biases.
inline MlpModel init_mlp(std::size_t input_dim, std::size_t n_labels, const MlpHyper& hyper, std::uint64_t seed) {
  if (input_dim == 0 || n_labels == 0 || hyper.hidden == 0) throw Error("init_mlp: zero-sized layer");
  MlpModel m;
  m.hyper = hyper;
  m.seed = seed;
  m.w1 = Matrix(hyper.hidden, input_dim);
  m.b1.assign(hyper.hidden, 0.0);
  m.w2 = Matrix(n_labels, hyper.hidden);
  m.b2.assign(n_labels, 0.0);
  auto eng = make_engine(seed, Stream::mlp);
  auto fill = [&](Matrix& w, std::size_t fan_in, std::size_t fan_out) {
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : w.data) v = (2.0 * uniform01(eng) - 1.0) * r;
  };
  fill(m.w1, input_dim, hyper.hidden);
  fill(m.w2, hyper.hidden, n_labels);
  return m;
}

struct MlpGradient {
  Matrix w1;
  std::vector<double> b1;
  Matrix w2;
  std::vector<double> b2;
};

namespace detail {

struct MlpActivations {
  std::vector<double> pre;    // hidden pre-activations
  std::vector<double> hidden; // ReLU outputs
  std::vector<double> logits;
};

inline MlpActivations mlp_forward(const MlpModel& m, const SparseRow& x) {
  MlpActivations a;
  const std::size_t H = m.hidden();
  const std::size_t L = m.n_labels();
  a.pre = m.b1;
  for (std::size_t h = 0; h < H; ++h) {
    const double* row = &m.w1.data[h * m.w1.cols];
    double s = 0.0;
    for (const auto& e : x) s += row[e.col] * e.weight;
    a.pre[h] += s;
  }
  a.hidden.resize(H);
  for (std::size_t h = 0; h < H; ++h) a.hidden[h] = a.pre[h] > 0.0 ? a.pre[h] : 0.0;
  a.logits = m.b2;
  for (std::size_t l = 0; l < L; ++l) {
    const double* row = &m.w2.data[l * H];
    double s = 0.0;
    for (std::size_t h = 0; h < H; ++h) s += row[h] * a.hidden[h];
    a.logits[l] += s;
  }
  return a;
}

inline double l2_penalty(const MlpModel& m) {
  double s = 0.0;
  for (double v : m.w1.data) s += v * v;
  for (double v : m.w2.data) s += v * v;
  return 0.5 * m.hyper.l2 * s;
}

// Per-sample backward pass. Produces d(loss)/d(logits) and d(loss)/d(pre)
// for one sample, unscaled by batch size.
inline void mlp_backward(const MlpModel& m, const MlpActivations& a, const LabelMatrix& y, std::size_t row,
                         std::vector<double>& dlogit, std::vector<double>& dpre) {
  const std::size_t H = m.hidden();
  const std::size_t L = m.n_labels();
  dlogit.resize(L);
  for (std::size_t l = 0; l < L; ++l) dlogit[l] = sigmoid(a.logits[l]) - (y.at(row, l) ? 1.0 : 0.0);
  dpre.assign(H, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    const double* w = &m.w2.data[l * H];
    for (std::size_t h = 0; h < H; ++h) dpre[h] += w[h] * dlogit[l];
  }
  for (std::size_t h = 0; h < H; ++h)
    if (a.pre[h] <= 0.0) dpre[h] = 0.0;
}

} // namespace detail

/// Mean over `rows` of the per-sample BCE summed over labels, without the
/// L2 term.
inline double mlp_bce(const MlpModel& m, const FeatureMatrix& x, const LabelMatrix& y,
                      const std::vector<std::size_t>& rows) {
  if (rows.empty()) return 0.0;
  double total = 0.0;
  for (auto r : rows) {
    auto a = detail::mlp_forward(m, x.rows[r]);
    for (std::size_t l = 0; l < m.n_labels(); ++l) total += bce_from_logit(a.logits[l], y.at(r, l));
  }
  return total / static_cast<double>(rows.size());
}

/// Training objective: mlp_bce plus (l2 / 2) * squared weight norm (biases
/// are not penalized).
inline double mlp_loss(const MlpModel& m, const FeatureMatrix& x, const LabelMatrix& y,
                       const std::vector<std::size_t>& rows) {
  return mlp_bce(m, x, y, rows) + detail::l2_penalty(m);
}

/// Analytic gradient of mlp_loss over `rows`.
inline MlpGradient mlp_gradient(const MlpModel& m, const FeatureMatrix& x, const LabelMatrix& y,
                                const std::vector<std::size_t>& rows) {
  const std::size_t H = m.hidden();
  const std::size_t L = m.n_labels();
  MlpGradient g{Matrix(H, m.input_dim()), std::vector<double>(H, 0.0), Matrix(L, H), std::vector<double>(L, 0.0)};
  const double scale = rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size());
  std::vector<double> dlogit, dpre;
  for (auto r : rows) {
    auto a = detail::mlp_forward(m, x.rows[r]);
    detail::mlp_backward(m, a, y, r, dlogit, dpre);
    for (std::size_t l = 0; l < L; ++l) {
      g.b2[l] += scale * dlogit[l];
      for (std::size_t h = 0; h < H; ++h) g.w2(l, h) += scale * dlogit[l] * a.hidden[h];
    }
    for (std::size_t h = 0; h < H; ++h) {
      g.b1[h] += scale * dpre[h];
      for (const auto& e : x.rows[r]) g.w1(h, e.col) += scale * dpre[h] * e.weight;
    }
  }
  for (std::size_t i = 0; i < g.w1.data.size(); ++i) g.w1.data[i] += m.hyper.l2 * m.w1.data[i];
  for (std::size_t i = 0; i < g.w2.data.size(); ++i) g.w2.data[i] += m.hyper.l2 * m.w2.data[i];
  return g;
}

/// Called after each epoch with the epoch index (1-based) and the training
/// objective over all rows.
using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Mini-batch gradient descent on mlp_loss. Batch order is reshuffled every
/// epoch from the seeded stream; the final-epoch model is returned.
inline MlpModel train_mlp(const FeatureMatrix& x, const LabelMatrix& y, const MlpHyper& hyper, std::uint64_t seed,
                          const EpochCallback& on_epoch = {}) {
  detail::check_training_input(x, y, "train_mlp");
  std::size_t nonzero_rows = 0;
  for (const auto& r : x.rows) nonzero_rows += r.empty() ? 0 : 1;
  if (nonzero_rows < 1) throw Error("train_mlp: all feature rows are empty");
  if (hyper.batch_size == 0) throw Error("train_mlp: batch_size must be >= 1");

  MlpModel m = init_mlp(x.n_cols, y.cols(), hyper, seed);
  const std::size_t n = x.n_rows();
  const std::size_t H = m.hidden();
  const std::size_t L = m.n_labels();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<std::size_t> all = order;
  auto eng = make_engine(seed, Stream::mlp_shuffle);

  std::vector<detail::MlpActivations> acts;
  std::vector<std::vector<double>> dlogits, dpres;
  Matrix gw2(L, H);
  std::vector<double> gb1(H), gb2(L);

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    shuffle(order, eng);
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < n; start += hyper.batch_size, ++batch_no) {
      const std::size_t end = std::min(n, start + hyper.batch_size);
      const std::size_t bsz = end - start;
      const double scale = 1.0 / static_cast<double>(bsz);
      acts.resize(bsz);
      dlogits.resize(bsz);
      dpres.resize(bsz);
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < bsz; ++b) {
        const std::size_t r = order[start + b];
        acts[b] = detail::mlp_forward(m, x.rows[r]);
        for (std::size_t l = 0; l < L; ++l) batch_loss += bce_from_logit(acts[b].logits[l], y.at(r, l));
        detail::mlp_backward(m, acts[b], y, r, dlogits[b], dpres[b]);
      }
      if (!std::isfinite(batch_loss))
        throw Error("train_mlp: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(batch_no));

      std::fill(gw2.data.begin(), gw2.data.end(), 0.0);
      std::fill(gb1.begin(), gb1.end(), 0.0);
      std::fill(gb2.begin(), gb2.end(), 0.0);
      for (std::size_t b = 0; b < bsz; ++b) {
        for (std::size_t l = 0; l < L; ++l) {
          gb2[l] += scale * dlogits[b][l];
          double* g = &gw2.data[l * H];
          for (std::size_t h = 0; h < H; ++h) g[h] += scale * dlogits[b][l] * acts[b].hidden[h];
        }
        for (std::size_t h = 0; h < H; ++h) gb1[h] += scale * dpres[b][h];
      }

      const double lr = hyper.learning_rate;
      const double decay = 1.0 - lr * hyper.l2;
      for (std::size_t i = 0; i < m.w2.data.size(); ++i) m.w2.data[i] = m.w2.data[i] * decay - lr * gw2.data[i];
      for (std::size_t l = 0; l < L; ++l) m.b2[l] -= lr * gb2[l];
      if (decay != 1.0)
        for (auto& v : m.w1.data) v *= decay;
      // The first-layer gradient is sparse in the input columns.
      for (std::size_t b = 0; b < bsz; ++b) {
        const auto& xr = x.rows[order[start + b]];
        for (std::size_t h = 0; h < H; ++h) {
          const double d = lr * scale * dpres[b][h];
          if (d == 0.0) continue;
          double* row = &m.w1.data[h * m.w1.cols];
          for (const auto& e : xr) row[e.col] -= d * e.weight;
        }
      }
      for (std::size_t h = 0; h < H; ++h) m.b1[h] -= lr * gb1[h];
    }
    if (on_epoch) on_epoch(epoch, mlp_loss(m, x, y, all));
  }
  return m;
}

inline PredictionMatrix predict(const MlpModel& m, const FeatureMatrix& x, double threshold = 0.5) {
  detail::check_dims(m.input_dim(), x);
  PredictionMatrix p(x.n_rows(), m.n_labels());
  for (std::size_t r = 0; r < x.n_rows(); ++r) {
    auto a = detail::mlp_forward(m, x.rows[r]);
    for (std::size_t l = 0; l < m.n_labels(); ++l) p.scores[r * p.n_labels + l] = sigmoid(a.logits[l]);
  }
  detail::threshold_all(p, threshold);
  return p;
}

// ---------------------------------------------------------------------------
// One-vs-rest linear models: hinge-loss SVM and multinomial Naive Bayes, both
// scored as sigmoid(w.x + b).

enum class LinearKind { svm_hinge, naive_bayes };

inline constexpr std::string_view name(LinearKind k) { return k == LinearKind::svm_hinge ? "svm" : "nb"; }

struct SvmHyper {
  double lambda = 1e-4;
  std::size_t epochs = 20;

  friend bool operator==(const SvmHyper&, const SvmHyper&) = default;
};

/// One label's linear scorer. A label seen with only one class during
/// training is constant: it always predicts that class.
struct LinearLabel {
  std::vector<double> w;
  double b = 0.0;
  std::optional<bool> constant;

  friend bool operator==(const LinearLabel&, const LinearLabel&) = default;
};

struct LinearOvrModel {
  LinearKind kind = LinearKind::svm_hinge;
  std::size_t input_dim = 0;
  std::vector<LinearLabel> labels;
  SvmHyper svm;          // svm_hinge only
  double smoothing = 1.0; // naive_bayes only
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::size_t n_labels() const { return labels.size(); }

  double margin(std::size_t l, const SparseRow& x) const {
    const auto& lab = labels[l];
    double s = lab.b;
    for (const auto& e : x) s += lab.w[e.col] * e.weight;
    return s;
  }
  double score(std::size_t l, const SparseRow& x) const {
    const auto& lab = labels[l];
    if (lab.constant) return *lab.constant ? 1.0 : 0.0;
    return sigmoid(margin(l, x));
  }

  friend bool operator==(const LinearOvrModel& a, const LinearOvrModel& b) {
    return a.kind == b.kind && a.input_dim == b.input_dim && a.labels == b.labels && a.svm == b.svm &&
           a.smoothing == b.smoothing && a.seed == b.seed;
  }
};

namespace detail {

inline std::optional<bool> degenerate_label(const LabelMatrix& y, std::size_t l) {
  const std::size_t pos = y.column_count(l);
  if (pos == 0) return false;
  if (pos == y.rows()) return true;
  return std::nullopt;
}

} // namespace detail

/// Pegasos stochastic subgradient descent per label on the L2-regularized
/// hinge loss, with step 1/(lambda t). The bias is an extra constant input
/// feature and is regularized with the weights.
inline LinearOvrModel train_svm_ovr(const FeatureMatrix& x, const LabelMatrix& y, const SvmHyper& hyper,
                                    std::uint64_t seed) {
  detail::check_training_input(x, y, "train_svm_ovr");
  if (!(hyper.lambda > 0.0)) throw Error("train_svm_ovr: lambda must be > 0");
  LinearOvrModel m;
  m.kind = LinearKind::svm_hinge;
  m.input_dim = x.n_cols;
  m.svm = hyper;
  m.seed = seed;
  const std::size_t n = x.n_rows();

  for (std::size_t l = 0; l < y.cols(); ++l) {
    LinearLabel lab;
    lab.w.assign(x.n_cols, 0.0);
    if (auto c = detail::degenerate_label(y, l)) {
      lab.constant = *c;
      m.warnings.push_back("label " + std::to_string(l) + ": only " + (*c ? "positive" : "negative") +
                           " examples; predicting that class always");
      m.labels.push_back(std::move(lab));
      continue;
    }
    // w = scale * v keeps the shrink step O(1); only touched coordinates of
    // v change per update.
    std::vector<double> v(x.n_cols, 0.0);
    double vb = 0.0;
    double scale = 1.0;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto eng = make_engine(seed, Stream::svm, {l});
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
      shuffle(order, eng);
      for (auto i : order) {
        ++t;
        const double eta = 1.0 / (hyper.lambda * static_cast<double>(t));
        const double yi = y.at(i, l) ? 1.0 : -1.0;
        double dot = vb;
        for (const auto& e : x.rows[i]) dot += v[e.col] * e.weight;
        const double margin = yi * scale * dot;
        const double shrink = 1.0 - eta * hyper.lambda;
        if (shrink <= 0.0) {
          std::fill(v.begin(), v.end(), 0.0);
          vb = 0.0;
          scale = 1.0;
        } else {
          scale *= shrink;
        }
        if (margin < 1.0) {
          const double step = eta * yi / scale;
          for (const auto& e : x.rows[i]) v[e.col] += step * e.weight;
          vb += step;
        }
        if (scale < 1e-9) {
          for (auto& vv : v) vv *= scale;
          vb *= scale;
          scale = 1.0;
        }
      }
    }
    for (std::size_t c = 0; c < x.n_cols; ++c) lab.w[c] = scale * v[c];
    lab.b = scale * vb;
    for (double w : lab.w)
      if (!std::isfinite(w)) throw Error("train_svm_ovr: non-finite weight for label " + std::to_string(l));
    m.labels.push_back(std::move(lab));
  }
  return m;
}

/// Multinomial Naive Bayes per label, feature weights read as fractional
/// counts, additive smoothing. Folded into log-odds form:
/// b = log P(+)/P(-), w_t = log theta(t|+) - log theta(t|-).
inline LinearOvrModel train_nb(const FeatureMatrix& x, const LabelMatrix& y, double smoothing = 1.0) {
  detail::check_training_input(x, y, "train_nb");
  if (!(smoothing > 0.0)) throw Error("train_nb: smoothing must be > 0");
  LinearOvrModel m;
  m.kind = LinearKind::naive_bayes;
  m.input_dim = x.n_cols;
  m.smoothing = smoothing;
  const std::size_t V = x.n_cols;
  for (std::size_t l = 0; l < y.cols(); ++l) {
    LinearLabel lab;
    lab.w.assign(V, 0.0);
    if (auto c = detail::degenerate_label(y, l)) {
      lab.constant = *c;
      m.warnings.push_back("label " + std::to_string(l) + ": only " + (*c ? "positive" : "negative") +
                           " examples; predicting that class always");
      m.labels.push_back(std::move(lab));
      continue;
    }
    std::vector<double> cnt_pos(V, 0.0), cnt_neg(V, 0.0);
    double n_pos = 0.0, n_neg = 0.0;
    for (std::size_t r = 0; r < x.n_rows(); ++r) {
      const bool pos = y.at(r, l);
      (pos ? n_pos : n_neg) += 1.0;
      auto& cnt = pos ? cnt_pos : cnt_neg;
      for (const auto& e : x.rows[r]) cnt[e.col] += e.weight;
    }
    double tot_pos = 0.0, tot_neg = 0.0;
    for (std::size_t c = 0; c < V; ++c) {
      tot_pos += cnt_pos[c];
      tot_neg += cnt_neg[c];
    }
    const double den_pos = std::log(tot_pos + smoothing * static_cast<double>(V));
    const double den_neg = std::log(tot_neg + smoothing * static_cast<double>(V));
    for (std::size_t c = 0; c < V; ++c)
      lab.w[c] = (std::log(cnt_pos[c] + smoothing) - den_pos) - (std::log(cnt_neg[c] + smoothing) - den_neg);
    lab.b = std::log(n_pos) - std::log(n_neg);
    m.labels.push_back(std::move(lab));
  }
  return m;
}

inline PredictionMatrix predict(const LinearOvrModel& m, const FeatureMatrix& x, double threshold = 0.5) {
  detail::check_dims(m.input_dim, x);
  PredictionMatrix p(x.n_rows(), m.n_labels());
  for (std::size_t r = 0; r < x.n_rows(); ++r)
    for (std::size_t l = 0; l < m.n_labels(); ++l) p.scores[r * p.n_labels + l] = m.score(l, x.rows[r]);
  detail::threshold_all(p, threshold);
  return p;
}

// ---------------------------------------------------------------------------
// Ensemble

enum class EnsembleRule { mean_score, majority_vote };

inline constexpr std::string_view name(EnsembleRule r) {
  return r == EnsembleRule::mean_score ? "mean_score" : "majority_vote";
}

inline std::optional<EnsembleRule> parse_ensemble_rule(std::string_view s) {
  if (s == "mean_score") return EnsembleRule::mean_score;
  if (s == "majority_vote") return EnsembleRule::majority_vote;
  return std::nullopt;
}

using MemberModel = std::variant<MlpModel, LinearOvrModel>;

inline std::size_t input_dim(const MemberModel& m) {
  return std::visit([](const auto& v) -> std::size_t {
    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, MlpModel>) return v.input_dim();
    else return v.input_dim;
  }, m);
}
inline std::size_t n_labels(const MemberModel& m) {
  return std::visit([](const auto& v) { return v.n_labels(); }, m);
}
inline PredictionMatrix predict(const MemberModel& m, const FeatureMatrix& x, double threshold = 0.5) {
  return std::visit([&](const auto& v) { return predict(v, x, threshold); }, m);
}

class EnsembleModel {
public:
  EnsembleModel(std::vector<MemberModel> members, EnsembleRule rule, double threshold = 0.5)
      : members_(std::move(members)), rule_(rule), threshold_(threshold) {
    if (members_.empty()) throw Error("ensemble: no members");
    for (const auto& m : members_) {
      if (reqsmell::input_dim(m) != reqsmell::input_dim(members_.front()) ||
          reqsmell::n_labels(m) != reqsmell::n_labels(members_.front()))
        throw Error("ensemble: members disagree on input dimension or label count");
    }
  }

  const std::vector<MemberModel>& members() const { return members_; }
  EnsembleRule rule() const { return rule_; }
  double threshold() const { return threshold_; }
  std::size_t input_dim() const { return reqsmell::input_dim(members_.front()); }
  std::size_t n_labels() const { return reqsmell::n_labels(members_.front()); }

  friend bool operator==(const EnsembleModel&, const EnsembleModel&) = default;

private:
  std::vector<MemberModel> members_;
  EnsembleRule rule_;
  double threshold_;
};

/// mean_score: mean member score, thresholded. majority_vote: positive when
/// more than half the members vote positive; an exact split falls back to
/// the mean score against the threshold. Scores are the member mean in both
/// cases.
inline PredictionMatrix ensemble_predict(const EnsembleModel& e, const FeatureMatrix& x) {
  detail::check_dims(e.input_dim(), x);
  std::vector<PredictionMatrix> preds;
  for (const auto& m : e.members()) preds.push_back(predict(m, x, e.threshold()));
  const double k = static_cast<double>(preds.size());
  PredictionMatrix p(x.n_rows(), e.n_labels());
  for (std::size_t i = 0; i < p.scores.size(); ++i) {
    double sum = 0.0;
    std::size_t votes = 0;
    for (const auto& q : preds) {
      sum += q.scores[i];
      votes += q.decisions[i];
    }
    p.scores[i] = sum / k;
    const bool by_mean = p.scores[i] >= e.threshold();
    if (e.rule() == EnsembleRule::mean_score) {
      p.decisions[i] = by_mean;
    } else {
      const std::size_t twice = 2 * votes;
      p.decisions[i] = twice > preds.size() ? 1 : (twice == preds.size() ? by_mean : 0);
    }
  }
  return p;
}

inline PredictionMatrix predict(const EnsembleModel& e, const FeatureMatrix& x) { return ensemble_predict(e, x); }

using AnyModel = std::variant<MlpModel, LinearOvrModel, EnsembleModel>;

inline PredictionMatrix predict(const AnyModel& m, const FeatureMatrix& x, double threshold = 0.5) {
  return std::visit(
      [&](const auto& v) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, EnsembleModel>) return ensemble_predict(v, x);
        else return predict(v, x, threshold);
      },
      m);
}

// ---------------------------------------------------------------------------
// Serialization. Doubles are written in shortest round-trip form, so a
// save/load cycle reproduces every weight bit-for-bit.

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson member_json(const MlpModel& m) {
  ojson j;
  j["kind"] = "mlp";
  j["dims"] = {{"input", m.input_dim()}, {"hidden", m.hidden()}, {"labels", m.n_labels()}};
  j["hyperparameters"] = {{"hidden", m.hyper.hidden},
                          {"learning_rate", m.hyper.learning_rate},
                          {"epochs", m.hyper.epochs},
                          {"batch_size", m.hyper.batch_size},
                          {"l2", m.hyper.l2}};
  j["seed"] = m.seed;
  j["weights"] = {{"w1", m.w1.data}, {"b1", m.b1}, {"w2", m.w2.data}, {"b2", m.b2}};
  return j;
}

inline ojson member_json(const LinearOvrModel& m) {
  ojson j;
  j["kind"] = std::string(name(m.kind));
  j["dims"] = {{"input", m.input_dim}, {"labels", m.n_labels()}};
  if (m.kind == LinearKind::svm_hinge)
    j["hyperparameters"] = {{"lambda", m.svm.lambda}, {"epochs", m.svm.epochs}};
  else
    j["hyperparameters"] = {{"smoothing", m.smoothing}};
  j["seed"] = m.seed;
  ojson w = ojson::array(), b = ojson::array(), constant = ojson::array();
  for (const auto& lab : m.labels) {
    w.push_back(lab.w);
    b.push_back(lab.b);
    constant.push_back(lab.constant ? ojson(*lab.constant) : ojson(nullptr));
  }
  j["weights"] = {{"w", w}, {"b", b}, {"constant", constant}};
  return j;
}

inline MlpModel mlp_from_json(const ojson& j) {
  MlpModel m;
  const auto& d = j.at("dims");
  const auto& h = j.at("hyperparameters");
  m.hyper.hidden = h.at("hidden").get<std::size_t>();
  m.hyper.learning_rate = h.at("learning_rate").get<double>();
  m.hyper.epochs = h.at("epochs").get<std::size_t>();
  m.hyper.batch_size = h.at("batch_size").get<std::size_t>();
  m.hyper.l2 = h.at("l2").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto V = d.at("input").get<std::size_t>();
  const auto H = d.at("hidden").get<std::size_t>();
  const auto L = d.at("labels").get<std::size_t>();
  const auto& w = j.at("weights");
  m.w1 = Matrix(H, V);
  m.w1.data = w.at("w1").get<std::vector<double>>();
  m.b1 = w.at("b1").get<std::vector<double>>();
  m.w2 = Matrix(L, H);
  m.w2.data = w.at("w2").get<std::vector<double>>();
  m.b2 = w.at("b2").get<std::vector<double>>();
  if (m.w1.data.size() != H * V || m.b1.size() != H || m.w2.data.size() != L * H || m.b2.size() != L)
    throw Error("model json: mlp weight arrays do not match dims");
  return m;
}

inline LinearOvrModel linear_from_json(const ojson& j, LinearKind kind) {
  LinearOvrModel m;
  m.kind = kind;
  m.input_dim = j.at("dims").at("input").get<std::size_t>();
  const auto L = j.at("dims").at("labels").get<std::size_t>();
  const auto& h = j.at("hyperparameters");
  if (kind == LinearKind::svm_hinge) {
    m.svm.lambda = h.at("lambda").get<double>();
    m.svm.epochs = h.at("epochs").get<std::size_t>();
  } else {
    m.smoothing = h.at("smoothing").get<double>();
  }
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto& w = j.at("weights");
  if (w.at("w").size() != L || w.at("b").size() != L || w.at("constant").size() != L)
    throw Error("model json: linear weight arrays do not match dims");
  for (std::size_t l = 0; l < L; ++l) {
    LinearLabel lab;
    lab.w = w.at("w")[l].get<std::vector<double>>();
    if (lab.w.size() != m.input_dim) throw Error("model json: weight vector length mismatch");
    lab.b = w.at("b")[l].get<double>();
    if (!w.at("constant")[l].is_null()) lab.constant = w.at("constant")[l].get<bool>();
    m.labels.push_back(std::move(lab));
  }
  return m;
}

inline MemberModel member_from_json(const ojson& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "mlp") return mlp_from_json(j);
  if (kind == "svm") return linear_from_json(j, LinearKind::svm_hinge);
  if (kind == "nb") return linear_from_json(j, LinearKind::naive_bayes);
  throw Error("model json: unknown member kind '" + kind + "'");
}

} // namespace detail

/// JSON envelope {kind, label_names, dims, hyperparameters, seed, weights};
/// ensembles nest their members.
inline nlohmann::ordered_json model_to_json(const AnyModel& model, const std::vector<std::string>& label_names) {
  nlohmann::ordered_json j;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EnsembleModel>) {
          j["kind"] = "ensemble";
          j["dims"] = {{"input", m.input_dim()}, {"labels", m.n_labels()}};
          j["rule"] = std::string(name(m.rule()));
          j["threshold"] = m.threshold();
          auto arr = nlohmann::ordered_json::array();
          for (const auto& mem : m.members())
            arr.push_back(std::visit([](const auto& v) { return detail::member_json(v); }, mem));
          j["members"] = arr;
        } else {
          j = detail::member_json(m);
        }
      },
      model);
  nlohmann::ordered_json out;
  out["kind"] = j["kind"];
  out["label_names"] = label_names;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "kind") out[it.key()] = it.value();
  return out;
}

struct LoadedModel {
  AnyModel model;
  std::vector<std::string> label_names;
};

inline LoadedModel model_from_json(const nlohmann::ordered_json& j) {
  try {
    auto names = j.at("label_names").get<std::vector<std::string>>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "ensemble") {
      std::vector<MemberModel> members;
      for (const auto& mj : j.at("members")) members.push_back(detail::member_from_json(mj));
      auto rule = parse_ensemble_rule(j.at("rule").get<std::string>());
      if (!rule) throw Error("model json: unknown ensemble rule");
      return {EnsembleModel(std::move(members), *rule, j.at("threshold").get<double>()), std::move(names)};
    }
    auto mem = detail::member_from_json(j);
    AnyModel any = std::visit([](auto&& v) -> AnyModel { return std::move(v); }, std::move(mem));
    return {std::move(any), std::move(names)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model json: ") + e.what());
  }
}

} // namespace reqsmell
