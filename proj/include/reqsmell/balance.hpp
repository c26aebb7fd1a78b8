#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reqsmell/error.hpp"
#include "reqsmell/features.hpp"
#include "reqsmell/random.hpp"
#include "reqsmell/taxonomy.hpp"

namespace reqsmell {

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  double target_ratio = 0.5; // each label raised to >= ceil(target_ratio * max label count)
  std::uint64_t seed = 0;

  void validate() const {
    if (k_neighbors < 1) throw Error("smote: k_neighbors must be >= 1");
    if (!(target_ratio > 0.0 && target_ratio <= 1.0)) throw Error("smote: target_ratio must lie in (0, 1]");
  }
};

struct LabelAugmentation {
  std::size_t before = 0;
  std::size_t after = 0;
  std::size_t target = 0;
  std::size_t synthetic_added = 0;
  std::optional<std::string> skipped_reason;
};

/// Where one synthetic row came from: row = seed + u * (neighbor - seed).
struct SyntheticOrigin {
  std::size_t label = 0;
  std::size_t seed_row = 0;
  std::size_t neighbor_row = 0;
  double u = 0.0;
};

struct SmoteResult {
  FeatureMatrix x;
  LabelMatrix y;
  std::vector<LabelAugmentation> report; // one entry per label column
  std::vector<SyntheticOrigin> origins;  // one entry per appended row

  std::size_t synthetic_count() const { return origins.size(); }

  /// {label -> {before, after, synthetic_added, skipped_reason?}}
  nlohmann::ordered_json report_json(const std::vector<std::string>& label_names) const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t l = 0; l < report.size(); ++l) {
      const auto& r = report[l];
      nlohmann::ordered_json e;
      e["before"] = r.before;
      e["after"] = r.after;
      e["synthetic_added"] = r.synthetic_added;
      if (r.skipped_reason) e["skipped_reason"] = *r.skipped_reason;
      j[l < label_names.size() ? label_names[l] : std::to_string(l)] = e;
    }
    return j;
  }
};

/// Interpolated point seed + u * (neighbor - seed).
inline std::vector<double> interpolate(const std::vector<double>& seed, const std::vector<double>& neighbor,
                                       double u) {
  std::vector<double> out(seed.size());
  for (std::size_t c = 0; c < seed.size(); ++c) out[c] = seed[c] + u * (neighbor[c] - seed[c]);
  return out;
}

/// True when at least one label has two or more positive rows.
inline bool smote_applicable(const LabelMatrix& y) {
  for (std::size_t l = 0; l < y.cols(); ++l)
    if (y.column_count(l) >= 2) return true;
  return false;
}

namespace detail {

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

} // namespace detail

/// Multi-label SMOTE. Labels are processed in column order; for each label
/// below its target, synthetic rows are interpolated between a random
/// positive seed row and one of its k nearest positive rows (exact Euclidean,
/// ties to the lower row index). A synthetic row carries every label that is
/// positive in at least half of {seed} plus its neighborhood. Seeds and
/// neighbors are always original rows. `draw_u` supplies u in [0, 1)
/// and is exposed for tests; the default draws from a per-label stream.
inline SmoteResult smote(const FeatureMatrix& x, const LabelMatrix& y, const SmoteConfig& config,
                         const std::function<double(std::size_t label, Engine&)>& draw_u = {}) {
  config.validate();
  if (x.n_rows() < 2) throw Error("smote: need at least 2 rows");
  if (y.rows() != x.n_rows()) throw Error("smote: label matrix not aligned with feature matrix");
  if (!smote_applicable(y)) throw Error("smote: no label has 2 or more positive rows");

  const std::size_t n_orig = x.n_rows();
  const std::size_t n_labels = y.cols();
  SmoteResult res{x, y, std::vector<LabelAugmentation>(n_labels), {}};

  std::size_t max_count = 0;
  for (std::size_t l = 0; l < n_labels; ++l) max_count = std::max(max_count, y.column_count(l));
  const auto target =
      static_cast<std::size_t>(std::ceil(config.target_ratio * static_cast<double>(max_count) - 1e-12));

  for (std::size_t l = 0; l < n_labels; ++l) {
    auto& rep = res.report[l];
    rep.before = y.column_count(l);
    rep.target = target;
    std::size_t current = res.y.column_count(l);

    std::vector<std::size_t> pool;
    for (std::size_t r = 0; r < n_orig; ++r)
      if (y.at(r, l)) pool.push_back(r);

    if (current >= target) {
      rep.after = current;
      continue;
    }
    if (pool.size() < 2) {
      rep.skipped_reason = pool.empty() ? "no positive rows" : "single positive row; no neighbor exists";
      rep.after = current;
      continue;
    }

    std::vector<std::vector<double>> dense;
    dense.reserve(pool.size());
    for (auto r : pool) dense.push_back(x.dense_row(r));

    const std::size_t k = std::min(config.k_neighbors, pool.size() - 1);
    std::vector<std::vector<std::size_t>> neighborhoods(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      std::vector<std::pair<double, std::size_t>> dist;
      for (std::size_t j = 0; j < pool.size(); ++j)
        if (j != i) dist.emplace_back(detail::squared_distance(dense[i], dense[j]), j);
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end(),
                        [&](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first < b.first;
                          return pool[a.second] < pool[b.second];
                        });
      for (std::size_t t = 0; t < k; ++t) neighborhoods[i].push_back(dist[t].second);
    }

    auto eng = make_engine(config.seed, Stream::smote, {l});
    while (current < target) {
      const std::size_t si = uniform_index(eng, pool.size());
      const auto& hood = neighborhoods[si];
      const std::size_t ni = hood[uniform_index(eng, hood.size())];
      const double u = draw_u ? draw_u(l, eng) : uniform01(eng);

      std::vector<std::uint8_t> labels(n_labels, 0);
      for (std::size_t c = 0; c < n_labels; ++c) {
        std::size_t votes = y.at(pool[si], c) ? 1 : 0;
        for (auto j : hood) votes += y.at(pool[j], c) ? 1 : 0;
        labels[c] = 2 * votes >= hood.size() + 1 ? 1 : 0;
      }

      res.x.rows.push_back(sparse_from_dense(interpolate(dense[si], dense[ni], u)));
      res.x.row_ids.push_back("smote:" + std::to_string(l) + ":" + std::to_string(rep.synthetic_added));
      res.y.append_row(labels);
      res.origins.push_back(SyntheticOrigin{l, pool[si], pool[ni], u});
      ++rep.synthetic_added;
      current += labels[l];
    }
    rep.after = current;
  }
  // labels processed earlier may have gained rows from later labels
  for (std::size_t l = 0; l < n_labels; ++l) res.report[l].after = res.y.column_count(l);
  return res;
}

} // namespace reqsmell
