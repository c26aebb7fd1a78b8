#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reqsmell/corpus.hpp"
#include "reqsmell/error.hpp"
#include "reqsmell/lexic.hpp"

namespace reqsmell {

/// Lowercased word-1-grams of a text, punctuation excluded.
inline std::vector<std::string> terms_of(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text))
    if (!is_punct_token(t.surface)) out.push_back(std::move(t.lower));
  return out;
}

struct FeatureOptions {
  std::size_t min_df = 1;
  double max_df_ratio = 1.0;
  std::set<std::string> stop_words;
};

/// Frozen term -> column mapping. Columns follow lexicographic term order.
class Vocabulary {
public:
  Vocabulary() = default;

  std::size_t size() const { return terms_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::size_t>& doc_freq() const { return doc_freq_; }

  std::optional<std::size_t> index_of(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Smoothed inverse document frequency ln((1 + N) / (1 + df)) + 1.
  double idf(std::size_t col) const {
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(doc_freq_[col]))) + 1.0;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["n_docs"] = n_docs_;
    j["terms"] = terms_;
    j["doc_freq"] = doc_freq_;
    return j;
  }

  static Vocabulary from_json(const nlohmann::ordered_json& j) {
    Vocabulary v;
    v.n_docs_ = j.at("n_docs").get<std::size_t>();
    v.terms_ = j.at("terms").get<std::vector<std::string>>();
    v.doc_freq_ = j.at("doc_freq").get<std::vector<std::size_t>>();
    if (v.terms_.size() != v.doc_freq_.size()) throw Error("vocabulary: terms and doc_freq differ in length");
    for (std::size_t i = 0; i < v.terms_.size(); ++i) {
      if (i > 0 && !(v.terms_[i - 1] < v.terms_[i])) throw Error("vocabulary: terms not strictly sorted");
      v.index_[v.terms_[i]] = i;
    }
    return v;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.doc_freq_ == b.doc_freq_ && a.n_docs_ == b.n_docs_;
  }

private:
  friend Vocabulary build_vocabulary(const std::vector<std::string>&, const FeatureOptions&);

  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::map<std::string, std::size_t> index_;
  std::size_t n_docs_ = 0;
};

inline Vocabulary build_vocabulary(const std::vector<std::string>& docs, const FeatureOptions& opt = {}) {
  if (docs.empty()) throw Error("build_vocabulary: empty corpus");
  if (!(opt.max_df_ratio > 0.0 && opt.max_df_ratio <= 1.0))
    throw Error("build_vocabulary: max_df_ratio must lie in (0, 1]");
  std::map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    auto ts = terms_of(d);
    std::set<std::string> uniq(ts.begin(), ts.end());
    for (const auto& t : uniq)
      if (!opt.stop_words.count(t)) ++df[t];
  }
  Vocabulary v;
  v.n_docs_ = docs.size();
  const double max_df = opt.max_df_ratio * static_cast<double>(docs.size());
  for (const auto& [term, count] : df) {
    if (count < opt.min_df || static_cast<double>(count) > max_df) continue;
    v.index_[term] = v.terms_.size();
    v.terms_.push_back(term);
    v.doc_freq_.push_back(count);
  }
  if (v.terms_.empty())
    throw Error("build_vocabulary: no terms survive min_df=" + std::to_string(opt.min_df) +
                " / max_df_ratio=" + std::to_string(opt.max_df_ratio) + "; loosen the thresholds");
  return v;
}

inline Vocabulary build_vocabulary(const Corpus& corpus, const FeatureOptions& opt = {}) {
  return build_vocabulary(corpus.texts(), opt);
}

struct SparseEntry {
  std::uint32_t col = 0;
  double weight = 0.0;
  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

using SparseRow = std::vector<SparseEntry>; // sorted by col, weights non-zero

/// Row-sparse real matrix; row_ids tie rows back to corpus items.
struct FeatureMatrix {
  std::vector<SparseRow> rows;
  std::vector<std::string> row_ids;
  std::size_t n_cols = 0;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.size();
    return n;
  }
  std::vector<double> dense_row(std::size_t r) const {
    std::vector<double> out(n_cols, 0.0);
    for (const auto& e : rows[r]) out[e.col] = e.weight;
    return out;
  }
  FeatureMatrix select_rows(const std::vector<std::size_t>& idx) const {
    FeatureMatrix out;
    out.n_cols = n_cols;
    for (auto i : idx) {
      out.rows.push_back(rows.at(i));
      out.row_ids.push_back(row_ids.at(i));
    }
    return out;
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

inline SparseRow sparse_from_dense(const std::vector<double>& dense) {
  SparseRow out;
  for (std::size_t c = 0; c < dense.size(); ++c)
    if (dense[c] != 0.0) out.push_back(SparseEntry{static_cast<std::uint32_t>(c), dense[c]});
  return out;
}

/// TF-IDF rows: raw term count times smoothed idf, then L2-normalized.
/// Out-of-vocabulary terms are ignored; documents with no known term give
/// an empty row.
inline FeatureMatrix vectorize(const std::vector<std::string>& docs, const std::vector<std::string>& ids,
                               const Vocabulary& vocab) {
  if (ids.size() != docs.size()) throw Error("vectorize: ids and documents differ in length");
  FeatureMatrix m;
  m.n_cols = vocab.size();
  m.row_ids = ids;
  m.rows.reserve(docs.size());
  for (const auto& d : docs) {
    std::map<std::size_t, double> counts;
    for (const auto& t : terms_of(d))
      if (auto c = vocab.index_of(t)) counts[*c] += 1.0;
    SparseRow row;
    double sq = 0.0;
    for (const auto& [col, tf] : counts) {
      double w = tf * vocab.idf(col);
      row.push_back(SparseEntry{static_cast<std::uint32_t>(col), w});
      sq += w * w;
    }
    if (sq > 0.0) {
      double norm = std::sqrt(sq);
      for (auto& e : row) e.weight /= norm;
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

inline FeatureMatrix vectorize(const Corpus& corpus, const Vocabulary& vocab) {
  std::vector<std::string> ids;
  for (const auto& it : corpus.items()) ids.push_back(it.id());
  return vectorize(corpus.texts(), ids, vocab);
}

/// Sparse triplet text: "rows cols nnz" header, then "row col weight" lines
/// with 12 significant digits.
inline std::string format_triplets(const FeatureMatrix& m) {
  std::string out = std::to_string(m.n_rows()) + " " + std::to_string(m.n_cols) + " " + std::to_string(m.nnz()) + "\n";
  char buf[64];
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    for (const auto& e : m.rows[r]) {
      std::snprintf(buf, sizeof buf, "%zu %u %.12g\n", r, e.col, e.weight);
      out += buf;
    }
  }
  return out;
}

} // namespace reqsmell
