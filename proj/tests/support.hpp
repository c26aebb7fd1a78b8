#pragma once

// Synthetic corpora and reference implementations shared by the unit tests
// and the acceptance runner. Nothing here calls into the code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "reqsmell/reqsmell.hpp"

namespace testsupport {

using reqsmell::Corpus;
using reqsmell::CorpusItem;
using reqsmell::LabelSet;
using reqsmell::Provenance;
using reqsmell::SmellClass;

inline CorpusItem item(std::string id, std::string text, std::optional<LabelSet> labels = std::nullopt) {
  CorpusItem it;
  it.requirement = {std::move(id), "test", std::move(text), Provenance::synthetic};
  it.labels = labels;
  return it;
}

inline LabelSet labels(std::initializer_list<SmellClass> cs) {
  LabelSet s;
  for (auto c : cs) s.insert(c);
  return s;
}

inline std::string id_of(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "R%04zu", i);
  return buf;
}

// Items whose labels are fixed by marker tokens: a label is present exactly
// when its marker appears. Label frequencies are deliberately skewed.
inline Corpus marker_corpus(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> filler = {
      "module",  "record",  "sensor",   "archive", "invoice", "account", "message", "channel", "report",
      "session", "payload", "terminal", "ledger",  "export",  "import",  "upload",  "backup",  "schedule",
      "window",  "button",  "network",  "device",  "storage", "journal", "profile", "catalog", "review",
      "ticket",  "field",   "table",    "index",   "column",  "metric",  "alarm",   "badge",   "route"};
  static const std::vector<std::pair<SmellClass, std::string>> markers = {
      {SmellClass::SUBJECTIVE_LANGUAGE, "intuitive"}, {SmellClass::AMBIGUOUS_ADV_ADJ, "approximately"},
      {SmellClass::SUPERLATIVES, "optimal"},          {SmellClass::COMPARATIVES, "faster"},
      {SmellClass::VAGUE_PRONOUNS, "whichever"}};
  static const double rate[] = {0.45, 0.35, 0.2, 0.15, 0.1};
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, filler.size() - 1), len(5, 9);
  std::vector<CorpusItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> words;
    const std::size_t m = len(eng);
    for (std::size_t j = 0; j < m; ++j) words.push_back(filler[pick(eng)]);
    LabelSet ls;
    for (std::size_t l = 0; l < markers.size(); ++l) {
      if (u(eng) < rate[l]) {
        ls.insert(markers[l].first);
        words.push_back(markers[l].second);
      }
    }
    std::shuffle(words.begin(), words.end(), eng);
    std::string text = "The system shall";
    for (const auto& w : words) text += " " + w;
    text += ".";
    items.push_back(item(id_of(i), text, ls));
  }
  return Corpus(std::move(items));
}

// Random pseudo-word text with labels drawn independently of the text.
inline Corpus random_corpus(std::size_t n, std::uint64_t seed, std::size_t pool = 3000) {
  std::mt19937_64 eng(seed);
  std::uniform_int_distribution<std::size_t> word(0, pool - 1), len(8, 14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<CorpusItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    const std::size_t m = len(eng);
    for (std::size_t j = 0; j < m; ++j) text += (j ? " w" : "w") + std::to_string(word(eng));
    LabelSet ls;
    for (std::size_t l = 0; l < reqsmell::kCoreClassCount; ++l)
      if (u(eng) < 0.3) ls.insert(reqsmell::kAllSmellClasses[l]);
    items.push_back(item(id_of(i), text, ls));
  }
  return Corpus(std::move(items));
}

// ---------------------------------------------------------------------------
// TF-IDF reference: idf = ln((1 + N) / (1 + df)) + 1, raw counts, L2 rows,
// computed in 50-digit binary floating point over pre-split documents.

using big = boost::multiprecision::cpp_bin_float_50;

struct TfidfOracle {
  std::vector<std::string> terms; // lexicographic
  std::vector<std::vector<double>> rows;
};

inline TfidfOracle tfidf_oracle(const std::vector<std::vector<std::string>>& docs) {
  std::map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    std::set<std::string> uniq(d.begin(), d.end());
    for (const auto& t : uniq) ++df[t];
  }
  TfidfOracle o;
  std::map<std::string, std::size_t> col;
  for (const auto& [t, n] : df) {
    col[t] = o.terms.size();
    o.terms.push_back(t);
  }
  const big N = static_cast<unsigned>(docs.size());
  for (const auto& d : docs) {
    std::vector<big> w(o.terms.size(), big(0));
    for (const auto& t : d) w[col[t]] += 1;
    big sq = 0;
    for (std::size_t c = 0; c < w.size(); ++c) {
      if (w[c] == 0) continue;
      big idf = boost::multiprecision::log((1 + N) / (1 + big(static_cast<unsigned>(df[o.terms[c]])))) + 1;
      w[c] *= idf;
      sq += w[c] * w[c];
    }
    std::vector<double> row(w.size(), 0.0);
    if (sq > 0) {
      big norm = boost::multiprecision::sqrt(sq);
      for (std::size_t c = 0; c < w.size(); ++c) row[c] = static_cast<double>(w[c] / norm);
    }
    o.rows.push_back(std::move(row));
  }
  return o;
}

// ---------------------------------------------------------------------------
// MLP reference objective, written densely from the definition:
// mean over rows of sum_l BCE(sigmoid(W2 relu(W1 x + b1) + b2), y)
// + (l2 / 2) * (|W1|^2 + |W2|^2).

inline double mlp_objective(const reqsmell::MlpModel& m, const std::vector<std::vector<double>>& x,
                            const std::vector<std::vector<int>>& y, double l2) {
  const std::size_t H = m.w1.rows, V = m.w1.cols, L = m.w2.rows;
  double total = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    std::vector<double> h(H);
    for (std::size_t i = 0; i < H; ++i) {
      double s = m.b1[i];
      for (std::size_t j = 0; j < V; ++j) s += m.w1(i, j) * x[r][j];
      h[i] = s > 0.0 ? s : 0.0;
    }
    for (std::size_t l = 0; l < L; ++l) {
      double z = m.b2[l];
      for (std::size_t i = 0; i < H; ++i) z += m.w2(l, i) * h[i];
      const double p = 1.0 / (1.0 + std::exp(-z));
      total += y[r][l] ? -std::log(p) : -std::log(1.0 - p);
    }
  }
  double sq = 0.0;
  for (double v : m.w1.data) sq += v * v;
  for (double v : m.w2.data) sq += v * v;
  return total / static_cast<double>(x.size()) + 0.5 * l2 * sq;
}

} // namespace testsupport
