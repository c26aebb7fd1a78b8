#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "reqsmell/csv.hpp"
#include "reqsmell/error.hpp"
#include "reqsmell/random.hpp"
#include "reqsmell/taxonomy.hpp"

namespace reqsmell {

enum class Provenance : std::uint8_t { closed_source, pure, synthetic, other };

inline constexpr std::string_view name(Provenance p) {
  switch (p) {
  case Provenance::closed_source: return "closed_source";
  case Provenance::pure: return "pure";
  case Provenance::synthetic: return "synthetic";
  case Provenance::other: return "other";
  }
  return "?";
}

inline std::optional<Provenance> parse_provenance(std::string_view s) {
  for (auto p : {Provenance::closed_source, Provenance::pure, Provenance::synthetic, Provenance::other})
    if (name(p) == s) return p;
  return std::nullopt;
}

struct Requirement {
  std::string id;
  std::string project;
  std::string text;
  Provenance provenance = Provenance::other;

  friend bool operator==(const Requirement&, const Requirement&) = default;
};

/// A requirement with an optional label assignment. When findings are
/// present the labels are exactly the classes the findings name.
struct CorpusItem {
  Requirement requirement;
  std::optional<LabelSet> labels;
  std::vector<SmellFinding> findings;

  bool labeled() const { return labels.has_value(); }
  const std::string& id() const { return requirement.id; }
  const std::string& text() const { return requirement.text; }

  friend bool operator==(const CorpusItem&, const CorpusItem&) = default;
};

namespace detail {
inline bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}
} // namespace detail

/// Ordered, validated collection of requirements. Immutable after
/// construction.
class Corpus {
public:
  static constexpr int kSchemaVersion = 1;

  Corpus() = default;
  explicit Corpus(std::vector<CorpusItem> items) : items_(std::move(items)) { validate(); }

  const std::vector<CorpusItem>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const CorpusItem& operator[](std::size_t i) const { return items_[i]; }
  int schema_version() const { return schema_version_; }

  bool all_labeled() const {
    return std::all_of(items_.begin(), items_.end(), [](const auto& it) { return it.labeled(); });
  }

  std::vector<std::string> texts() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto& it : items_) out.push_back(it.text());
    return out;
  }

  Corpus subset(const std::vector<std::size_t>& indices) const {
    std::vector<CorpusItem> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(items_.at(i));
    return Corpus(std::move(out));
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;

private:
  void validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& it : items_) {
      if (it.id().empty()) throw Error("requirement with empty id");
      if (!seen.insert(it.id()).second) throw Error("duplicate id '" + it.id() + "'");
      if (detail::blank(it.text())) throw Error("requirement '" + it.id() + "' has empty text");
      if (!it.findings.empty() && (!it.labels || *it.labels != labels_of(it.findings)))
        throw Error("requirement '" + it.id() + "': labels disagree with findings");
    }
  }

  std::vector<CorpusItem> items_;
  int schema_version_ = kSchemaVersion;
};

enum class CorpusFormat { jsonl, csv };

inline std::optional<CorpusFormat> parse_corpus_format(std::string_view s) {
  if (s == "jsonl") return CorpusFormat::jsonl;
  if (s == "csv") return CorpusFormat::csv;
  return std::nullopt;
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path + "'");
}

inline LabelSet parse_label_names(const std::vector<std::string>& names, const std::string& where) {
  LabelSet s;
  for (const auto& n : names) {
    auto c = parse_smell_class(n);
    if (!c) throw Error(where + "field 'labels': unknown smell class '" + n + "'");
    s.insert(*c);
  }
  return s;
}

inline void check_unique(std::unordered_map<std::string, std::size_t>& seen, const std::string& id,
                         std::size_t line) {
  auto [it, inserted] = seen.emplace(id, line);
  if (!inserted)
    throw Error("line " + std::to_string(line) + ": duplicate id '" + id + "' (first seen on line " +
                std::to_string(it->second) + ")");
}

inline std::vector<CorpusItem> parse_jsonl(std::string_view text) {
  std::vector<CorpusItem> items;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (blank(line)) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(where + "invalid JSON (" + e.what() + ")");
    }
    if (!rec.is_object()) throw Error(where + "record is not a JSON object");

    auto string_field = [&](const char* key, bool required, std::string fallback) -> std::string {
      auto it = rec.find(key);
      if (it == rec.end()) {
        if (required) throw Error(where + "field '" + key + "': missing");
        return fallback;
      }
      if (!it->is_string()) throw Error(where + "field '" + key + "': expected string");
      return it->get<std::string>();
    };

    CorpusItem item;
    item.requirement.id = string_field("id", true, "");
    if (item.requirement.id.empty()) throw Error(where + "field 'id': empty");
    item.requirement.project = string_field("project", false, "");
    item.requirement.text = string_field("text", true, "");
    if (blank(item.requirement.text)) throw Error(where + "field 'text': empty");
    auto prov = string_field("provenance", false, "other");
    auto p = parse_provenance(prov);
    if (!p) throw Error(where + "field 'provenance': unknown value '" + prov + "'");
    item.requirement.provenance = *p;
    if (auto it = rec.find("labels"); it != rec.end()) {
      if (!it->is_array()) throw Error(where + "field 'labels': expected array");
      std::vector<std::string> names;
      for (const auto& v : *it) {
        if (!v.is_string()) throw Error(where + "field 'labels': expected array of strings");
        names.push_back(v.get<std::string>());
      }
      item.labels = parse_label_names(names, where);
    }
    check_unique(seen, item.requirement.id, line_no);
    items.push_back(std::move(item));
  }
  return items;
}

inline std::vector<CorpusItem> parse_csv(std::string_view text) {
  auto records = csv::parse(text);
  if (records.empty()) throw Error("csv: missing header row");
  const auto& header = records.front().fields;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"id", "text"})
    if (!col.count(required)) throw Error(std::string("csv header: missing column '") + required + "'");

  std::vector<CorpusItem> items;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "line " + std::to_string(rec.line) + ": ";
    if (rec.fields.size() != header.size())
      throw Error(where + "expected " + std::to_string(header.size()) + " fields, got " +
                  std::to_string(rec.fields.size()));
    auto get = [&](const char* key) -> std::string {
      auto it = col.find(key);
      return it == col.end() ? std::string() : rec.fields[it->second];
    };
    CorpusItem item;
    item.requirement.id = get("id");
    if (item.requirement.id.empty()) throw Error(where + "field 'id': empty");
    item.requirement.project = get("project");
    item.requirement.text = get("text");
    if (blank(item.requirement.text)) throw Error(where + "field 'text': empty");
    auto prov = get("provenance");
    if (prov.empty()) prov = "other";
    auto p = parse_provenance(prov);
    if (!p) throw Error(where + "field 'provenance': unknown value '" + prov + "'");
    item.requirement.provenance = *p;
    if (col.count("labels")) {
      std::vector<std::string> names;
      std::string cell = get("labels");
      std::size_t start = 0;
      while (start <= cell.size() && !cell.empty()) {
        auto semi = cell.find(';', start);
        if (semi == std::string::npos) semi = cell.size();
        auto piece = cell.substr(start, semi - start);
        if (!blank(piece)) {
          auto a = piece.find_first_not_of(" \t");
          auto b = piece.find_last_not_of(" \t");
          names.push_back(piece.substr(a, b - a + 1));
        }
        start = semi + 1;
      }
      item.labels = parse_label_names(names, where);
    }
    check_unique(seen, item.requirement.id, rec.line);
    items.push_back(std::move(item));
  }
  return items;
}

inline std::vector<std::string> label_names(const LabelSet& s) {
  std::vector<std::string> out;
  for (auto c : s.classes()) out.emplace_back(name(c));
  return out;
}

} // namespace detail

inline Corpus parse_corpus(std::string_view text, CorpusFormat format) {
  return Corpus(format == CorpusFormat::jsonl ? detail::parse_jsonl(text) : detail::parse_csv(text));
}

inline Corpus load_corpus(const std::string& path, CorpusFormat format) {
  try {
    return parse_corpus(detail::read_file(path), format);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

/// One JSON object per line. Labels are written only for labeled items, in
/// enumeration order.
inline std::string format_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& it : corpus.items()) {
    nlohmann::ordered_json rec;
    rec["id"] = it.requirement.id;
    rec["project"] = it.requirement.project;
    rec["text"] = it.requirement.text;
    rec["provenance"] = std::string(name(it.requirement.provenance));
    if (it.labels) rec["labels"] = detail::label_names(*it.labels);
    out += rec.dump();
    out.push_back('\n');
  }
  return out;
}

/// CSV with the fixed column order id, project, text, provenance, labels.
/// The labels column is written only when some item is labeled.
inline std::string format_csv(const Corpus& corpus) {
  const bool any_labeled =
      std::any_of(corpus.items().begin(), corpus.items().end(), [](const CorpusItem& it) { return it.labeled(); });
  std::vector<std::string> header{"id", "project", "text", "provenance"};
  if (any_labeled) header.push_back("labels");
  std::string out = csv::format_row(header);
  for (const auto& it : corpus.items()) {
    std::vector<std::string> row{it.requirement.id, it.requirement.project, it.requirement.text,
                                 std::string(name(it.requirement.provenance))};
    if (any_labeled) {
      std::string labels;
      if (it.labels) {
        auto names = detail::label_names(*it.labels);
        for (std::size_t i = 0; i < names.size(); ++i) labels += (i ? ";" : "") + names[i];
      }
      row.push_back(labels);
    }
    out += csv::format_row(row);
  }
  return out;
}

inline void save_corpus(const Corpus& corpus, const std::string& path, CorpusFormat format) {
  detail::write_file(path, format == CorpusFormat::jsonl ? format_jsonl(corpus) : format_csv(corpus));
}

/// Core set when every label present belongs to it, otherwise all nine.
inline LabelConfig infer_label_config(const Corpus& corpus) {
  for (const auto& it : corpus.items())
    if (it.labels && !it.labels->core_only()) return LabelConfig::all();
  return LabelConfig::core();
}

/// Label matrix over `config`. Every item must be labeled.
inline LabelMatrix label_matrix(const Corpus& corpus, const LabelConfig& config) {
  LabelMatrix y(corpus.size(), config.size());
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    const auto& it = corpus[r];
    if (!it.labels) throw Error("requirement '" + it.id() + "' is not labeled");
    for (std::size_t c = 0; c < config.size(); ++c) y.set(r, c, it.labels->contains(config[c]));
  }
  return y;
}

// ---------------------------------------------------------------------------
// Statistics

struct StatsReport {
  LabelConfig config;
  std::vector<std::size_t> class_counts; // aligned with config
  std::map<std::size_t, std::size_t> label_count_histogram;
  std::size_t total = 0;

  std::size_t count(SmellClass c) const {
    auto i = config.index_of(c);
    return i ? class_counts[*i] : 0;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["total"] = total;
    nlohmann::ordered_json cc = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < config.size(); ++i) cc[std::string(name(config[i]))] = class_counts[i];
    j["class_counts"] = cc;
    nlohmann::ordered_json h = nlohmann::ordered_json::object();
    for (const auto& [k, v] : label_count_histogram) h[std::to_string(k)] = v;
    j["label_count_histogram"] = h;
    return j;
  }
};

/// Class frequencies and the labels-per-requirement histogram. Classes are
/// reported over the inferred label configuration, zeros included.
inline StatsReport corpus_stats(const Corpus& corpus) {
  StatsReport r;
  r.config = infer_label_config(corpus);
  r.class_counts.assign(r.config.size(), 0);
  for (const auto& it : corpus.items()) {
    if (!it.labels) throw Error("corpus_stats: requirement '" + it.id() + "' is not labeled");
    for (std::size_t i = 0; i < r.config.size(); ++i)
      if (it.labels->contains(r.config[i])) ++r.class_counts[i];
    ++r.label_count_histogram[it.labels->size()];
    ++r.total;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Fold splitting

enum class FoldMode { random, iterative_stratified };

inline std::optional<FoldMode> parse_fold_mode(std::string_view s) {
  if (s == "random") return FoldMode::random;
  if (s == "iterative_stratified") return FoldMode::iterative_stratified;
  return std::nullopt;
}

/// Assignment of every corpus item to one of k folds, aligned with corpus
/// order.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::string> ids;
  std::vector<std::size_t> fold_of;

  std::vector<std::size_t> members(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] == fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> complement(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] != fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out(k, 0);
    for (auto f : fold_of) ++out[f];
    return out;
  }

  /// JSON mapping id -> fold index, in corpus order.
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) j[ids[i]] = fold_of[i];
    return j;
  }

  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
};

namespace detail {

// Greedy iterative stratification: repeatedly take the label with the fewest
// unassigned examples and hand each of its examples to the fold that still
// wants most of that label (then most examples overall, then a seeded pick).
inline std::vector<std::size_t> stratified_assign(const Corpus& corpus, std::size_t k, Engine& eng) {
  const std::size_t n = corpus.size();
  std::vector<LabelSet> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    if (corpus[i].labels) labels[i] = *corpus[i].labels;

  std::vector<double> want_size(k, static_cast<double>(n) / static_cast<double>(k));
  std::vector<std::vector<double>> want_label(k, std::vector<double>(kSmellClassCount, 0.0));
  for (auto c : kAllSmellClasses) {
    std::size_t cnt = 0;
    for (const auto& l : labels) cnt += l.contains(c) ? 1 : 0;
    for (std::size_t f = 0; f < k; ++f)
      want_label[f][static_cast<std::size_t>(c)] = static_cast<double>(cnt) / static_cast<double>(k);
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(order, eng);

  std::vector<std::size_t> fold(n, k);
  std::vector<bool> done(n, false);

  auto pick = [&](std::vector<std::size_t>& cands) {
    return cands.size() == 1 ? cands[0] : cands[uniform_index(eng, cands.size())];
  };
  auto assign = [&](std::size_t item, std::size_t f) {
    fold[item] = f;
    done[item] = true;
    want_size[f] -= 1.0;
    for (auto c : labels[item].classes()) want_label[f][static_cast<std::size_t>(c)] -= 1.0;
  };

  for (;;) {
    std::optional<std::size_t> rarest;
    std::size_t rarest_count = 0;
    for (std::size_t c = 0; c < kSmellClassCount; ++c) {
      std::size_t cnt = 0;
      for (auto i : order)
        if (!done[i] && labels[i].contains(static_cast<SmellClass>(c))) ++cnt;
      if (cnt > 0 && (!rarest || cnt < rarest_count)) {
        rarest = c;
        rarest_count = cnt;
      }
    }
    if (!rarest) break;
    const auto cls = static_cast<SmellClass>(*rarest);
    for (auto i : order) {
      if (done[i] || !labels[i].contains(cls)) continue;
      double best_label = -1e300;
      for (std::size_t f = 0; f < k; ++f) best_label = std::max(best_label, want_label[f][*rarest]);
      std::vector<std::size_t> tied;
      double best_size = -1e300;
      for (std::size_t f = 0; f < k; ++f)
        if (want_label[f][*rarest] == best_label) best_size = std::max(best_size, want_size[f]);
      for (std::size_t f = 0; f < k; ++f)
        if (want_label[f][*rarest] == best_label && want_size[f] == best_size) tied.push_back(f);
      assign(i, pick(tied));
    }
  }
  for (auto i : order) {
    if (done[i]) continue;
    double best_size = -1e300;
    for (std::size_t f = 0; f < k; ++f) best_size = std::max(best_size, want_size[f]);
    std::vector<std::size_t> tied;
    for (std::size_t f = 0; f < k; ++f)
      if (want_size[f] == best_size) tied.push_back(f);
    assign(i, pick(tied));
  }
  return fold;
}

} // namespace detail

inline FoldPlan split_folds(const Corpus& corpus, std::size_t k, FoldMode mode, std::uint64_t seed) {
  if (k < 2) throw Error("split_folds: k must be >= 2");
  if (k > corpus.size())
    throw Error("split_folds: k = " + std::to_string(k) + " exceeds corpus size " + std::to_string(corpus.size()));
  FoldPlan plan;
  plan.k = k;
  for (const auto& it : corpus.items()) plan.ids.push_back(it.id());
  auto eng = make_engine(seed, Stream::folds);
  if (mode == FoldMode::random) {
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, eng);
    plan.fold_of.assign(corpus.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) plan.fold_of[order[pos]] = pos % k;
  } else {
    plan.fold_of = detail::stratified_assign(corpus, k, eng);
  }
  return plan;
}

} // namespace reqsmell
