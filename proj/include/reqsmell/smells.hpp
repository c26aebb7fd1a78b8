#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "reqsmell/corpus.hpp"
#include "reqsmell/error.hpp"
#include "reqsmell/lexic.hpp"
#include "reqsmell/taxonomy.hpp"

namespace reqsmell {

enum class DetectMode { pos_proxy, lexicon };

inline constexpr std::string_view name(DetectMode m) {
  return m == DetectMode::pos_proxy ? "pos_proxy" : "lexicon";
}

inline std::optional<DetectMode> parse_detect_mode(std::string_view s) {
  if (s == "pos_proxy") return DetectMode::pos_proxy;
  if (s == "lexicon") return DetectMode::lexicon;
  return std::nullopt;
}

/// Smell class a tag maps to under the part-of-speech proxy, if any.
inline std::optional<SmellClass> pos_proxy_class(Tag t) {
  switch (t) {
  case Tag::JJ: return SmellClass::SUBJECTIVE_LANGUAGE;
  case Tag::RB: return SmellClass::AMBIGUOUS_ADV_ADJ;
  case Tag::JJS: return SmellClass::SUPERLATIVES;
  case Tag::JJR: return SmellClass::COMPARATIVES;
  case Tag::WDT: return SmellClass::VAGUE_PRONOUNS;
  default: return std::nullopt;
  }
}

/// Normalized phrase form: lowercased non-punctuation tokens joined by
/// single spaces.
inline std::string normalize_phrase(std::string_view text) {
  std::string out;
  for (const auto& t : tokenize(text)) {
    if (is_punct_token(t.surface)) continue;
    if (!out.empty()) out.push_back(' ');
    out += t.lower;
  }
  return out;
}

/// Terms and multiword phrases per smell class.
class SmellLexicons {
public:
  SmellLexicons() = default;

  void add(SmellClass c, std::string_view term) {
    auto norm = normalize_phrase(term);
    if (!norm.empty()) terms_[static_cast<std::size_t>(c)].insert(std::move(norm));
  }
  const std::set<std::string>& terms(SmellClass c) const { return terms_[static_cast<std::size_t>(c)]; }

  /// One term per line, "#" comment lines, blank lines ignored.
  void add_file_contents(SmellClass c, std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      auto line = text.substr(pos, nl - pos);
      pos = nl + 1;
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string_view::npos || line[first] == '#') continue;
      add(c, line);
    }
  }

  /// Reads one file per class named after the class in lowercase. A class
  /// without a file gets an empty term set.
  static SmellLexicons load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error("lexicon directory '" + dir + "' not found");
    SmellLexicons lex;
    for (auto c : kAllSmellClasses) {
      auto path = fs::path(dir) / to_lower(name(c));
      if (fs::exists(path)) lex.add_file_contents(c, detail::read_file(path.string()));
    }
    return lex;
  }

  /// The bundled seed lists (identical to data/lexicons/).
  static const SmellLexicons& bundled() {
    static const SmellLexicons lex = [] {
      SmellLexicons l;
      const std::array<std::pair<SmellClass, std::vector<std::string_view>>, kSmellClassCount> seed = {{
          {SmellClass::SUBJECTIVE_LANGUAGE,
           {"user-friendly", "easy", "easy to use", "cost effective", "flexible", "intuitive", "fast",
            "efficient", "state of the art"}},
          {SmellClass::AMBIGUOUS_ADV_ADJ,
           {"almost", "always", "significant", "minimal", "adequate", "normally", "approximately", "usually",
            "sufficient"}},
          {SmellClass::SUPERLATIVES, {"best", "worst", "most", "least", "maximal", "optimal"}},
          {SmellClass::COMPARATIVES, {"better", "worse", "more", "less", "faster", "slower", "higher", "lower"}},
          {SmellClass::VAGUE_PRONOUNS, {"this", "these", "that", "it", "they", "which"}},
          {SmellClass::OPEN_ENDED_TERMS,
           {"including but not limited to", "etc", "and so on", "as a minimum", "as fast as possible"}},
          {SmellClass::LOOPHOLES, {"if possible", "as applicable", "as appropriate", "where feasible"}},
          {SmellClass::INCOMPLETE_REFERENCES, {"tbd", "tbc", "to be defined", "see above", "see below"}},
          {SmellClass::NEGATIVE_STATEMENTS, {"not", "never", "no"}},
      }};
      for (const auto& [cls, terms] : seed)
        for (auto t : terms) l.add(cls, t);
      return l;
    }();
    return lex;
  }

  friend bool operator==(const SmellLexicons&, const SmellLexicons&) = default;

private:
  std::array<std::set<std::string>, kSmellClassCount> terms_;
};

namespace detail {

struct Candidate {
  std::size_t start = 0; // index into the word (non-punctuation) sequence
  std::size_t length = 0;
  SmellClass smell{};
  const std::string* phrase = nullptr;
};

inline std::vector<std::string> split_words(const std::string& phrase) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= phrase.size()) {
    auto sp = phrase.find(' ', pos);
    if (sp == std::string::npos) sp = phrase.size();
    out.push_back(phrase.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return out;
}

inline std::vector<SmellFinding> detect_pos_proxy(const std::vector<Token>& tokens) {
  std::vector<SmellFinding> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto cls = pos_proxy_class(*tokens[i].tag);
    if (!cls) continue;
    out.push_back(SmellFinding{*cls, i, i, tokens[i].surface, "pos_proxy:" + std::string(name(*tokens[i].tag))});
  }
  return out;
}

// Phrase matching runs over the word tokens only, so punctuation between the
// words of a phrase does not prevent a match. Selection is longest first;
// equal lengths go to the earlier start, then the smaller class name.
inline std::vector<SmellFinding> detect_lexicon(const std::vector<Token>& tokens, const SmellLexicons& lex) {
  std::vector<std::size_t> word_pos;
  std::vector<const std::string*> words;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_punct_token(tokens[i].surface)) continue;
    word_pos.push_back(i);
    words.push_back(&tokens[i].lower);
  }

  std::vector<Candidate> cands;
  for (auto cls : kAllSmellClasses) {
    for (const auto& phrase : lex.terms(cls)) {
      auto parts = split_words(phrase);
      if (parts.size() > words.size()) continue;
      for (std::size_t s = 0; s + parts.size() <= words.size(); ++s) {
        bool ok = true;
        for (std::size_t j = 0; j < parts.size() && ok; ++j) ok = *words[s + j] == parts[j];
        if (ok) cands.push_back(Candidate{s, parts.size(), cls, &phrase});
      }
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.length != b.length) return a.length > b.length;
    if (a.start != b.start) return a.start < b.start;
    return name(a.smell) < name(b.smell);
  });

  std::vector<bool> taken(words.size(), false);
  std::vector<Candidate> chosen;
  for (const auto& c : cands) {
    bool free = true;
    for (std::size_t j = c.start; j < c.start + c.length && free; ++j) free = !taken[j];
    if (!free) continue;
    for (std::size_t j = c.start; j < c.start + c.length; ++j) taken[j] = true;
    chosen.push_back(c);
  }
  std::sort(chosen.begin(), chosen.end(), [](const Candidate& a, const Candidate& b) { return a.start < b.start; });

  std::vector<SmellFinding> out;
  for (const auto& c : chosen) {
    out.push_back(SmellFinding{c.smell, word_pos[c.start], word_pos[c.start + c.length - 1], *c.phrase,
                               "lexicon:" + to_lower(name(c.smell))});
  }
  return out;
}

} // namespace detail

/// Findings for one requirement, ordered by first token.
inline std::vector<SmellFinding> detect(const Requirement& req, DetectMode mode,
                                        const SmellLexicons& lexicons = SmellLexicons::bundled(),
                                        const TagLexicon& tags = TagLexicon::bundled()) {
  if (mode == DetectMode::pos_proxy) return detail::detect_pos_proxy(analyze(req.text, tags));
  return detail::detect_lexicon(tokenize(req.text), lexicons);
}

/// Labels every item from its findings. Smell-free items keep an empty label
/// set unless `retain_clean` is false, in which case they are dropped.
inline Corpus autolabel(const Corpus& corpus, DetectMode mode,
                        const SmellLexicons& lexicons = SmellLexicons::bundled(),
                        const TagLexicon& tags = TagLexicon::bundled(), bool retain_clean = true) {
  std::vector<CorpusItem> out;
  out.reserve(corpus.size());
  for (const auto& it : corpus.items()) {
    CorpusItem item;
    item.requirement = it.requirement;
    item.findings = detect(it.requirement, mode, lexicons, tags);
    item.labels = labels_of(item.findings);
    if (!retain_clean && item.findings.empty()) continue;
    out.push_back(std::move(item));
  }
  return Corpus(std::move(out));
}

/// JSON array of {id, smell, start_token, end_token, evidence, rule_id}.
inline nlohmann::ordered_json findings_json(const Corpus& labeled) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& it : labeled.items()) {
    for (const auto& f : it.findings) {
      nlohmann::ordered_json j;
      j["id"] = it.id();
      j["smell"] = std::string(name(f.smell));
      j["start_token"] = f.first_token;
      j["end_token"] = f.last_token;
      j["evidence"] = f.evidence;
      j["rule_id"] = f.rule_id;
      arr.push_back(std::move(j));
    }
  }
  return arr;
}

/// Human-readable lint report: one block per requirement with findings,
/// giving evidence, token range and character span.
inline std::string lint_summary(const Corpus& labeled) {
  std::string out;
  std::size_t total = 0;
  std::size_t flagged = 0;
  for (const auto& it : labeled.items()) {
    if (it.findings.empty()) continue;
    ++flagged;
    auto tokens = tokenize(it.text());
    out += it.id() + ": " + std::to_string(it.findings.size()) + " finding(s)\n";
    for (const auto& f : it.findings) {
      ++total;
      auto start = tokens[f.first_token].span.start;
      auto end = tokens[f.last_token].span.end;
      out += "  " + std::string(name(f.smell)) + " \"" + it.text().substr(start, end - start) + "\" tokens " +
             std::to_string(f.first_token) + "-" + std::to_string(f.last_token) + " chars " +
             std::to_string(start) + "-" + std::to_string(end) + " [" + f.rule_id + "]\n";
    }
  }
  out += std::to_string(total) + " finding(s) in " + std::to_string(flagged) + " of " +
         std::to_string(labeled.size()) + " requirement(s)\n";
  return out;
}

} // namespace reqsmell
