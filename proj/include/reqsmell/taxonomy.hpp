#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reqsmell/error.hpp"

namespace reqsmell {

/// ISO 29148 language criteria. The first five form the core set that the
/// part-of-speech proxy can detect.
enum class SmellClass : std::uint8_t {
  SUBJECTIVE_LANGUAGE,
  AMBIGUOUS_ADV_ADJ,
  SUPERLATIVES,
  COMPARATIVES,
  VAGUE_PRONOUNS,
  OPEN_ENDED_TERMS,
  LOOPHOLES,
  INCOMPLETE_REFERENCES,
  NEGATIVE_STATEMENTS,
};

inline constexpr std::size_t kSmellClassCount = 9;
inline constexpr std::size_t kCoreClassCount = 5;

inline constexpr std::array<SmellClass, kSmellClassCount> kAllSmellClasses = {
    SmellClass::SUBJECTIVE_LANGUAGE,   SmellClass::AMBIGUOUS_ADV_ADJ,
    SmellClass::SUPERLATIVES,          SmellClass::COMPARATIVES,
    SmellClass::VAGUE_PRONOUNS,        SmellClass::OPEN_ENDED_TERMS,
    SmellClass::LOOPHOLES,             SmellClass::INCOMPLETE_REFERENCES,
    SmellClass::NEGATIVE_STATEMENTS,
};

inline constexpr std::string_view name(SmellClass c) {
  switch (c) {
  case SmellClass::SUBJECTIVE_LANGUAGE: return "SUBJECTIVE_LANGUAGE";
  case SmellClass::AMBIGUOUS_ADV_ADJ: return "AMBIGUOUS_ADV_ADJ";
  case SmellClass::SUPERLATIVES: return "SUPERLATIVES";
  case SmellClass::COMPARATIVES: return "COMPARATIVES";
  case SmellClass::VAGUE_PRONOUNS: return "VAGUE_PRONOUNS";
  case SmellClass::OPEN_ENDED_TERMS: return "OPEN_ENDED_TERMS";
  case SmellClass::LOOPHOLES: return "LOOPHOLES";
  case SmellClass::INCOMPLETE_REFERENCES: return "INCOMPLETE_REFERENCES";
  case SmellClass::NEGATIVE_STATEMENTS: return "NEGATIVE_STATEMENTS";
  }
  return "?";
}

inline constexpr bool is_core(SmellClass c) {
  return static_cast<std::size_t>(c) < kCoreClassCount;
}

/// Accepts canonical names (any case) and the tag aliases JJ, RB, JJS, JJR
/// and WDT for the core classes.
inline std::optional<SmellClass> parse_smell_class(std::string_view text) {
  std::string up(text);
  for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (auto c : kAllSmellClasses)
    if (name(c) == up) return c;
  if (up == "JJ") return SmellClass::SUBJECTIVE_LANGUAGE;
  if (up == "RB") return SmellClass::AMBIGUOUS_ADV_ADJ;
  if (up == "JJS") return SmellClass::SUPERLATIVES;
  if (up == "JJR") return SmellClass::COMPARATIVES;
  if (up == "WDT") return SmellClass::VAGUE_PRONOUNS;
  return std::nullopt;
}

/// Multi-hot assignment over the nine smell classes.
class LabelSet {
public:
  LabelSet() = default;
  LabelSet(std::initializer_list<SmellClass> classes) {
    for (auto c : classes) insert(c);
  }

  void insert(SmellClass c) { bits_ |= bit(c); }
  void erase(SmellClass c) { bits_ &= static_cast<std::uint16_t>(~bit(c)); }
  bool contains(SmellClass c) const { return (bits_ & bit(c)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const {
    std::size_t n = 0;
    for (auto c : kAllSmellClasses) n += contains(c) ? 1 : 0;
    return n;
  }
  bool core_only() const { return (bits_ >> kCoreClassCount) == 0; }

  /// Members in enumeration order.
  std::vector<SmellClass> classes() const {
    std::vector<SmellClass> out;
    for (auto c : kAllSmellClasses)
      if (contains(c)) out.push_back(c);
    return out;
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

private:
  static std::uint16_t bit(SmellClass c) {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(c));
  }
  std::uint16_t bits_ = 0;
};

/// The ordered set of classes that form label columns for learning.
class LabelConfig {
public:
  LabelConfig() = default;
  explicit LabelConfig(std::vector<SmellClass> active) : active_(std::move(active)) {}

  static LabelConfig core() {
    return LabelConfig({kAllSmellClasses.begin(), kAllSmellClasses.begin() + kCoreClassCount});
  }
  static LabelConfig all() { return LabelConfig({kAllSmellClasses.begin(), kAllSmellClasses.end()}); }

  std::size_t size() const { return active_.size(); }
  SmellClass operator[](std::size_t i) const { return active_[i]; }
  const std::vector<SmellClass>& classes() const { return active_; }

  std::optional<std::size_t> index_of(SmellClass c) const {
    auto it = std::find(active_.begin(), active_.end(), c);
    if (it == active_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - active_.begin());
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (auto c : active_) out.emplace_back(name(c));
    return out;
  }

  friend bool operator==(const LabelConfig&, const LabelConfig&) = default;

private:
  std::vector<SmellClass> active_;
};

/// Dense row-major 0/1 matrix: one row per instance, one column per label.
class LabelMatrix {
public:
  LabelMatrix() = default;
  LabelMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  LabelMatrix(std::initializer_list<std::initializer_list<int>> rows) {
    for (const auto& r : rows) {
      if (rows_ == 0) cols_ = r.size();
      if (r.size() != cols_) throw Error("LabelMatrix: ragged initializer");
      for (int v : r) data_.push_back(v != 0 ? 1 : 0);
      ++rows_;
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v) { data_[r * cols_ + c] = v ? 1 : 0; }

  void append_row(const std::vector<std::uint8_t>& row) {
    if (rows_ == 0 && cols_ == 0) cols_ = row.size();
    if (row.size() != cols_) throw Error("LabelMatrix: row width mismatch");
    for (auto v : row) data_.push_back(v != 0 ? 1 : 0);
    ++rows_;
  }
  std::vector<std::uint8_t> row(std::size_t r) const {
    return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
            data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
  }
  std::size_t column_count(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows_; ++r) n += at(r, c) ? 1 : 0;
    return n;
  }
  LabelMatrix select_rows(const std::vector<std::size_t>& idx) const {
    LabelMatrix out(0, cols_);
    for (auto r : idx) out.append_row(row(r));
    return out;
  }

  friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

/// One detected smell. Token indices are inclusive.
struct SmellFinding {
  SmellClass smell{};
  std::size_t first_token = 0;
  std::size_t last_token = 0;
  std::string evidence;
  std::string rule_id;

  friend bool operator==(const SmellFinding&, const SmellFinding&) = default;
};

inline LabelSet labels_of(const std::vector<SmellFinding>& findings) {
  LabelSet s;
  for (const auto& f : findings) s.insert(f.smell);
  return s;
}

} // namespace reqsmell
