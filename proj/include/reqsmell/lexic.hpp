#pragma once

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "reqsmell/error.hpp"

namespace reqsmell {

enum class Tag : std::uint8_t { JJ, JJR, JJS, RB, WDT, PRP, DT, NN, VB, MD, IN, CC, CD, PUNCT, OTHER };

inline constexpr std::string_view name(Tag t) {
  switch (t) {
  case Tag::JJ: return "JJ";
  case Tag::JJR: return "JJR";
  case Tag::JJS: return "JJS";
  case Tag::RB: return "RB";
  case Tag::WDT: return "WDT";
  case Tag::PRP: return "PRP";
  case Tag::DT: return "DT";
  case Tag::NN: return "NN";
  case Tag::VB: return "VB";
  case Tag::MD: return "MD";
  case Tag::IN: return "IN";
  case Tag::CC: return "CC";
  case Tag::CD: return "CD";
  case Tag::PUNCT: return "PUNCT";
  case Tag::OTHER: return "OTHER";
  }
  return "?";
}

inline std::optional<Tag> parse_tag(std::string_view s) {
  for (auto t : {Tag::JJ, Tag::JJR, Tag::JJS, Tag::RB, Tag::WDT, Tag::PRP, Tag::DT, Tag::NN, Tag::VB,
                 Tag::MD, Tag::IN, Tag::CC, Tag::CD, Tag::PUNCT, Tag::OTHER})
    if (name(t) == s) return t;
  return std::nullopt;
}

/// Half-open byte range [start, end) into the source text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  std::string surface;
  std::string lower;
  Span span;
  std::optional<Tag> tag;

  friend bool operator==(const Token&, const Token&) = default;
};

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

namespace detail {

// Bytes >= 0x80 are treated as word characters so UTF-8 letters stay inside
// words; offsets are byte offsets.
inline bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }
inline bool is_space_char(unsigned char c) { return std::isspace(c) != 0; }

} // namespace detail

/// A token is punctuation when it is a single character that is neither a
/// word character nor whitespace.
inline bool is_punct_token(std::string_view surface) {
  return surface.size() == 1 && !detail::is_word_char(static_cast<unsigned char>(surface[0])) &&
         !detail::is_space_char(static_cast<unsigned char>(surface[0]));
}

/// Splits into maximal word runs (letters, digits, and hyphens with a word
/// character on both sides) and single punctuation marks. Tags are unset.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < n) {
    if (detail::is_space_char(at(i))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (detail::is_word_char(at(i))) {
      ++i;
      while (i < n) {
        if (detail::is_word_char(at(i))) {
          ++i;
        } else if (text[i] == '-' && i + 1 < n && detail::is_word_char(at(i + 1))) {
          i += 2;
        } else {
          break;
        }
      }
    } else {
      ++i;
    }
    std::string surface(text.substr(start, i - start));
    std::string lower = to_lower(surface);
    out.push_back(Token{std::move(surface), std::move(lower), Span{start, i}, std::nullopt});
  }
  return out;
}

/// Word-to-tag entries plus words exempt from the suffix rules. Immutable
/// once built; conflicting duplicate entries are rejected so the result never
/// depends on declaration order.
class TagLexicon {
public:
  TagLexicon() = default;

  void add_entry(std::string_view word, Tag tag) {
    auto key = to_lower(word);
    auto [it, inserted] = entries_.emplace(key, tag);
    if (!inserted && it->second != tag)
      throw Error("tag lexicon: conflicting tags for '" + key + "': " + std::string(name(it->second)) +
                  " and " + std::string(name(tag)));
  }
  void add_exception(std::string_view word) { exceptions_.insert(to_lower(word)); }

  std::optional<Tag> lookup(std::string_view lower) const {
    auto it = entries_.find(std::string(lower));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }
  bool is_exception(std::string_view lower) const { return exceptions_.count(std::string(lower)) != 0; }

  const std::map<std::string, Tag>& entries() const { return entries_; }
  const std::set<std::string>& exceptions() const { return exceptions_; }

  /// Parses the "word<TAB>TAG" format; "#" starts a comment line and an
  /// "[exceptions]" header switches to one exempt word per line.
  static TagLexicon parse(std::string_view text, std::string_view source = "<tag lexicon>") {
    TagLexicon lex;
    bool in_exceptions = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      auto first = line.find_first_not_of(" \t");
      if (first == std::string_view::npos || line[first] == '#') continue;
      if (line.substr(first) == "[exceptions]") {
        in_exceptions = true;
        continue;
      }
      auto where = [&] { return std::string(source) + ":" + std::to_string(line_no) + ": "; };
      if (in_exceptions) {
        auto last = line.find_last_not_of(" \t");
        lex.add_exception(line.substr(first, last - first + 1));
        continue;
      }
      auto tab = line.find('\t');
      if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos)
        throw Error(where() + "expected 'word<TAB>TAG'");
      auto word = line.substr(0, tab);
      auto tag = parse_tag(line.substr(tab + 1));
      if (word.empty()) throw Error(where() + "empty word");
      if (!tag) throw Error(where() + "unknown tag '" + std::string(line.substr(tab + 1)) + "'");
      try {
        lex.add_entry(word, *tag);
      } catch (const Error& e) {
        throw Error(where() + e.what());
      }
    }
    return lex;
  }

  static TagLexicon load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open tag lexicon '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  /// The bundled lexicon (identical to data/lexicons/tags.tsv).
  static const TagLexicon& bundled();

  friend bool operator==(const TagLexicon&, const TagLexicon&) = default;

private:
  std::map<std::string, Tag> entries_;
  std::set<std::string> exceptions_;
};

namespace detail {

inline constexpr std::string_view kBundledTagLexicon = R"LEX(
# Default part-of-speech lexicon: word<TAB>TAG, one entry per line.
# Exact entries take precedence over the -est/-er/-ly suffix rules.

# WDT
which	WDT
that	WDT
whichever	WDT
whatever	WDT

# PRP
it	PRP
they	PRP
them	PRP
this	PRP
these	PRP
those	PRP
he	PRP
she	PRP
we	PRP
us	PRP
you	PRP
i	PRP
its	PRP
their	PRP
our	PRP

# DT
the	DT
a	DT
an	DT
each	DT
every	DT
all	DT
any	DT
some	DT
no	DT
both	DT
either	DT
neither	DT
another	DT

# MD
shall	MD
should	MD
must	MD
will	MD
would	MD
may	MD
might	MD
can	MD
could	MD

# VB
be	VB
is	VB
are	VB
was	VB
were	VB
been	VB
being	VB
have	VB
has	VB
had	VB
do	VB
does	VB
did	VB
provide	VB
provides	VB
allow	VB
allows	VB
support	VB
supports	VB
display	VB
displays	VB
store	VB
stores	VB
use	VB
record	VB
records	VB
send	VB
sends	VB
receive	VB
receives	VB
stop	VB
stops	VB
run	VB
runs	VB
generate	VB
generates	VB
create	VB
creates	VB
update	VB
updates	VB
save	VB
saves	VB
log	VB
logs	VB
show	VB
shows	VB
enter	VB

# IN
in	IN
on	IN
at	IN
by	IN
for	IN
with	IN
within	IN
from	IN
to	IN
of	IN
as	IN
into	IN
about	IN
after	IN
before	IN
during	IN
under	IN
over	IN
via	IN
per	IN
than	IN
if	IN
without	IN
between	IN
through	IN
upon	IN
whether	IN
until	IN
unless	IN
while	IN
because	IN

# CC
and	CC
or	CC
but	CC
nor	CC
so	CC

# RB
not	RB
never	RB
almost	RB
always	RB
also	RB
very	RB
too	RB
often	RB
however	RB
rather	RB
further	RB
ever	RB
together	RB

# JJ
good	JJ
bad	JJ
easy	JJ
fast	JJ
slow	JJ
flexible	JJ
appropriate	JJ
intuitive	JJ
user-friendly	JJ
efficient	JJ
effective	JJ
simple	JJ
adequate	JJ
sufficient	JJ
significant	JJ
minimal	JJ
maximal	JJ
optimal	JJ
robust	JJ
reliable	JJ
possible	JJ
available	JJ
secure	JJ
large	JJ
small	JJ
high	JJ
low	JJ
new	JJ
clear	JJ
quick	JJ
normal	JJ
cost-effective	JJ
proper	JJ

# JJR
better	JJR
worse	JJR
more	JJR
less	JJR

# JJS
best	JJS
worst	JJS
most	JJS
least	JJS

# OTHER
whenever	OTHER
wherever	OTHER

[exceptions]
# Words exempt from suffix rules.
user
server
computer
number
order
other
filter
buffer
customer
manager
parameter
header
footer
folder
layer
member
owner
printer
scanner
timer
counter
master
water
power
center
meter
cluster
container
browser
partner
sender
receiver
identifier
character
letter
paper
provider
controller
driver
register
trigger
deliver
consider
render
transfer
cover
offer
answer
gather
test
request
interest
rest
suggest
guest
ingest
digest
manifest
apply
supply
reply
family
assembly
anomaly
only
early
likely
)LEX";

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline bool is_numeric(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

} // namespace detail

inline const TagLexicon& TagLexicon::bundled() {
  static const TagLexicon lex = parse(detail::kBundledTagLexicon, "<bundled tags>");
  return lex;
}

/// Tag for one lowercased token. Precedence: exact lexicon entry, then
/// punctuation and numerals, then the suffix rules (-est JJS, -er JJR, -ly RB;
/// skipped for exception words and for words of length <= 3), then NN.
inline Tag tag_word(std::string_view lower, const TagLexicon& lexicon) {
  if (auto t = lexicon.lookup(lower)) return *t;
  if (is_punct_token(lower)) return Tag::PUNCT;
  if (detail::is_numeric(lower)) return Tag::CD;
  if (lower.size() > 3 && !lexicon.is_exception(lower)) {
    if (detail::ends_with(lower, "est")) return Tag::JJS;
    if (detail::ends_with(lower, "er")) return Tag::JJR;
    if (detail::ends_with(lower, "ly")) return Tag::RB;
  }
  return Tag::NN;
}

inline std::vector<Token> tag(std::vector<Token> tokens, const TagLexicon& lexicon = TagLexicon::bundled()) {
  for (auto& t : tokens) t.tag = tag_word(t.lower, lexicon);
  return tokens;
}

/// tokenize followed by tag.
inline std::vector<Token> analyze(std::string_view text, const TagLexicon& lexicon = TagLexicon::bundled()) {
  return tag(tokenize(text), lexicon);
}

} // namespace reqsmell
