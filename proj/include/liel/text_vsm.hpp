#pragma once

/// \file text_vsm.hpp
/// Tokenization and sparse term-frequency vectors.
///
/// Tokens are maximal runs of letters, digits and combining marks within one
/// script; characters of unsegmented scripts (Han, kana, bopomofo) become
/// single-character tokens. Token text is case-folded. Weighting is raw term
/// frequency, so vectors depend only on the text itself.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liel/unicode.hpp"

namespace liel {

struct Token {
  std::string text;     ///< case-folded surface
  std::size_t offset;   ///< byte offset of the first code point in the source
  std::size_t length;   ///< byte length in the source
  std::size_t end() const { return offset + length; }
};

using TokenStream = std::vector<Token>;
using StopWords = std::set<std::string, std::less<>>;

inline TokenStream tokenize(std::string_view text) {
  TokenStream tokens;
  std::size_t pos = 0;
  std::size_t token_start = 0;
  bool in_token = false;
  int token_script = 0;  // USCRIPT_COMMON until a specific script is seen

  auto flush = [&](std::size_t end) {
    if (in_token) {
      tokens.push_back(
          {unicode::fold_case(text.substr(token_start, end - token_start)),
           token_start, end - token_start});
      in_token = false;
    }
  };

  while (pos < text.size()) {
    const std::size_t start = pos;
    const std::int32_t c = unicode::next_code_point(text, pos);
    if (unicode::is_unsegmented(c)) {
      flush(start);
      tokens.push_back({unicode::fold_case(text.substr(start, pos - start)),
                        start, pos - start});
      continue;
    }
    if (!unicode::is_word_char(c)) {
      flush(start);
      continue;
    }
    const int script = unicode::script_of(c);
    if (in_token && script != 0 && token_script != 0 &&
        script != token_script) {
      flush(start);
    }
    if (!in_token) {
      in_token = true;
      token_start = start;
      token_script = script;
    } else if (token_script == 0) {
      token_script = script;
    }
  }
  flush(text.size());
  return tokens;
}

/// Token texts only, in order.
inline std::vector<std::string> token_texts(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.text));
  return out;
}

/// Reads a stop-word resource: one token per line, folded like tokens.
inline StopWords read_stopwords(std::istream& in) {
  StopWords words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& t : tokenize(line)) words.insert(std::move(t.text));
  }
  return words;
}

/// Sparse non-negative term weights. Zero weights are never stored.
class TermVector {
 public:
  using Map = std::map<std::string, double, std::less<>>;

  TermVector() = default;

  void add(std::string_view term, double weight) {
    if (weight == 0.0) return;
    auto it = weights_.find(term);
    if (it == weights_.end()) {
      weights_.emplace(std::string(term), weight);
    } else {
      it->second += weight;
    }
  }

  double weight(std::string_view term) const {
    auto it = weights_.find(term);
    return it == weights_.end() ? 0.0 : it->second;
  }

  bool empty() const { return weights_.empty(); }
  std::size_t size() const { return weights_.size(); }
  const Map& weights() const { return weights_; }

  TermVector scaled(double factor) const {
    TermVector out;
    for (const auto& [term, w] : weights_) out.add(term, w * factor);
    return out;
  }

  bool operator==(const TermVector&) const = default;

 private:
  Map weights_;
};

/// Term frequencies over `tokens[begin, end)`, skipping stop words.
inline TermVector term_frequencies(const TokenStream& tokens, std::size_t begin,
                                   std::size_t end, const StopWords& stopwords) {
  TermVector v;
  end = std::min(end, tokens.size());
  for (std::size_t i = begin; i < end; ++i) {
    if (!stopwords.contains(tokens[i].text)) v.add(tokens[i].text, 1.0);
  }
  return v;
}

inline TermVector text_vector(std::string_view text,
                              const StopWords& stopwords = {}) {
  const TokenStream tokens = tokenize(text);
  return term_frequencies(tokens, 0, tokens.size(), stopwords);
}

/// Keeps the `n` highest-weight terms; ties go to the lexicographically
/// smaller term.
inline TermVector top_terms(const TermVector& v, std::size_t n) {
  if (v.size() <= n) return v;
  std::vector<std::pair<std::string_view, double>> ranked(v.weights().begin(),
                                                          v.weights().end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  TermVector out;
  for (std::size_t i = 0; i < n; ++i) out.add(ranked[i].first, ranked[i].second);
  return out;
}

inline TermVector top_vector(std::string_view text, std::size_t n,
                             const StopWords& stopwords = {}) {
  return top_terms(text_vector(text, stopwords), n);
}

/// Index of the token covering byte `offset`, or of the first token after
/// it. Returns tokens.size() when no token ends past `offset`.
inline std::size_t token_at(const TokenStream& tokens, std::size_t offset) {
  auto it = std::lower_bound(
      tokens.begin(), tokens.end(), offset,
      [](const Token& t, std::size_t off) { return t.end() <= off; });
  return static_cast<std::size_t>(it - tokens.begin());
}

/// Term frequencies of the window/2 tokens before the anchor token and the
/// window/2 tokens starting at it.
inline TermVector context_window(const TokenStream& tokens,
                                 std::size_t anchor_token, std::size_t window,
                                 const StopWords& stopwords = {}) {
  const std::size_t half = window / 2;
  const std::size_t begin = anchor_token > half ? anchor_token - half : 0;
  return term_frequencies(tokens, begin, anchor_token + half, stopwords);
}

inline TermVector context_vector(std::string_view text, std::size_t anchor_offset,
                                 std::size_t window = 100,
                                 const StopWords& stopwords = {}) {
  const TokenStream tokens = tokenize(text);
  return context_window(tokens, token_at(tokens, anchor_offset), window,
                        stopwords);
}

/// Cosine similarity in [0, 1]; 0 when either side is empty.
inline double cosine(const TermVector& a, const TermVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0;
  auto ia = a.weights().begin();
  auto ib = b.weights().begin();
  while (ia != a.weights().end() && ib != b.weights().end()) {
    const int cmp = ia->first.compare(ib->first);
    if (cmp == 0) {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    } else if (cmp < 0) {
      ++ia;
    } else {
      ++ib;
    }
  }
  auto norm = [](const TermVector& v) {
    double s = 0.0;
    for (const auto& [term, w] : v.weights()) s += w * w;
    return std::sqrt(s);
  };
  const double denom = norm(a) * norm(b);
  if (denom == 0.0) return 0.0;
  return std::clamp(dot / denom, 0.0, 1.0);
}

}  // namespace liel
