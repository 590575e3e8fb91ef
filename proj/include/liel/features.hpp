#pragma once

/// \file features.hpp
/// Non-lexical feature functions over candidate tuples.
///
/// Every feature compares text or structure of the input document with text
/// or structure of a KB entry; none reads a word list other than the
/// optional stop-word resource. Mention-entity features are computed per
/// (mention, candidate); entity-entity features per consecutive pair of
/// assignments. A tuple's vector sums real-valued features and ANDs boolean
/// ones across mentions.
///
/// Thread-safety: a FeatureExtractor may be shared between threads; entity
/// profiles are built lazily under per-entity once-flags.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "liel/document.hpp"
#include "liel/error.hpp"
#include "liel/kb_store.hpp"
#include "liel/segmenter.hpp"
#include "liel/text_vsm.hpp"
#include "liel/unicode.hpp"

namespace liel {

using FeatureVector = std::vector<double>;

enum class Aggregation { kSum, kAnd };
enum class FeatureScope { kMention, kPair };

struct FeatureSpec {
  std::string_view name;
  FeatureScope scope;
  Aggregation aggregation;
};

namespace feature {
enum Index : std::size_t {
  kCosTextText,
  kCosTextContext,
  kCosContextText,
  kCosContextContext,
  kCosTopText,
  kCosTopContext,
  kCategoryFreqText,
  kCategoryFreqContext,
  kInlinkFreqText,
  kInlinkFreqContext,
  kOutlinkFreqText,
  kOutlinkFreqContext,
  kRedirectFreqText,
  kRedirectFreqContext,
  kNilFrequency,
  kExactMatch,
  kMatchAll,
  kMatchAcronym,
  kLinkPrior,
  kOutlinkOverlap,
  kInlinkOverlap,
  kCategoryPmi,
  kCategoricalRelation,
  kTitleCooccurrence,
  kCount
};
}  // namespace feature

inline constexpr std::array<FeatureSpec, feature::kCount> kFeatureSpecs = {{
    {"cos_text_text", FeatureScope::kMention, Aggregation::kSum},
    {"cos_text_context", FeatureScope::kMention, Aggregation::kSum},
    {"cos_context_text", FeatureScope::kMention, Aggregation::kSum},
    {"cos_context_context", FeatureScope::kMention, Aggregation::kSum},
    {"cos_top_text", FeatureScope::kMention, Aggregation::kSum},
    {"cos_top_context", FeatureScope::kMention, Aggregation::kSum},
    {"category_freq_text", FeatureScope::kMention, Aggregation::kSum},
    {"category_freq_context", FeatureScope::kMention, Aggregation::kSum},
    {"inlink_freq_text", FeatureScope::kMention, Aggregation::kSum},
    {"inlink_freq_context", FeatureScope::kMention, Aggregation::kSum},
    {"outlink_freq_text", FeatureScope::kMention, Aggregation::kSum},
    {"outlink_freq_context", FeatureScope::kMention, Aggregation::kSum},
    {"redirect_freq_text", FeatureScope::kMention, Aggregation::kSum},
    {"redirect_freq_context", FeatureScope::kMention, Aggregation::kSum},
    {"nil_frequency", FeatureScope::kMention, Aggregation::kSum},
    {"exact_match", FeatureScope::kMention, Aggregation::kAnd},
    {"match_all", FeatureScope::kMention, Aggregation::kAnd},
    {"match_acronym", FeatureScope::kMention, Aggregation::kAnd},
    {"link_prior", FeatureScope::kMention, Aggregation::kSum},
    {"outlink_overlap", FeatureScope::kPair, Aggregation::kSum},
    {"inlink_overlap", FeatureScope::kPair, Aggregation::kSum},
    {"category_pmi", FeatureScope::kPair, Aggregation::kSum},
    {"categorical_relation_frequency", FeatureScope::kPair, Aggregation::kSum},
    {"title_cooccurrence", FeatureScope::kPair, Aggregation::kSum},
}};

/// Ordered feature names; the model's weight vector is aligned to it.
class FeatureRegistry {
 public:
  FeatureRegistry() = default;
  explicit FeatureRegistry(std::vector<std::string> names) : names_(std::move(names)) {
    std::set<std::string_view> seen;
    for (const auto& n : names_) {
      if (!seen.insert(n).second) throw InputError("duplicate feature name '" + n + "'");
    }
  }

  static FeatureRegistry standard() {
    std::vector<std::string> names;
    for (const auto& spec : kFeatureSpecs) names.emplace_back(spec.name);
    return FeatureRegistry(std::move(names));
  }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  bool operator==(const FeatureRegistry&) const = default;

 private:
  std::vector<std::string> names_;
};

// ---------------------------------------------------------------------------
// Category PMI

struct PmiTable {
  /// unordered category pair, stored with first <= second
  std::map<std::pair<std::string, std::string>, double> pair_scores;
  std::map<std::string, std::uint64_t> category_counts;
  std::set<std::string> blacklist;

  static std::pair<std::string, std::string> key(std::string_view a, std::string_view b) {
    if (b < a) std::swap(a, b);
    return {std::string(a), std::string(b)};
  }

  double score(std::string_view a, std::string_view b) const {
    auto it = pair_scores.find(key(a, b));
    return it == pair_scores.end() ? 0.0 : it->second;
  }

  bool operator==(const PmiTable&) const = default;
};

inline nlohmann::json pmi_to_json(const PmiTable& t) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [k, v] : t.pair_scores) pairs.push_back({k.first, k.second, v});
  return {{"pairs", pairs}, {"category_counts", t.category_counts}, {"blacklist", t.blacklist}};
}

inline PmiTable pmi_from_json(const nlohmann::json& j) {
  PmiTable t;
  for (const auto& p : j.at("pairs")) {
    t.pair_scores[PmiTable::key(p.at(0).get<std::string>(), p.at(1).get<std::string>())] =
        p.at(2).get<double>();
  }
  t.category_counts = j.at("category_counts").get<std::map<std::string, std::uint64_t>>();
  t.blacklist = j.at("blacklist").get<std::set<std::string>>();
  return t;
}

/// PMI over categories of consecutive gold entities. Counts run over gold
/// entity occurrences; categories attached to more than
/// `blacklist_threshold` of them are dropped first. The score of an
/// unordered pair {a, b} is (#consecutive (a,b) + #consecutive (b,a)) /
/// (count(a) * count(b)).
inline PmiTable train_pmi(std::span<const CandidateTuple> gold, const KbStore& kb,
                          double blacklist_threshold = 0.05) {
  PmiTable table;
  std::map<std::string, std::uint64_t> raw_counts;
  std::uint64_t occurrences = 0;
  auto entry_of = [&](const Candidate& c) -> const KbEntry* {
    return c.is_nil() ? nullptr : kb.find(c.entity_id);
  };
  for (const auto& t : gold) {
    for (const auto& c : t.assignments) {
      const KbEntry* e = entry_of(c);
      if (!e) continue;
      ++occurrences;
      for (const auto& cat : e->categories) ++raw_counts[cat];
    }
  }
  for (const auto& [cat, n] : raw_counts) {
    if (static_cast<double>(n) > blacklist_threshold * static_cast<double>(occurrences)) {
      table.blacklist.insert(cat);
    } else {
      table.category_counts[cat] = n;
    }
  }
  std::map<std::pair<std::string, std::string>, std::uint64_t> pair_counts;
  for (const auto& t : gold) {
    for (std::size_t j = 0; j + 1 < t.assignments.size(); ++j) {
      const KbEntry* a = entry_of(t.assignments[j]);
      const KbEntry* b = entry_of(t.assignments[j + 1]);
      if (!a || !b) continue;
      for (const auto& ca : a->categories) {
        if (table.blacklist.contains(ca)) continue;
        for (const auto& cb : b->categories) {
          if (table.blacklist.contains(cb)) continue;
          ++pair_counts[PmiTable::key(ca, cb)];
        }
      }
    }
  }
  for (const auto& [k, n] : pair_counts) {
    const double denom = static_cast<double>(table.category_counts[k.first]) *
                         static_cast<double>(table.category_counts[k.second]);
    if (denom == 0.0) continue;
    table.pair_scores[k] = static_cast<double>(n) / denom;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Precomputed views

/// Token sequence with a first-token position index for contiguous matching.
class TokenSequence {
 public:
  TokenSequence() = default;
  explicit TokenSequence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) positions_[tokens_[i]].push_back(i);
  }

  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Occurrences of `seq` as a contiguous run.
  std::size_t count(std::span<const std::string> seq) const {
    std::size_t n = 0;
    for_each_match(seq, [&](std::size_t) {
      ++n;
      return true;
    });
    return n;
  }

  std::optional<std::size_t> first(std::span<const std::string> seq) const {
    std::optional<std::size_t> found;
    for_each_match(seq, [&](std::size_t pos) {
      found = pos;
      return false;
    });
    return found;
  }

 private:
  template <class F>
  void for_each_match(std::span<const std::string> seq, F&& f) const {
    if (seq.empty()) return;
    auto it = positions_.find(seq.front());
    if (it == positions_.end()) return;
    for (std::size_t pos : it->second) {
      if (pos + seq.size() > tokens_.size()) break;
      if (std::equal(seq.begin(), seq.end(), tokens_.begin() + static_cast<std::ptrdiff_t>(pos))) {
        if (!f(pos)) return;
      }
    }
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::vector<std::size_t>> positions_;
};

struct FeatureConfig {
  std::size_t window = 100;
  std::size_t top_n = 200;
  StopWords stopwords;
};

inline std::vector<std::string> filtered_tokens(const TokenStream& tokens,
                                                const StopWords& stopwords) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (!stopwords.contains(t.text)) out.push_back(t.text);
  }
  return out;
}

inline std::vector<std::string> filtered_tokens(std::string_view text,
                                                const StopWords& stopwords) {
  return filtered_tokens(tokenize(text), stopwords);
}

/// True when the surface has at least one uppercase letter and no lowercase.
inline bool is_all_caps(std::string_view s) {
  bool upper = false;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::int32_t c = unicode::next_code_point(s, pos);
    if (unicode::is_lower(c)) return false;
    if (unicode::is_upper(c)) upper = true;
  }
  return upper;
}

/// First code point of every token, concatenated.
inline std::string initials(std::string_view name) {
  std::string out;
  for (const auto& t : tokenize(name)) {
    std::size_t pos = 0;
    unicode::next_code_point(t.text, pos);
    out.append(t.text, 0, pos);
  }
  return out;
}

struct MentionView {
  std::string normalized;
  std::vector<std::string> tokens;  // unfiltered, for locating m in W(e)
  std::string acronym_key;          // concatenated tokens when all-caps, else empty
  TermVector context;
  TokenSequence context_seq;
};

/// Per-document state shared by all mentions: Text(m) and Context(m).
class DocumentView {
 public:
  DocumentView(const MentionDocument& doc, const FeatureConfig& config) : doc_(&doc) {
    tokens_ = tokenize(doc.text);
    text_ = term_frequencies(tokens_, 0, tokens_.size(), config.stopwords);
    text_seq_ = TokenSequence(filtered_tokens(tokens_, config.stopwords));
    const std::size_t half = config.window / 2;
    for (const auto& m : doc.mentions) {
      MentionView v;
      v.normalized = unicode::normalize_name(m.surface);
      v.tokens = token_texts(m.surface);
      if (is_all_caps(m.surface)) {
        for (const auto& t : v.tokens) v.acronym_key += t;
      }
      const std::size_t anchor = token_at(tokens_, m.start);
      v.context = context_window(tokens_, anchor, config.window, config.stopwords);
      const std::size_t begin = anchor > half ? anchor - half : 0;
      const std::size_t end = std::min(tokens_.size(), anchor + half);
      TokenStream window(tokens_.begin() + static_cast<std::ptrdiff_t>(begin),
                         tokens_.begin() + static_cast<std::ptrdiff_t>(std::max(begin, end)));
      v.context_seq = TokenSequence(filtered_tokens(window, config.stopwords));
      mentions_.push_back(std::move(v));
    }
  }

  const MentionDocument& document() const { return *doc_; }
  const TokenStream& tokens() const { return tokens_; }
  const TermVector& text() const { return text_; }
  const TokenSequence& text_sequence() const { return text_seq_; }
  const MentionView& mention(std::size_t i) const { return mentions_.at(i); }

 private:
  const MentionDocument* doc_;
  TokenStream tokens_;
  TermVector text_;
  TokenSequence text_seq_;
  std::vector<MentionView> mentions_;
};

/// Per-entity state: Text(W(e)), Top(W(e)) and the I(l, e) name lists.
struct EntityProfile {
  TokenStream tokens;
  TokenSequence raw_sequence;  // unfiltered tokens of W(e)
  TermVector text;
  TermVector top;
  // categories, inlinks, outlinks, redirects: stop-word-filtered token runs
  std::array<std::vector<std::vector<std::string>>, 4> names;
  std::vector<std::set<std::string>> category_token_sets;
  std::set<std::string> title_token_set;
  std::string normalized_title;
  std::set<std::string> normalized_redirects;
  std::set<std::string> acronyms;
};

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) {
      ++common;
      ++ia;
      ++ib;
    } else if (*ia < *ib) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

// ---------------------------------------------------------------------------

/// Combines per-mention and per-pair partial vectors into a tuple vector.
/// Shared by the direct and cached paths so both produce identical bits.
inline FeatureVector combine_partials(std::span<const FeatureVector* const> mention_parts,
                                      std::span<const FeatureVector* const> pair_parts) {
  FeatureVector out(feature::kCount, 0.0);
  std::array<bool, feature::kCount> all{};
  all.fill(true);
  for (const FeatureVector* part : mention_parts) {
    for (std::size_t j = 0; j < feature::kCount; ++j) {
      if (kFeatureSpecs[j].aggregation == Aggregation::kAnd) {
        all[j] = all[j] && (*part)[j] != 0.0;
      } else {
        out[j] += (*part)[j];
      }
    }
  }
  for (const FeatureVector* part : pair_parts) {
    for (std::size_t j = 0; j < feature::kCount; ++j) {
      if (kFeatureSpecs[j].scope == FeatureScope::kPair) out[j] += (*part)[j];
    }
  }
  for (std::size_t j = 0; j < feature::kCount; ++j) {
    if (kFeatureSpecs[j].aggregation == Aggregation::kAnd) {
      out[j] = (all[j] && !mention_parts.empty()) ? 1.0 : 0.0;
    }
  }
  return out;
}

class FeatureExtractor {
 public:
  FeatureExtractor(const KbStore& kb, const PmiTable& pmi, FeatureConfig config)
      : kb_(&kb),
        pmi_(&pmi),
        config_(std::move(config)),
        once_(std::make_unique<std::once_flag[]>(kb.entries().size())),
        profiles_(kb.entries().size()) {
    if (config_.window == 0 || config_.window % 2 != 0) {
      throw ConfigError("context window must be a positive even number");
    }
    if (config_.top_n == 0) throw ConfigError("top-n must be positive");
  }

  const FeatureConfig& config() const { return config_; }
  const KbStore& kb() const { return *kb_; }
  const PmiTable& pmi() const { return *pmi_; }
  FeatureRegistry registry() const { return FeatureRegistry::standard(); }

  DocumentView view(const MentionDocument& doc) const { return DocumentView(doc, config_); }

  /// Profile of a KB entity, or nullptr when the id is not in the KB.
  const EntityProfile* profile(std::string_view id) const {
    const auto pos = kb_->position(id);
    if (!pos) return nullptr;
    std::call_once(once_[*pos], [&] { profiles_[*pos] = build_profile(kb_->entries()[*pos]); });
    return profiles_[*pos].get();
  }

  /// Features of one mention/candidate pair; pair-scope entries are 0.
  FeatureVector mention_entity(const DocumentView& doc, std::size_t mention,
                               const Candidate& c) const {
    FeatureVector f(feature::kCount, 0.0);
    if (c.is_nil()) {
      f[feature::kNilFrequency] = 1.0;
      return f;
    }
    f[feature::kLinkPrior] = c.link_prior;
    const EntityProfile* p = profile(c.entity_id);
    if (!p) return f;
    const MentionView& m = doc.mention(mention);

    // Window around the first occurrence of m in W(e); without one, the
    // first `window` tokens of the page.
    std::size_t anchor = config_.window / 2;
    if (auto first = p->raw_sequence.first(m.tokens)) anchor = *first;
    const TermVector entity_context =
        context_window(p->tokens, anchor, config_.window, config_.stopwords);

    f[feature::kCosTextText] = cosine(p->text, doc.text());
    f[feature::kCosTextContext] = cosine(p->text, m.context);
    f[feature::kCosContextText] = cosine(entity_context, doc.text());
    f[feature::kCosContextContext] = cosine(entity_context, m.context);
    f[feature::kCosTopText] = cosine(p->top, doc.text());
    f[feature::kCosTopContext] = cosine(p->top, m.context);

    static constexpr std::array<std::pair<feature::Index, feature::Index>, 4> kFreq = {{
        {feature::kCategoryFreqText, feature::kCategoryFreqContext},
        {feature::kInlinkFreqText, feature::kInlinkFreqContext},
        {feature::kOutlinkFreqText, feature::kOutlinkFreqContext},
        {feature::kRedirectFreqText, feature::kRedirectFreqContext},
    }};
    for (std::size_t l = 0; l < kFreq.size(); ++l) {
      std::size_t in_text = 0;
      std::size_t in_context = 0;
      for (const auto& name : p->names[l]) {
        in_text += doc.text_sequence().count(name);
        in_context += m.context_seq.count(name);
      }
      f[kFreq[l].first] = static_cast<double>(in_text);
      f[kFreq[l].second] = static_cast<double>(in_context);
    }

    f[feature::kExactMatch] = p->normalized_redirects.contains(m.normalized) ? 1.0 : 0.0;
    f[feature::kMatchAll] =
        (!m.normalized.empty() && m.normalized == p->normalized_title) ? 1.0 : 0.0;
    f[feature::kMatchAcronym] =
        (!m.acronym_key.empty() && p->acronyms.contains(m.acronym_key)) ? 1.0 : 0.0;
    return f;
  }

  /// Coherence features of two consecutive assignments; mention-scope
  /// entries are 0.
  FeatureVector entity_entity(const Candidate& a, const Candidate& b) const {
    FeatureVector f(feature::kCount, 0.0);
    if (a.is_nil() || b.is_nil()) return f;
    f[feature::kOutlinkOverlap] =
        jaccard(kb_->outlink_targets(a.entity_id), kb_->outlink_targets(b.entity_id));
    f[feature::kInlinkOverlap] = jaccard(kb_->inlinks(a.entity_id), kb_->inlinks(b.entity_id));
    f[feature::kTitleCooccurrence] =
        static_cast<double>(kb_->link_count(a.entity_id, b.entity_id) +
                            kb_->link_count(b.entity_id, a.entity_id));
    const KbEntry* ea = kb_->find(a.entity_id);
    const KbEntry* eb = kb_->find(b.entity_id);
    if (!ea || !eb) return f;
    double pmi = 0.0;
    for (const auto& ca : ea->categories) {
      for (const auto& cb : eb->categories) pmi += pmi_->score(ca, cb);
    }
    f[feature::kCategoryPmi] = pmi;
    const EntityProfile* pa = profile(a.entity_id);
    const EntityProfile* pb = profile(b.entity_id);
    std::size_t relations = 0;
    for (const auto& cats : pa->category_token_sets) {
      if (jaccard(cats, pb->title_token_set) >= 0.5) ++relations;
    }
    for (const auto& cats : pb->category_token_sets) {
      if (jaccard(cats, pa->title_token_set) >= 0.5) ++relations;
    }
    f[feature::kCategoricalRelation] = static_cast<double>(relations);
    return f;
  }

  FeatureVector tuple_features(const CandidateTuple& t, const ConnectedComponent& c,
                               const DocumentView& doc) const {
    if (t.assignments.size() != c.mentions.size()) {
      throw InputError("tuple arity " + std::to_string(t.assignments.size()) +
                       " does not match component size " +
                       std::to_string(c.mentions.size()));
    }
    std::vector<FeatureVector> mention_parts;
    std::vector<FeatureVector> pair_parts;
    for (std::size_t i = 0; i < t.assignments.size(); ++i) {
      mention_parts.push_back(mention_entity(doc, c.mentions[i], t.assignments[i]));
      if (i > 0) pair_parts.push_back(entity_entity(t.assignments[i - 1], t.assignments[i]));
    }
    std::vector<const FeatureVector*> mp;
    std::vector<const FeatureVector*> pp;
    for (const auto& v : mention_parts) mp.push_back(&v);
    for (const auto& v : pair_parts) pp.push_back(&v);
    return combine_partials(mp, pp);
  }

 private:
  EntityProfile build_profile_value(const KbEntry& e) const {
    EntityProfile p;
    p.tokens = tokenize(e.text);
    std::vector<std::string> raw;
    raw.reserve(p.tokens.size());
    for (const auto& t : p.tokens) raw.push_back(t.text);
    p.raw_sequence = TokenSequence(std::move(raw));
    p.text = term_frequencies(p.tokens, 0, p.tokens.size(), config_.stopwords);
    p.top = top_terms(p.text, config_.top_n);

    auto add_name = [&](std::size_t relation, std::string_view name) {
      auto seq = filtered_tokens(name, config_.stopwords);
      if (!seq.empty()) p.names[relation].push_back(std::move(seq));
    };
    for (const auto& c : e.categories) {
      add_name(0, c);
      auto seq = filtered_tokens(c, config_.stopwords);
      p.category_token_sets.emplace_back(seq.begin(), seq.end());
    }
    for (const auto& id : kb_->inlinks(e.id)) {
      if (const KbEntry* src = kb_->find(id)) add_name(1, src->title);
    }
    for (const auto& id : kb_->outlink_targets(e.id)) {
      if (const KbEntry* dst = kb_->find(id)) add_name(2, dst->title);
    }
    for (const auto& r : e.redirects) add_name(3, r);

    auto title_seq = filtered_tokens(e.title, config_.stopwords);
    p.title_token_set = std::set<std::string>(title_seq.begin(), title_seq.end());
    p.normalized_title = unicode::normalize_name(e.title);
    for (const auto& r : e.redirects) {
      auto n = unicode::normalize_name(r);
      if (!n.empty()) p.normalized_redirects.insert(std::move(n));
    }
    if (auto a = initials(e.title); !a.empty()) p.acronyms.insert(std::move(a));
    for (const auto& r : e.redirects) {
      if (auto a = initials(r); !a.empty()) p.acronyms.insert(std::move(a));
    }
    return p;
  }

  std::unique_ptr<EntityProfile> build_profile(const KbEntry& e) const {
    return std::make_unique<EntityProfile>(build_profile_value(e));
  }

  const KbStore* kb_;
  const PmiTable* pmi_;
  FeatureConfig config_;
  std::unique_ptr<std::once_flag[]> once_;
  mutable std::vector<std::unique_ptr<EntityProfile>> profiles_;
};

}  // namespace liel
