#pragma once

/// \file kb_store.hpp
/// Knowledge-base ingestion and the anchor-title index.
///
/// `build_index` turns a stream of KB records into a `KbStore`: the records
/// themselves (sorted by id) plus an `AnchorIndex` mapping every normalized
/// hyperlink anchor to the entities it links to, with occurrence counts.
/// Inlinks and the alias maps are derived at build time. A built store is
/// immutable and safe to share between threads.
///
/// Thread-safety: construction is single-threaded; all const members may be
/// called concurrently.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <cereal/archives/binary.hpp>
#include <cereal/types/map.hpp>
#include <cereal/types/set.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>

#include "json.hpp"
#include "liel/error.hpp"
#include "liel/text_vsm.hpp"
#include "liel/unicode.hpp"

namespace liel {

/// Reserved entity id for "not in the KB". Rejected in KB input.
inline constexpr std::string_view kNilId = "NIL";

struct Outlink {
  std::string anchor;
  std::string target;

  bool operator==(const Outlink&) const = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(anchor, target);
  }
};

struct KbEntry {
  std::string id;
  std::string title;
  std::string text;
  std::set<std::string> categories;
  std::vector<Outlink> outlinks;
  std::set<std::string> redirects;

  bool operator==(const KbEntry&) const = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(id, title, text, categories, outlinks, redirects);
  }
};

struct Posting {
  std::string entity_id;
  std::uint64_t count = 0;

  bool operator==(const Posting&) const = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(entity_id, count);
  }
};

struct AnchorIndex {
  /// normalized anchor -> postings, count descending then id ascending
  std::map<std::string, std::vector<Posting>> postings;
  std::uint64_t entry_count = 0;
  std::map<std::string, std::set<std::string>> inlinks;
  /// normalized redirect -> entity id
  std::map<std::string, std::string> redirect_map;
  /// normalized title -> entity id
  std::map<std::string, std::string> title_map;
  std::uint64_t dangling_links = 0;
  std::uint32_t max_candidates = 40;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(postings, entry_count, inlinks, redirect_map, title_map, dangling_links,
       max_candidates);
  }
};

struct IndexConfig {
  std::uint32_t max_candidates = 40;
};

struct Candidate {
  std::string entity_id;
  double link_prior = 0.0;

  bool is_nil() const { return entity_id == kNilId; }
  bool operator==(const Candidate&) const = default;

  static Candidate nil() { return {std::string(kNilId), 0.0}; }
};

// ---------------------------------------------------------------------------
// KB record parsing

inline KbEntry parse_kb_record(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("KB record is not an object");
  KbEntry e;
  try {
    e.id = j.at("id").get<std::string>();
    e.title = j.value("title", std::string());
    e.text = j.value("text", std::string());
    if (j.contains("categories")) {
      for (const auto& c : j.at("categories")) e.categories.insert(c.get<std::string>());
    }
    if (j.contains("links")) {
      for (const auto& l : j.at("links")) {
        e.outlinks.push_back(
            {l.at("anchor").get<std::string>(), l.at("target").get<std::string>()});
      }
    }
    if (j.contains("redirects")) {
      for (const auto& r : j.at("redirects")) e.redirects.insert(r.get<std::string>());
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("malformed KB record: ") + ex.what());
  }
  if (e.id.empty()) throw InputError("KB record with empty id");
  if (e.id == kNilId) {
    throw InputError("KB id '" + e.id + "' is reserved for NIL");
  }
  return e;
}

inline nlohmann::json kb_record_to_json(const KbEntry& e) {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : e.outlinks) {
    links.push_back({{"anchor", l.anchor}, {"target", l.target}});
  }
  return {{"id", e.id},
          {"title", e.title},
          {"text", e.text},
          {"categories", e.categories},
          {"links", links},
          {"redirects", e.redirects}};
}

inline std::vector<KbEntry> read_kb(std::istream& in) {
  std::vector<KbEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_kb_record(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw InputError("KB line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const InputError& ex) {
      throw InputError("KB line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

inline std::vector<KbEntry> read_kb_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read KB file " + path);
  return read_kb(in);
}

// ---------------------------------------------------------------------------

class KbStore {
 public:
  static constexpr std::array<char, 8> kMagic = {'L', 'I', 'E', 'L', 'I', 'D', 'X', '\0'};
  static constexpr std::uint32_t kFormatVersion = 1;

  /// `entries` must be sorted by id and consistent with `index`; use
  /// build_index() or load() rather than calling this directly.
  KbStore(std::vector<KbEntry> entries, AnchorIndex index)
      : entries_(std::move(entries)), index_(std::move(index)) {
    derive();
  }

  // Derived lookups point into index_, so copies rebuild them.
  KbStore(const KbStore& other) : entries_(other.entries_), index_(other.index_) { derive(); }
  KbStore(KbStore&&) noexcept = default;
  KbStore& operator=(const KbStore& other) {
    if (this != &other) *this = KbStore(other);
    return *this;
  }
  KbStore& operator=(KbStore&&) noexcept = default;

  const AnchorIndex& index() const { return index_; }
  std::span<const KbEntry> entries() const { return entries_; }

  const KbEntry* find(std::string_view id) const {
    auto it = positions_.find(std::string(id));
    return it == positions_.end() ? nullptr : &entries_[it->second];
  }

  std::optional<std::size_t> position(std::string_view id) const {
    auto it = positions_.find(std::string(id));
    if (it == positions_.end()) return std::nullopt;
    return it->second;
  }

  /// Entity id for a title or redirect string, after normalization.
  std::optional<std::string> resolve_redirect(std::string_view name) const {
    return resolve_alias(index_, name);
  }

  static std::optional<std::string> resolve_alias(const AnchorIndex& index,
                                                  std::string_view name) {
    const std::string key = unicode::normalize_name(name);
    if (auto it = index.title_map.find(key); it != index.title_map.end()) {
      return it->second;
    }
    if (auto it = index.redirect_map.find(key); it != index.redirect_map.end()) {
      return it->second;
    }
    return std::nullopt;
  }

  /// Full merged posting list for a surface form: exact anchor first, token
  /// subset/superset matches when the exact anchor is unknown.
  std::vector<Posting> lookup(std::string_view surface) const {
    const std::string key = unicode::normalize_name(surface);
    if (auto it = index_.postings.find(key); it != index_.postings.end()) {
      return it->second;
    }
    const std::vector<std::string> query = sorted_token_set(key);
    if (query.empty()) return {};

    std::set<std::string_view> anchors;
    for (const auto& tok : query) {
      auto it = anchors_by_token_.find(tok);
      if (it == anchors_by_token_.end()) continue;
      for (const auto* anchor : it->second) anchors.insert(*anchor);
    }
    std::map<std::string, std::uint64_t> merged;
    for (auto anchor : anchors) {
      const auto& tokens = anchor_tokens_.at(std::string(anchor));
      const bool superset = std::includes(tokens.begin(), tokens.end(),
                                          query.begin(), query.end());
      const bool subset = std::includes(query.begin(), query.end(),
                                        tokens.begin(), tokens.end());
      if (!superset && !subset) continue;
      for (const auto& p : index_.postings.at(std::string(anchor))) {
        merged[p.entity_id] += p.count;
      }
    }
    std::vector<Posting> out;
    out.reserve(merged.size());
    for (auto& [id, count] : merged) out.push_back({id, count});
    sort_postings(out);
    return out;
  }

  /// At most k KB candidates ranked by count, each with its link prior over
  /// the full posting list, followed by NIL.
  std::vector<Candidate> fast_search(std::string_view surface, std::size_t k) const {
    if (k == 0) throw ConfigError("fast_search: k must be at least 1");
    const std::vector<Posting> postings = lookup(surface);
    std::uint64_t total = 0;
    for (const auto& p : postings) total += p.count;
    std::vector<Candidate> out;
    const std::size_t n = std::min(k, postings.size());
    out.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({postings[i].entity_id,
                     static_cast<double>(postings[i].count) / static_cast<double>(total)});
    }
    out.push_back(Candidate::nil());
    return out;
  }

  /// P(e|m) for one entity, 0 when the surface never links to it.
  double link_prior(std::string_view surface, std::string_view entity_id) const {
    const std::vector<Posting> postings = lookup(surface);
    std::uint64_t total = 0;
    std::uint64_t hit = 0;
    for (const auto& p : postings) {
      total += p.count;
      if (p.entity_id == entity_id) hit = p.count;
    }
    return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
  }

  /// Resolved outlink targets of an entry (dangling links excluded).
  const std::set<std::string>& outlink_targets(std::string_view id) const {
    auto pos = position(id);
    return pos ? out_targets_[*pos] : empty_set_;
  }

  const std::set<std::string>& inlinks(std::string_view id) const {
    auto it = index_.inlinks.find(std::string(id));
    return it == index_.inlinks.end() ? empty_set_ : it->second;
  }

  /// Number of link occurrences on page(from) that resolve to `to`.
  std::uint64_t link_count(std::string_view from, std::string_view to) const {
    auto pos = position(from);
    if (!pos) return 0;
    const auto& counts = out_counts_[*pos];
    auto it = counts.find(std::string(to));
    return it == counts.end() ? 0 : it->second;
  }

  /// Resolves a link target string to an entity id: id, then title, then
  /// redirect.
  std::optional<std::string> resolve_target(std::string_view target) const {
    if (positions_.contains(std::string(target))) return std::string(target);
    return resolve_redirect(target);
  }

  void save(std::ostream& out) const {
    out.write(kMagic.data(), kMagic.size());
    const std::uint32_t version = kFormatVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    cereal::BinaryOutputArchive ar(out);
    ar(entries_, index_);
  }

  std::string serialize() const {
    std::ostringstream out(std::ios::binary);
    save(out);
    return std::move(out).str();
  }

  void save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write index file " + path);
    save(out);
    if (!out) throw FormatError("failed writing index file " + path);
  }

  static KbStore load(std::istream& in) {
    std::array<char, 8> magic{};
    std::uint32_t version = 0;
    in.read(magic.data(), magic.size());
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || magic != kMagic) throw FormatError("not a LIEL index file");
    if (version != kFormatVersion) {
      throw FormatError("index format version " + std::to_string(version) +
                        " is not supported (expected " +
                        std::to_string(kFormatVersion) + ")");
    }
    std::vector<KbEntry> entries;
    AnchorIndex index;
    try {
      cereal::BinaryInputArchive ar(in);
      ar(entries, index);
    } catch (const cereal::Exception& ex) {
      throw FormatError(std::string("truncated index file: ") + ex.what());
    }
    return KbStore(std::move(entries), std::move(index));
  }

  static KbStore load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read index file " + path);
    return load(in);
  }

  static void sort_postings(std::vector<Posting>& postings) {
    std::sort(postings.begin(), postings.end(), [](const Posting& a, const Posting& b) {
      if (a.count != b.count) return a.count > b.count;
      return a.entity_id < b.entity_id;
    });
  }

  static std::vector<std::string> sorted_token_set(std::string_view text) {
    std::vector<std::string> tokens = token_texts(text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    return tokens;
  }

 private:
  void derive() {
    positions_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      positions_.emplace(entries_[i].id, i);
    }
    out_targets_.resize(entries_.size());
    out_counts_.resize(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      for (const auto& link : entries_[i].outlinks) {
        if (auto target = resolve_target(link.target)) {
          out_targets_[i].insert(*target);
          ++out_counts_[i][*target];
        }
      }
    }
    for (const auto& [anchor, postings] : index_.postings) {
      auto& tokens = anchor_tokens_[anchor];
      tokens = sorted_token_set(anchor);
      for (const auto& tok : tokens) anchors_by_token_[tok].push_back(&anchor);
    }
  }

  std::vector<KbEntry> entries_;
  AnchorIndex index_;

  // Derived on construction, never serialized.
  std::unordered_map<std::string, std::size_t> positions_;
  std::vector<std::set<std::string>> out_targets_;
  std::vector<std::map<std::string, std::uint64_t>> out_counts_;
  std::unordered_map<std::string, std::vector<std::string>> anchor_tokens_;
  std::unordered_map<std::string, std::vector<const std::string*>> anchors_by_token_;
  std::set<std::string> empty_set_;
};

/// Builds the store and anchor index. Throws InputError on duplicate ids.
/// Dangling link targets are counted in `dangling_links`; their anchor
/// counts are kept under the raw target string.
inline KbStore build_index(std::vector<KbEntry> records, const IndexConfig& config = {}) {
  std::sort(records.begin(), records.end(),
            [](const KbEntry& a, const KbEntry& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].id == records[i - 1].id) {
      throw InputError("duplicate KB id '" + records[i].id + "'");
    }
  }

  AnchorIndex index;
  index.entry_count = records.size();
  index.max_candidates = config.max_candidates;
  // Records are id-sorted, so on alias collisions the smallest id wins.
  for (const auto& e : records) {
    index.title_map.try_emplace(unicode::normalize_name(e.title), e.id);
  }
  for (const auto& e : records) {
    for (const auto& r : e.redirects) {
      index.redirect_map.try_emplace(unicode::normalize_name(r), e.id);
    }
  }
  index.title_map.erase("");
  index.redirect_map.erase("");

  std::set<std::string_view> ids;
  for (const auto& e : records) ids.insert(e.id);
  auto resolve = [&](const std::string& target) -> std::optional<std::string> {
    if (ids.contains(target)) return target;
    return KbStore::resolve_alias(index, target);
  };
  std::map<std::string, std::map<std::string, std::uint64_t>> counts;
  for (const auto& e : records) {
    for (const auto& link : e.outlinks) {
      const std::string anchor = unicode::normalize_name(link.anchor);
      const auto target = resolve(link.target);
      if (!target) ++index.dangling_links;
      if (target) index.inlinks[*target].insert(e.id);
      if (anchor.empty()) continue;
      ++counts[anchor][target ? *target : link.target];
    }
  }
  for (auto& [anchor, by_entity] : counts) {
    auto& list = index.postings[anchor];
    for (auto& [id, count] : by_entity) list.push_back({id, count});
    KbStore::sort_postings(list);
  }
  return KbStore(std::move(records), std::move(index));
}

}  // namespace liel
