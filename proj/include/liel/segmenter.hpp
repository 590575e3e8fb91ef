#pragma once

/// \file segmenter.hpp
/// Connected components of nearby mentions and candidate-tuple enumeration.
///
/// Two mentions are linked when at most `gap` tokens lie strictly between
/// the end of the earlier one and the start of the later one (overlapping
/// spans are at distance 0). Components are the transitive closure of that
/// relation. Each component is decoded jointly over the Cartesian product of
/// its mentions' candidate lists.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "liel/document.hpp"
#include "liel/kb_store.hpp"
#include "liel/text_vsm.hpp"

namespace liel {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::size_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

struct ConnectedComponent {
  std::size_t id = 0;
  std::vector<std::size_t> mentions;  // indices into MentionDocument::mentions, ascending
};

struct CandidateTuple {
  std::vector<Candidate> assignments;  // aligned with component mention order
  double score = 0.0;

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(assignments.size());
    for (const auto& c : assignments) out.push_back(c.entity_id);
    return out;
  }
};

/// Tokens strictly between two spans; 0 when they overlap.
inline std::size_t token_distance(const TokenStream& tokens, const Mention& a,
                                  const Mention& b) {
  const Mention& first = a.start <= b.start ? a : b;
  const Mention& second = a.start <= b.start ? b : a;
  if (second.start < first.end) return 0;
  auto lo = std::lower_bound(
      tokens.begin(), tokens.end(), first.end,
      [](const Token& t, std::size_t off) { return t.offset < off; });
  auto hi = std::upper_bound(
      lo, tokens.end(), second.start,
      [](std::size_t off, const Token& t) { return off < t.end(); });
  return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

inline std::vector<ConnectedComponent> connected_components(
    const MentionDocument& d, std::size_t gap, const TokenStream& tokens) {
  const std::size_t n = d.mentions.size();
  DisjointSet sets(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (token_distance(tokens, d.mentions[i], d.mentions[j]) <= gap) sets.unite(i, j);
    }
  }
  std::vector<ConnectedComponent> components;
  std::vector<std::size_t> slot(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (slot[root] == std::numeric_limits<std::size_t>::max()) {
      slot[root] = components.size();
      components.push_back({components.size(), {}});
    }
    components[slot[root]].mentions.push_back(i);
  }
  return components;
}

inline std::vector<ConnectedComponent> connected_components(const MentionDocument& d,
                                                            std::size_t gap = 4) {
  return connected_components(d, gap, tokenize(d.text));
}

struct TupleSpace {
  std::vector<std::vector<Candidate>> candidates;  // per mention, NIL last
  std::size_t effective_k = 0;
  std::vector<CandidateTuple> tuples;  // product order, first mention slowest
};

/// Product size with per-mention cap k (NIL included), saturating.
inline std::uint64_t product_size(const std::vector<std::size_t>& kb_counts,
                                  std::size_t k) {
  std::uint64_t total = 1;
  for (std::size_t count : kb_counts) {
    const std::uint64_t width = std::min(count, k) + 1;
    if (total > std::numeric_limits<std::uint64_t>::max() / width) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total *= width;
  }
  return total;
}

/// Largest k' <= k whose product fits the budget, never below 1.
inline std::size_t fit_candidate_cap(const std::vector<std::size_t>& kb_counts,
                                     std::size_t k, std::uint64_t budget) {
  while (k > 1 && product_size(kb_counts, k) > budget) --k;
  return k;
}

inline std::vector<CandidateTuple> cartesian_product(
    const std::vector<std::vector<Candidate>>& lists) {
  std::vector<CandidateTuple> out;
  if (lists.empty()) return out;
  std::vector<std::size_t> pick(lists.size(), 0);
  for (const auto& l : lists) {
    if (l.empty()) return out;
  }
  while (true) {
    CandidateTuple t;
    t.assignments.reserve(lists.size());
    for (std::size_t i = 0; i < lists.size(); ++i) t.assignments.push_back(lists[i][pick[i]]);
    out.push_back(std::move(t));
    std::size_t pos = lists.size();
    while (pos > 0) {
      --pos;
      if (++pick[pos] < lists[pos].size()) break;
      pick[pos] = 0;
      if (pos == 0) return out;
    }
  }
}

/// Per-mention candidate lists after the budget cut, without materializing
/// the product.
inline TupleSpace candidate_lists(const ConnectedComponent& c, const MentionDocument& d,
                                  const KbStore& kb, std::size_t k, std::uint64_t budget) {
  if (k == 0) throw ConfigError("enumerate_tuples: k must be at least 1");
  if (budget == 0) throw ConfigError("enumerate_tuples: budget must be at least 1");
  TupleSpace space;
  std::vector<std::vector<Candidate>> full;
  std::vector<std::size_t> kb_counts;
  for (std::size_t idx : c.mentions) {
    full.push_back(kb.fast_search(d.mentions[idx].surface, k));
    kb_counts.push_back(full.back().size() - 1);
  }
  space.effective_k = fit_candidate_cap(kb_counts, k, budget);
  for (auto& list : full) {
    const std::size_t keep = std::min(list.size() - 1, space.effective_k);
    std::vector<Candidate> trimmed(list.begin(),
                                   list.begin() + static_cast<std::ptrdiff_t>(keep));
    trimmed.push_back(Candidate::nil());
    space.candidates.push_back(std::move(trimmed));
  }
  return space;
}

inline TupleSpace enumerate_tuples(const ConnectedComponent& c, const MentionDocument& d,
                                   const KbStore& kb, std::size_t k, std::uint64_t budget) {
  TupleSpace space = candidate_lists(c, d, kb, k, budget);
  space.tuples = cartesian_product(space.candidates);
  return space;
}

}  // namespace liel
