#pragma once

/// \file evaluator.hpp
/// Bag-of-titles F1 and B-cubed+ (B-cubed with KB-label agreement).
///
/// B-cubed+: every mention belongs to one predicted class (its KB id, or its
/// NIL cluster) and one gold class. A pair (m, m') counts as correct when m'
/// shares both classes with m and both mentions carry the correct label
/// (same KB id, or NIL on both sides). Precision of m divides the correct
/// pairs by its predicted class size, recall by its gold class size; both
/// are averaged over mentions.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "liel/error.hpp"
#include "liel/kb_store.hpp"

namespace liel {

struct DocumentScore {
  std::string doc_id;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::string metric;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Macro averages over documents (BOT only).
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<DocumentScore> per_document;
  std::size_t queries = 0;
  std::size_t in_kb = 0;
  std::size_t nil = 0;
};

inline double harmonic_mean(double p, double r) {
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& d : r.per_document) {
    docs.push_back({{"doc_id", d.doc_id}, {"precision", d.precision}, {"recall", d.recall},
                    {"f1", d.f1}});
  }
  nlohmann::json j = {{"metric", r.metric},
                      {"precision", r.precision},
                      {"recall", r.recall},
                      {"f1", r.f1},
                      {"counts", {{"queries", r.queries}, {"in_kb", r.in_kb}, {"nil", r.nil}}},
                      {"per_document", docs}};
  if (r.metric == "bot") {
    j["macro"] = {{"precision", r.macro_precision}, {"recall", r.macro_recall},
                  {"f1", r.macro_f1}};
  }
  return j;
}

/// Titles per document (NIL excluded by the caller).
using TitleBags = std::map<std::string, std::vector<std::string>>;

/// Micro-averaged BOT precision/recall/F1 over deduplicated title sets.
/// Throws when a predicted document has no gold entry; gold documents
/// without predictions count as empty predictions.
inline EvalReport bot_f1(const TitleBags& predicted, const TitleBags& gold) {
  for (const auto& [doc, titles] : predicted) {
    if (!gold.contains(doc)) throw InputError("predicted document '" + doc + "' is not in gold");
  }
  EvalReport r;
  r.metric = "bot";
  std::size_t hits = 0, n_pred = 0, n_gold = 0;
  for (const auto& [doc, gold_titles] : gold) {
    const std::set<std::string> g(gold_titles.begin(), gold_titles.end());
    std::set<std::string> p;
    if (auto it = predicted.find(doc); it != predicted.end()) {
      p.insert(it->second.begin(), it->second.end());
    }
    std::size_t common = 0;
    for (const auto& t : p) common += g.count(t);
    hits += common;
    n_pred += p.size();
    n_gold += g.size();
    DocumentScore s{doc};
    s.precision = p.empty() ? 0.0 : static_cast<double>(common) / static_cast<double>(p.size());
    s.recall = g.empty() ? 0.0 : static_cast<double>(common) / static_cast<double>(g.size());
    s.f1 = harmonic_mean(s.precision, s.recall);
    r.per_document.push_back(s);
    r.queries += g.size();
    r.in_kb += g.size();
  }
  r.precision = n_pred == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n_pred);
  r.recall = n_gold == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n_gold);
  r.f1 = harmonic_mean(r.precision, r.recall);
  if (!r.per_document.empty()) {
    for (const auto& s : r.per_document) {
      r.macro_precision += s.precision;
      r.macro_recall += s.recall;
      r.macro_f1 += s.f1;
    }
    const auto n = static_cast<double>(r.per_document.size());
    r.macro_precision /= n;
    r.macro_recall /= n;
    r.macro_f1 /= n;
  }
  return r;
}

/// One query mention with its label: a KB id, or NIL plus a cluster id.
struct LabeledMention {
  std::string doc_id;
  std::string mention_id;
  std::string label;    // KB id or "NIL"
  std::string cluster;  // NIL cluster id; ignored for KB labels

  bool is_nil() const { return label == kNilId; }
  std::string class_key() const { return is_nil() ? "NIL:" + cluster : "KB:" + label; }
};

inline EvalReport b3plus_f1(std::span<const LabeledMention> predicted,
                            std::span<const LabeledMention> gold) {
  using Key = std::pair<std::string, std::string>;
  std::map<Key, const LabeledMention*> pred_by_key;
  for (const auto& p : predicted) pred_by_key[{p.doc_id, p.mention_id}] = &p;

  // Aligned (gold, predicted) pairs for every gold query.
  std::vector<std::pair<const LabeledMention*, const LabeledMention*>> rows;
  for (const auto& g : gold) {
    auto it = pred_by_key.find({g.doc_id, g.mention_id});
    if (it == pred_by_key.end()) {
      throw InputError("no prediction for gold mention '" + g.mention_id + "' in document '" +
                       g.doc_id + "'");
    }
    rows.emplace_back(&g, it->second);
  }

  std::map<std::string, std::vector<std::size_t>> gold_classes, pred_classes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    gold_classes[rows[i].first->class_key()].push_back(i);
    pred_classes[rows[i].second->class_key()].push_back(i);
  }
  std::vector<std::string> gold_key(rows.size()), pred_key(rows.size());
  std::vector<bool> label_ok(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    gold_key[i] = rows[i].first->class_key();
    pred_key[i] = rows[i].second->class_key();
    label_ok[i] = rows[i].first->label == rows[i].second->label;
  }

  EvalReport r;
  r.metric = "b3plus";
  std::map<std::string, std::pair<double, double>> doc_sums;
  std::map<std::string, std::size_t> doc_counts;
  double p_sum = 0.0, r_sum = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t correct = 0;
    if (label_ok[i]) {
      for (std::size_t j : pred_classes[pred_key[i]]) {
        if (gold_key[j] == gold_key[i] && label_ok[j]) ++correct;
      }
    }
    const double p = static_cast<double>(correct) /
                     static_cast<double>(pred_classes[pred_key[i]].size());
    const double rc = static_cast<double>(correct) /
                      static_cast<double>(gold_classes[gold_key[i]].size());
    p_sum += p;
    r_sum += rc;
    auto& ds = doc_sums[rows[i].first->doc_id];
    ds.first += p;
    ds.second += rc;
    ++doc_counts[rows[i].first->doc_id];
    ++r.queries;
    if (rows[i].first->is_nil()) {
      ++r.nil;
    } else {
      ++r.in_kb;
    }
  }
  if (!rows.empty()) {
    r.precision = p_sum / static_cast<double>(rows.size());
    r.recall = r_sum / static_cast<double>(rows.size());
  }
  r.f1 = harmonic_mean(r.precision, r.recall);
  for (const auto& [doc, sums] : doc_sums) {
    const auto n = static_cast<double>(doc_counts[doc]);
    DocumentScore s{doc, sums.first / n, sums.second / n, 0.0};
    s.f1 = harmonic_mean(s.precision, s.recall);
    r.per_document.push_back(s);
  }
  return r;
}

}  // namespace liel
