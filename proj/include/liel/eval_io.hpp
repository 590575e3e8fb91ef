#pragma once

// Adapters from prediction records and gold documents to evaluator inputs.

#include <span>
#include <string>
#include <vector>

#include "liel/decode.hpp"
#include "liel/document.hpp"
#include "liel/evaluator.hpp"

namespace liel {

/// Gold KB ids per document; NIL and unlabeled mentions are left out.
inline TitleBags gold_title_bags(std::span<const MentionDocument> docs) {
  TitleBags bags;
  for (const auto& d : docs) {
    auto& bag = bags[d.doc_id];
    for (const auto& m : d.mentions) {
      if (m.gold && *m.gold != kNilId) bag.push_back(*m.gold);
    }
  }
  return bags;
}

inline TitleBags predicted_title_bags(std::span<const Prediction> predictions) {
  TitleBags bags;
  for (const auto& p : predictions) {
    auto& bag = bags[p.doc_id];
    if (!p.is_nil()) bag.push_back(p.prediction);
  }
  return bags;
}

/// Labeled gold mentions. A NIL mention without a gold cluster forms its own
/// cluster.
inline std::vector<LabeledMention> gold_labels(std::span<const MentionDocument> docs) {
  std::vector<LabeledMention> out;
  for (const auto& d : docs) {
    for (const auto& m : d.mentions) {
      if (!m.gold) continue;
      LabeledMention l{d.doc_id, m.id, *m.gold, ""};
      if (l.is_nil()) l.cluster = m.gold_cluster ? *m.gold_cluster : d.doc_id + "/" + m.id;
      out.push_back(std::move(l));
    }
  }
  return out;
}

inline std::vector<LabeledMention> predicted_labels(std::span<const Prediction> predictions) {
  std::vector<LabeledMention> out;
  for (const auto& p : predictions) {
    LabeledMention l{p.doc_id, p.mention_id, p.prediction, ""};
    if (l.is_nil()) l.cluster = p.nil_cluster ? *p.nil_cluster : p.doc_id + "/" + p.mention_id;
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace liel
