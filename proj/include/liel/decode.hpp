#pragma once

/// \file decode.hpp
/// Per-component decoding, training-set construction and NIL clustering.
///
/// Each connected component is decoded independently: every tuple of its
/// candidate product is scored with w . f(t) and the best one is kept. Ties
/// go to the lexicographically smallest sequence of assigned ids.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "liel/document.hpp"
#include "liel/features.hpp"
#include "liel/kb_store.hpp"
#include "liel/maxent.hpp"
#include "liel/segmenter.hpp"

namespace liel {

/// Feature vectors of a component's candidate product, with the
/// per-(mention, candidate) and per-pair partials computed once.
class ComponentFeatures {
 public:
  ComponentFeatures(const FeatureExtractor& fx, const DocumentView& doc,
                    const ConnectedComponent& component,
                    std::vector<std::vector<Candidate>> lists)
      : lists_(std::move(lists)) {
    for (std::size_t i = 0; i < lists_.size(); ++i) {
      auto& row = mention_parts_.emplace_back();
      for (const auto& c : lists_[i]) row.push_back(fx.mention_entity(doc, component.mentions[i], c));
    }
    for (std::size_t i = 0; i + 1 < lists_.size(); ++i) {
      auto& grid = pair_parts_.emplace_back();
      for (const auto& a : lists_[i]) {
        for (const auto& b : lists_[i + 1]) grid.push_back(fx.entity_entity(a, b));
      }
    }
  }

  const std::vector<std::vector<Candidate>>& lists() const { return lists_; }

  FeatureVector features(std::span<const std::size_t> pick) const {
    std::vector<const FeatureVector*> mp;
    std::vector<const FeatureVector*> pp;
    for (std::size_t i = 0; i < pick.size(); ++i) {
      mp.push_back(&mention_parts_[i][pick[i]]);
      if (i > 0) pp.push_back(&pair_parts_[i - 1][pick[i - 1] * lists_[i].size() + pick[i]]);
    }
    return combine_partials(mp, pp);
  }

  /// Calls f(pick) for every tuple in product order (first mention slowest).
  template <class F>
  void for_each_tuple(F&& f) const {
    if (lists_.empty()) return;
    for (const auto& l : lists_) {
      if (l.empty()) return;
    }
    std::vector<std::size_t> pick(lists_.size(), 0);
    while (true) {
      f(std::span<const std::size_t>(pick));
      std::size_t pos = lists_.size();
      while (true) {
        if (pos == 0) return;
        --pos;
        if (++pick[pos] < lists_[pos].size()) break;
        pick[pos] = 0;
      }
    }
  }

 private:
  std::vector<std::vector<Candidate>> lists_;
  std::vector<std::vector<FeatureVector>> mention_parts_;
  std::vector<std::vector<FeatureVector>> pair_parts_;  // row-major [a][b]
};

inline bool ids_less(const std::vector<std::vector<Candidate>>& lists,
                     std::span<const std::size_t> a, std::span<const std::size_t> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = lists[i][a[i]].entity_id;
    const auto& y = lists[i][b[i]].entity_id;
    if (x != y) return x < y;
  }
  return false;
}

struct ComponentDecision {
  CandidateTuple best;        // score = w . f(best)
  double probability = 0.0;   // P(best | d, C) over the decoded product
  std::size_t tuple_count = 0;
  std::size_t effective_k = 0;
};

struct Prediction {
  std::string doc_id;
  std::string mention_id;
  std::string surface;
  std::string prediction;  // KB id or "NIL"
  std::optional<std::string> nil_cluster;
  double score = 0.0;

  bool is_nil() const { return prediction == kNilId; }
};

inline DecodeConfig validated(const DecodeConfig& c) {
  if (c.max_candidates == 0) throw ConfigError("max-candidates must be positive");
  if (c.budget == 0) throw ConfigError("tuple budget must be positive");
  if (c.window == 0 || c.window % 2 != 0) throw ConfigError("window must be positive and even");
  if (c.top_n == 0) throw ConfigError("top-n must be positive");
  return c;
}

inline FeatureConfig feature_config(const DecodeConfig& c, StopWords stopwords) {
  return FeatureConfig{c.window, c.top_n, std::move(stopwords)};
}

class Linker {
 public:
  Linker(const KbStore& kb, const Model& model)
      : kb_(&kb),
        model_(&model),
        config_(validated(model.config)),
        extractor_(kb, model.pmi, feature_config(model.config, model.stopwords)) {
    if (!(model.registry == FeatureRegistry::standard())) {
      throw FormatError("model feature registry does not match this build's features");
    }
    if (model.weights.size() != model.registry.size()) {
      throw FormatError("model weights do not match its feature registry");
    }
  }

  const FeatureExtractor& extractor() const { return extractor_; }

  ComponentDecision decode_component(const DocumentView& view,
                                     const ConnectedComponent& component) const {
    const MentionDocument& d = view.document();
    TupleSpace space =
        candidate_lists(component, d, *kb_, config_.max_candidates, config_.budget);
    ComponentFeatures cf(extractor_, view, component, std::move(space.candidates));

    std::vector<double> scores;
    std::vector<std::size_t> best_pick;
    double best_score = 0.0;
    cf.for_each_tuple([&](std::span<const std::size_t> pick) {
      const double s = dot(model_->weights, cf.features(pick));
      scores.push_back(s);
      if (best_pick.empty() || s > best_score ||
          (s == best_score && ids_less(cf.lists(), pick, best_pick))) {
        best_score = s;
        best_pick.assign(pick.begin(), pick.end());
      }
    });

    ComponentDecision out;
    out.tuple_count = scores.size();
    out.effective_k = space.effective_k;
    for (std::size_t i = 0; i < best_pick.size(); ++i) {
      out.best.assignments.push_back(cf.lists()[i][best_pick[i]]);
    }
    out.best.score = best_score;
    const double top = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - top);
    out.probability = std::exp(best_score - top) / z;
    return out;
  }

  /// One prediction per mention, in document mention order.
  std::vector<Prediction> decode(const MentionDocument& d) const {
    const DocumentView view = extractor_.view(d);
    std::vector<Prediction> out(d.mentions.size());
    for (const auto& component : connected_components(d, config_.gap, view.tokens())) {
      const ComponentDecision decision = decode_component(view, component);
      for (std::size_t i = 0; i < component.mentions.size(); ++i) {
        const Mention& m = d.mentions[component.mentions[i]];
        Prediction& p = out[component.mentions[i]];
        p.doc_id = d.doc_id;
        p.mention_id = m.id;
        p.surface = m.surface;
        p.prediction = decision.best.assignments[i].entity_id;
        p.score = decision.probability;
      }
    }
    return out;
  }

 private:
  const KbStore* kb_;
  const Model* model_;
  DecodeConfig config_;
  FeatureExtractor extractor_;
};

inline std::vector<Prediction> decode(const Model& model, const MentionDocument& d,
                                      const KbStore& kb) {
  return Linker(kb, model).decode(d);
}

/// Groups NIL predictions by normalized surface form. Cluster ids are
/// assigned in order of first appearance ("NIL0001", "NIL0002", ...), so the
/// same input order always yields the same ids.
inline void nil_cluster(std::span<Prediction> predictions) {
  std::map<std::string, std::string> clusters;
  for (auto& p : predictions) {
    if (!p.is_nil()) {
      p.nil_cluster.reset();
      continue;
    }
    const std::string key = unicode::normalize_name(p.surface);
    auto it = clusters.find(key);
    if (it == clusters.end()) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "NIL%04zu", clusters.size() + 1);
      it = clusters.emplace(key, buf).first;
    }
    p.nil_cluster = it->second;
  }
}

/// Decodes documents on `jobs` threads; output keeps input order.
inline std::vector<Prediction> link_documents(const Linker& linker,
                                              std::span<const MentionDocument> docs,
                                              std::size_t jobs = 1) {
  std::vector<std::vector<Prediction>> per_doc(docs.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(std::max<std::size_t>(jobs, 1));
  auto worker = [&](std::size_t slot) {
    try {
      for (std::size_t i = next++; i < docs.size(); i = next++) {
        per_doc[i] = linker.decode(docs[i]);
      }
    } catch (...) {
      errors[slot] = std::current_exception();
      next = docs.size();
    }
  };
  if (jobs <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker, t);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Prediction> out;
  for (auto& v : per_doc) {
    for (auto& p : v) out.push_back(std::move(p));
  }
  nil_cluster(out);
  return out;
}

inline nlohmann::json prediction_to_json(const Prediction& p) {
  nlohmann::json j = {{"doc_id", p.doc_id},
                      {"mention_id", p.mention_id},
                      {"prediction", p.prediction},
                      {"score", p.score}};
  if (p.nil_cluster) j["nil_cluster"] = *p.nil_cluster;
  return j;
}

inline Prediction prediction_from_json(const nlohmann::json& j) {
  Prediction p;
  try {
    p.doc_id = j.at("doc_id").get<std::string>();
    p.mention_id = j.at("mention_id").get<std::string>();
    p.prediction = j.at("prediction").get<std::string>();
    p.score = j.value("score", 0.0);
    if (j.contains("nil_cluster") && !j.at("nil_cluster").is_null()) {
      p.nil_cluster = j.at("nil_cluster").get<std::string>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("malformed prediction record: ") + ex.what());
  }
  return p;
}

inline void write_predictions(std::ostream& out, std::span<const Prediction> predictions) {
  for (const auto& p : predictions) out << prediction_to_json(p).dump() << '\n';
}

inline std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(prediction_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw InputError("prediction line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct TrainingSetStats {
  std::size_t components = 0;
  std::size_t instances = 0;
  std::size_t skipped_unlabeled = 0;  // components with a mention lacking gold
  std::size_t injected_gold = 0;      // gold tuples missing from fast search
};

struct TrainingSet {
  std::vector<TrainingInstance> instances;
  TrainingSetStats stats;
};

struct LabeledComponent {
  const MentionDocument* doc;
  ConnectedComponent component;
  CandidateTuple gold;
};

/// Components whose mentions all carry gold labels, with their gold tuples.
/// Link priors of gold candidates come from the index.
inline std::vector<LabeledComponent> labeled_components(std::span<const MentionDocument> docs,
                                                        const KbStore& kb,
                                                        const DecodeConfig& config,
                                                        TrainingSetStats* stats = nullptr) {
  std::vector<LabeledComponent> out;
  for (const auto& d : docs) {
    for (auto& component : connected_components(d, config.gap)) {
      if (stats) ++stats->components;
      CandidateTuple gold;
      bool labeled = true;
      for (std::size_t idx : component.mentions) {
        const Mention& m = d.mentions[idx];
        if (!m.gold) {
          labeled = false;
          break;
        }
        if (*m.gold == kNilId) {
          gold.assignments.push_back(Candidate::nil());
        } else {
          gold.assignments.push_back({*m.gold, kb.link_prior(m.surface, *m.gold)});
        }
      }
      if (!labeled) {
        if (stats) ++stats->skipped_unlabeled;
        continue;
      }
      out.push_back({&d, std::move(component), std::move(gold)});
    }
  }
  return out;
}

/// T(C) features for every labeled component. When fast search misses a gold
/// entity the gold tuple is appended to T(C).
inline TrainingSet build_training_set(std::span<const LabeledComponent> labeled,
                                      const FeatureExtractor& fx, const DecodeConfig& config) {
  TrainingSet set;
  const MentionDocument* current = nullptr;
  std::optional<DocumentView> view;
  for (const auto& lc : labeled) {
    if (lc.doc != current) {
      view.emplace(*lc.doc, fx.config());
      current = lc.doc;
    }
    TupleSpace space =
        candidate_lists(lc.component, *lc.doc, fx.kb(), config.max_candidates, config.budget);
    // Position of each gold candidate in its mention's list, if retrieved.
    std::vector<std::size_t> gold_pick;
    for (std::size_t i = 0; i < space.candidates.size(); ++i) {
      const auto& list = space.candidates[i];
      auto it = std::find_if(list.begin(), list.end(), [&](const Candidate& c) {
        return c.entity_id == lc.gold.assignments[i].entity_id;
      });
      if (it == list.end()) break;
      gold_pick.push_back(static_cast<std::size_t>(it - list.begin()));
    }
    const bool retrieved = gold_pick.size() == space.candidates.size();

    ComponentFeatures cf(fx, *view, lc.component, std::move(space.candidates));
    TrainingInstance inst;
    std::size_t position = 0;
    cf.for_each_tuple([&](std::span<const std::size_t> pick) {
      if (retrieved && std::equal(pick.begin(), pick.end(), gold_pick.begin())) {
        inst.gold = position;
      }
      inst.tuples.push_back(cf.features(pick));
      ++position;
    });
    if (!retrieved) {
      inst.gold = inst.tuples.size();
      inst.tuples.push_back(fx.tuple_features(lc.gold, lc.component, *view));
      ++set.stats.injected_gold;
    }
    set.instances.push_back(std::move(inst));
    ++set.stats.instances;
  }
  return set;
}

struct TrainOptions {
  double sigma = 0.5;
  double pmi_blacklist = 0.05;
  DecodeConfig decode;
  LbfgsOptions optimizer;
};

struct DocumentTrainResult {
  TrainResult result;
  TrainingSetStats stats;
};

/// Full training pipeline: gold components, category PMI, features, L-BFGS.
inline DocumentTrainResult train_from_documents(std::span<const MentionDocument> docs,
                                                const KbStore& kb, const StopWords& stopwords,
                                                const TrainOptions& options) {
  if (!(options.sigma > 0.0)) throw ConfigError("sigma must be positive");
  const DecodeConfig config = validated(options.decode);
  TrainingSetStats stats;
  const std::vector<LabeledComponent> labeled = labeled_components(docs, kb, config, &stats);
  std::vector<CandidateTuple> gold;
  for (const auto& lc : labeled) gold.push_back(lc.gold);
  PmiTable pmi = train_pmi(gold, kb, options.pmi_blacklist);

  const FeatureExtractor fx(kb, pmi, feature_config(config, stopwords));
  TrainingSet set = build_training_set(labeled, fx, config);
  set.stats.components = stats.components;
  set.stats.skipped_unlabeled = stats.skipped_unlabeled;

  DocumentTrainResult out;
  out.result = train(set.instances, options.sigma, FeatureRegistry::standard(), options.optimizer);
  out.result.model.pmi = std::move(pmi);
  out.result.model.config = config;
  out.result.model.stopwords = stopwords;
  out.stats = set.stats;
  return out;
}

}  // namespace liel
