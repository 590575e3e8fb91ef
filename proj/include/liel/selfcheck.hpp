#pragma once

// Invariant checks on bundled fixtures, run by `liel selfcheck`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "liel/decode.hpp"
#include "liel/evaluator.hpp"
#include "liel/fixtures.hpp"
#include "liel/maxent.hpp"
#include "liel/segmenter.hpp"

namespace liel::selfcheck {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::vector<TrainingInstance> random_instances(std::mt19937_64& rng, std::size_t count,
                                                      std::size_t dims) {
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<TrainingInstance> data(count);
  for (auto& inst : data) {
    const std::size_t n = 1 + rng() % 8;
    inst.tuples.assign(n, FeatureVector(dims));
    for (auto& f : inst.tuples) {
      for (double& v : f) v = value(rng);
    }
    inst.gold = rng() % n;
  }
  return data;
}

inline std::string number(double v) {
  std::ostringstream s;
  s << std::setprecision(3) << v;
  return s.str();
}

}  // namespace detail

inline CheckResult check_softmax(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(-50.0, 50.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> scores(1 + rng() % 64);
    for (double& s : scores) s = value(rng);
    const auto p = softmax(scores);
    double total = 0.0;
    for (double v : p) total += v;
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {"softmax sums to one", worst <= 1e-9, "max deviation " + detail::number(worst)};
}

inline CheckResult check_gradient(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = detail::random_instances(rng, 5, 10);
    std::vector<double> w(10);
    for (double& v : w) v = value(rng);
    const Objective o = cll_objective(w, 0.5, data);
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double h = 1e-5;
      auto wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double fd = (cll_objective(wp, 0.5, data).value - cll_objective(wm, 0.5, data).value) /
                        (2.0 * h);
      const double rel = std::abs(fd - o.gradient[j]) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    }
  }
  return {"CLL gradient matches finite differences", worst < 1e-5,
          "max relative error " + detail::number(worst)};
}

inline CheckResult check_index_determinism(std::uint64_t seed) {
  const auto records = fixtures::synthetic_corpus(seed).kb;
  const std::string reference = build_index(records).serialize();
  std::mt19937_64 rng(seed);
  bool same = true;
  for (int trial = 0; trial < 5; ++trial) {
    auto shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    same = same && build_index(shuffled).serialize() == reference;
  }
  const KbStore kb = build_index(records);
  double worst = 0.0;
  for (const auto& [anchor, postings] : kb.index().postings) {
    double total = 0.0;
    for (const auto& c : kb.fast_search(anchor, postings.size())) total += c.link_prior;
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {"index is order independent", same && worst <= 1e-9,
          std::string(same ? "identical bytes" : "bytes differ") + ", prior deviation " +
              detail::number(worst)};
}

inline CheckResult check_components(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int trial = 0; trial < 100; ++trial) {
    MentionDocument d;
    d.doc_id = "random";
    const std::size_t words = 20 + rng() % 200;
    for (std::size_t i = 0; i < words; ++i) d.text += (i ? " w" : "w") + std::to_string(i);
    const TokenStream tokens = tokenize(d.text);
    const std::size_t n = rng() % 51;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = rng() % tokens.size();
      const std::size_t b = std::min(tokens.size() - 1, a + rng() % 3);
      d.mentions.push_back({"m" + std::to_string(i), "", tokens[a].offset, tokens[b].end(),
                            std::nullopt, std::nullopt});
    }
    finalize_document(d);
    const auto components = connected_components(d, 4, tokens);
    // Reachability by repeated relaxation.
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        reach[i][j] = i == j || token_distance(tokens, d.mentions[i], d.mentions[j]) <= 4;
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (reach[i][k] && reach[k][j]) reach[i][j] = true;
        }
      }
    }
    std::vector<std::size_t> label(n);
    for (const auto& c : components) {
      for (std::size_t m : c.mentions) label[m] = c.id;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[i][j] != (label[i] == label[j])) {
          return {"components equal transitive closure", false,
                  "mismatch in trial " + std::to_string(trial)};
        }
      }
    }
  }
  return {"components equal transitive closure", true, "100 random documents"};
}

inline CheckResult check_home_depot() {
  const MentionDocument d = fixtures::home_depot_document();
  auto ids = [&](bool link, const Model& m) {
    const KbStore kb = build_index(fixtures::home_depot_kb(link));
    std::string out;
    for (const auto& p : decode(m, d, kb)) out += (out.empty() ? "" : ",") + p.prediction;
    return out;
  };
  const std::string linked = ids(true, fixtures::home_depot_model());
  const std::string unlinked = ids(false, fixtures::home_depot_model());
  const std::string zero = ids(true, fixtures::zero_model());
  const bool ok = linked == "HOME_DEPOT,ROBERT_NARDELLI" &&
                  unlinked == "HOME_DEPOT,STEVE_NARDELLI" && zero == "HOME_DEPOT,NIL";
  return {"Home Depot fixture", ok, linked + " / " + unlinked + " / " + zero};
}

inline CheckResult check_metrics() {
  const EvalReport bot = bot_f1({{"d", {"A", "B"}}}, {{"d", {"A", "C"}}});
  const std::vector<LabeledMention> gold = {{"d", "1", "NIL", "x"}, {"d", "2", "NIL", "x"}};
  const std::vector<LabeledMention> pred = {{"d", "1", "NIL", "p"}, {"d", "2", "NIL", "q"}};
  const EvalReport b3 = b3plus_f1(pred, gold);
  const bool ok = bot.precision == 0.5 && bot.recall == 0.5 && bot.f1 == 0.5 &&
                  std::abs(b3.f1 - 2.0 / 3.0) <= 1e-12;
  return {"metric fixtures", ok,
          "bot " + detail::number(bot.f1) + ", b3plus " + detail::number(b3.f1)};
}

inline CheckResult check_model_round_trip() {
  const KbStore kb = build_index(fixtures::home_depot_kb(true));
  std::stringstream bytes;
  kb.save(bytes);
  const KbStore loaded = KbStore::load(bytes);
  const Model m = fixtures::home_depot_model();
  const Model copy = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
  const MentionDocument d = fixtures::home_depot_document();
  const auto a = decode(m, d, kb);
  const auto b = decode(copy, d, loaded);
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i) {
    same = a[i].prediction == b[i].prediction && a[i].score == b[i].score;
  }
  return {"index and model round trip", same, same ? "identical decode" : "decode differs"};
}

inline std::vector<CheckResult> run_all(std::uint64_t seed) {
  return {check_softmax(seed),     check_gradient(seed), check_index_determinism(seed),
          check_components(seed),  check_home_depot(),   check_metrics(),
          check_model_round_trip()};
}

}  // namespace liel::selfcheck
