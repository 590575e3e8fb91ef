#pragma once

/// \file maxent.hpp
/// Maximum-entropy model over candidate tuples of one connected component.
///
///   P(t | d, C) = exp(w . f(t)) / sum_{t' in T(C)} exp(w . f(t'))
///   CLL(G, w)   = sum_{(t*, C) in G} log P(t* | d, C) - sigma * ||w||^2
///
/// The objective is concave in w, so the L-BFGS optimum is global.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "liel/error.hpp"
#include "liel/features.hpp"
#include "liel/lbfgs.hpp"

namespace liel {

/// Settings needed to reproduce candidate generation and features at decode
/// time.
struct DecodeConfig {
  std::size_t max_candidates = 40;
  std::size_t gap = 4;
  std::uint64_t budget = 100000;
  std::size_t window = 100;
  std::size_t top_n = 200;

  bool operator==(const DecodeConfig&) const = default;
};

struct Model {
  static constexpr int kFormatVersion = 1;

  std::vector<double> weights;
  double sigma = 0.5;
  FeatureRegistry registry = FeatureRegistry::standard();
  PmiTable pmi;
  DecodeConfig config;
  StopWords stopwords;
};

/// One gold component: feature vectors of every tuple in T(C) and the
/// position of the gold tuple among them.
struct TrainingInstance {
  std::vector<FeatureVector> tuples;
  std::size_t gold = 0;
};

inline double dot(std::span<const double> w, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
  return s;
}

/// w . f(t)
inline double tuple_log_score(std::span<const double> weights, const FeatureVector& f) {
  if (f.size() != weights.size()) {
    throw InputError("feature vector length " + std::to_string(f.size()) +
                     " does not match weight length " + std::to_string(weights.size()));
  }
  return dot(weights, f);
}

/// Softmax of log-domain scores with max subtraction.
inline std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw InputError("softmax over an empty tuple set");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - top);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

/// Distribution over T(C).
inline std::vector<double> tuple_probabilities(std::span<const double> weights,
                                               std::span<const FeatureVector> tuples) {
  std::vector<double> scores;
  scores.reserve(tuples.size());
  for (const auto& f : tuples) scores.push_back(tuple_log_score(weights, f));
  return softmax(scores);
}

inline double tuple_probability(std::span<const double> weights,
                                std::span<const FeatureVector> tuples, std::size_t t) {
  if (t >= tuples.size()) throw InputError("tuple index outside T(C)");
  return tuple_probabilities(weights, tuples)[t];
}

struct Objective {
  double value = 0.0;
  std::vector<double> gradient;
};

/// CLL value and gradient. The gradient is
///   sum [f(t*) - E_P f] - 2 sigma w.
/// Instances are reduced in order, so results are bit-reproducible.
inline Objective cll_objective(std::span<const double> weights, double sigma,
                               std::span<const TrainingInstance> data) {
  Objective out;
  out.gradient.assign(weights.size(), 0.0);
  std::vector<double> scores;
  for (const auto& inst : data) {
    if (inst.tuples.empty()) throw InputError("training instance with empty T(C)");
    scores.clear();
    for (const auto& f : inst.tuples) scores.push_back(tuple_log_score(weights, f));
    const double top = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - top);
    const double log_z = top + std::log(z);
    out.value += scores[inst.gold] - log_z;
    const FeatureVector& gold = inst.tuples[inst.gold];
    for (std::size_t j = 0; j < weights.size(); ++j) out.gradient[j] += gold[j];
    for (std::size_t t = 0; t < inst.tuples.size(); ++t) {
      const double p = std::exp(scores[t] - log_z);
      for (std::size_t j = 0; j < weights.size(); ++j) {
        out.gradient[j] -= p * inst.tuples[t][j];
      }
    }
  }
  double norm2 = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    norm2 += weights[j] * weights[j];
    out.gradient[j] -= 2.0 * sigma * weights[j];
  }
  out.value -= sigma * norm2;
  return out;
}

struct TrainResult {
  Model model;
  std::vector<double> objective_trace;  // CLL after each accepted step, ascending
  std::size_t iterations = 0;
  LbfgsStatus status = LbfgsStatus::kMaxIterations;
  double gradient_norm = 0.0;  // infinity norm at the returned weights
};

/// Maximizes the CLL from w = 0.
inline TrainResult train(std::span<const TrainingInstance> data, double sigma,
                         const FeatureRegistry& registry, const LbfgsOptions& options = {}) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be positive");
  for (const auto& inst : data) {
    if (inst.gold >= inst.tuples.size()) throw InputError("gold tuple outside T(C)");
    for (const auto& f : inst.tuples) {
      if (f.size() != registry.size()) {
        throw InputError("feature vector length does not match the registry");
      }
    }
  }
  auto negative_cll = [&](std::span<const double> w, std::span<double> g) {
    Objective o = cll_objective(w, sigma, data);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = -o.gradient[j];
    return -o.value;
  };
  LbfgsResult r =
      lbfgs_minimize(negative_cll, std::vector<double>(registry.size(), 0.0), options);

  TrainResult out;
  out.model.weights = std::move(r.x);
  out.model.sigma = sigma;
  out.model.registry = registry;
  for (double v : r.trace) out.objective_trace.push_back(-v);
  out.iterations = r.iterations;
  out.status = r.status;
  out.gradient_norm = detail::inf_norm(r.gradient);
  return out;
}

// ---------------------------------------------------------------------------
// Model file (JSON)

inline nlohmann::json model_to_json(const Model& m) {
  return {{"format", "liel-model"},
          {"format_version", Model::kFormatVersion},
          {"sigma", m.sigma},
          {"registry", m.registry.names()},
          {"weights", m.weights},
          {"pmi", pmi_to_json(m.pmi)},
          {"config",
           {{"max_candidates", m.config.max_candidates},
            {"gap", m.config.gap},
            {"budget", m.config.budget},
            {"window", m.config.window},
            {"top_n", m.config.top_n}}},
          {"stopwords", m.stopwords}};
}

inline Model model_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "liel-model") {
    throw FormatError("not a LIEL model file");
  }
  const int version = j.value("format_version", -1);
  if (version != Model::kFormatVersion) {
    throw FormatError("model format version " + std::to_string(version) +
                      " is not supported (expected " +
                      std::to_string(Model::kFormatVersion) + ")");
  }
  Model m;
  try {
    m.sigma = j.at("sigma").get<double>();
    m.registry = FeatureRegistry(j.at("registry").get<std::vector<std::string>>());
    m.weights = j.at("weights").get<std::vector<double>>();
    m.pmi = pmi_from_json(j.at("pmi"));
    const auto& c = j.at("config");
    m.config.max_candidates = c.at("max_candidates").get<std::size_t>();
    m.config.gap = c.at("gap").get<std::size_t>();
    m.config.budget = c.at("budget").get<std::uint64_t>();
    m.config.window = c.at("window").get<std::size_t>();
    m.config.top_n = c.at("top_n").get<std::size_t>();
    for (const auto& w : j.value("stopwords", nlohmann::json::array())) {
      m.stopwords.insert(w.get<std::string>());
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed model file: ") + ex.what());
  }
  if (m.weights.size() != m.registry.size()) {
    throw FormatError("model weights do not match its feature registry");
  }
  if (!(m.sigma > 0.0)) throw FormatError("model sigma must be positive");
  for (double w : m.weights) {
    if (!std::isfinite(w)) throw FormatError("model has non-finite weights");
  }
  return m;
}

inline void save_model_file(const Model& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write model file " + path);
  out << model_to_json(m).dump(2) << '\n';
}

inline Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read model file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError("model file " + path + ": " + ex.what());
  }
  return model_from_json(j);
}

}  // namespace liel
