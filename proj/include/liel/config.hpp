#pragma once

// Resolved settings of one pipeline run.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "liel/error.hpp"
#include "liel/maxent.hpp"

namespace liel {

struct PipelineConfig {
  std::size_t max_candidates = 40;
  double sigma = 0.5;
  std::size_t gap = 4;
  std::size_t window = 100;
  std::size_t top_n = 200;
  std::uint64_t budget = 100000;
  std::uint64_t seed = 0;
  double pmi_blacklist = 0.05;
  std::size_t max_iterations = 500;
  double tolerance = 1e-6;
  std::size_t jobs = 1;

  std::string kb_path;
  std::string index_path;
  std::string train_path;
  std::string model_path;
  std::string input_path;
  std::string output_path;
  std::string gold_path;
  std::string stopwords_path;

  void validate() const {
    if (max_candidates == 0) throw ConfigError("max-candidates must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be positive");
    if (window == 0 || window % 2 != 0) throw ConfigError("window must be positive and even");
    if (top_n == 0) throw ConfigError("top-n must be positive");
    if (budget == 0) throw ConfigError("budget must be positive");
    if (max_iterations == 0) throw ConfigError("max-iterations must be positive");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (jobs == 0) throw ConfigError("jobs must be positive");
    if (!(pmi_blacklist > 0.0)) throw ConfigError("pmi-blacklist must be positive");
  }

  DecodeConfig decode_config() const { return {max_candidates, gap, budget, window, top_n}; }

  LbfgsOptions optimizer() const {
    LbfgsOptions o;
    o.max_iterations = max_iterations;
    o.gradient_tolerance = tolerance;
    return o;
  }

  nlohmann::json to_json() const {
    nlohmann::json paths = nlohmann::json::object();
    auto put = [&](const char* key, const std::string& v) {
      if (!v.empty()) paths[key] = v;
    };
    put("kb", kb_path);
    put("index", index_path);
    put("train", train_path);
    put("model", model_path);
    put("in", input_path);
    put("out", output_path);
    put("gold", gold_path);
    put("stopwords", stopwords_path);
    return {{"max_candidates", max_candidates},
            {"sigma", sigma},
            {"gap", gap},
            {"window", window},
            {"top_n", top_n},
            {"budget", budget},
            {"seed", seed},
            {"pmi_blacklist", pmi_blacklist},
            {"max_iterations", max_iterations},
            {"tolerance", tolerance},
            {"jobs", jobs},
            {"paths", paths}};
  }
};

}  // namespace liel
