#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "liel/lbfgs.hpp"
#include "liel/maxent.hpp"

using namespace liel;

namespace {

std::vector<TrainingInstance> make_instances(std::mt19937_64& rng, std::size_t count,
                                          std::size_t dims, std::size_t max_tuples = 8) {
  std::normal_distribution<double> value(0.0, 1.0);
  std::vector<TrainingInstance> data(count);
  for (auto& inst : data) {
    const std::size_t n = 1 + rng() % max_tuples;
    inst.tuples.assign(n, FeatureVector(dims));
    for (auto& f : inst.tuples) {
      for (double& v : f) v = value(rng);
    }
    inst.gold = rng() % n;
  }
  return data;
}

// Log-likelihood straight from the definition, without max subtraction.
double naive_cll(const std::vector<double>& w, double sigma,
                 const std::vector<TrainingInstance>& data) {
  double total = 0.0;
  for (const auto& inst : data) {
    double z = 0.0;
    for (const auto& f : inst.tuples) {
      z += std::exp(std::inner_product(w.begin(), w.end(), f.begin(), 0.0));
    }
    const auto& g = inst.tuples[inst.gold];
    total += std::log(std::exp(std::inner_product(w.begin(), w.end(), g.begin(), 0.0)) / z);
  }
  return total - sigma * std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
}

double norm2(const std::vector<double>& w) {
  return std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
}

FeatureRegistry registry_of(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("f" + std::to_string(i));
  return FeatureRegistry(names);
}

}  // namespace

TEST(Softmax, EqualScoresSplitEvenly) {
  const std::vector<FeatureVector> tuples = {{1.0, 2.0}, {1.0, 2.0}};
  const std::vector<double> w = {0.3, -0.7};
  EXPECT_DOUBLE_EQ(tuple_probability(w, tuples, 0), 0.5);
}

TEST(Softmax, ZeroWeightsAreUniform) {
  const std::vector<FeatureVector> tuples = {{1, 0}, {0, 1}, {5, 5}, {-2, 3}};
  for (double p : tuple_probabilities(std::vector<double>{0, 0}, tuples)) {
    EXPECT_DOUBLE_EQ(p, 0.25);
  }
}

TEST(Softmax, HandEvaluated) {
  const auto p = softmax(std::vector<double>{1.0, 0.0});
  EXPECT_NEAR(p[0], std::exp(1.0) / (std::exp(1.0) + 1.0), 1e-15);
  EXPECT_NEAR(p[1], 1.0 / (std::exp(1.0) + 1.0), 1e-15);
  EXPECT_NEAR(p[0], 0.7311, 1e-4);
}

TEST(Softmax, StableForLargeScores) {
  const auto p = softmax(std::vector<double>{1000.0, 999.0, -1000.0});
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
  EXPECT_NEAR(p[0] / p[1], std::exp(1.0), 1e-9);
}

TEST(Softmax, EmptyIsAnError) {
  EXPECT_THROW(softmax(std::vector<double>{}), InputError);
  EXPECT_THROW(tuple_probability(std::vector<double>{1.0}, std::vector<FeatureVector>{}, 0),
               InputError);
}

TEST(Softmax, NormalizedAndPositive) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> s(-30.0, 30.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> scores(1 + rng() % 50);
    for (double& v : scores) v = s(rng);
    const auto p = softmax(scores);
    double total = 0.0;
    for (double v : p) {
      EXPECT_GT(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(TupleLogScore, DotProductAndLengthCheck) {
  EXPECT_DOUBLE_EQ(tuple_log_score(std::vector<double>{1, 2}, FeatureVector{3, 4}), 11.0);
  EXPECT_THROW(tuple_log_score(std::vector<double>{1, 2}, FeatureVector{3}), InputError);
}

TEST(Cll, UniformValue) {
  TrainingInstance inst;
  inst.tuples.assign(4, FeatureVector{0.5, -1.0});
  inst.tuples[2] = {2.0, 1.0};
  inst.gold = 1;
  const Objective o = cll_objective(std::vector<double>{0, 0}, 0.5, std::vector{inst});
  EXPECT_NEAR(o.value, std::log(0.25), 1e-15);
  EXPECT_NEAR(o.value, -1.3863, 1e-4);
}

TEST(Cll, EmptyDataIsRegularizerOnly) {
  const std::vector<double> w = {1.0, -2.0, 0.5};
  const Objective o = cll_objective(w, 0.5, {});
  EXPECT_DOUBLE_EQ(o.value, -0.5 * (1.0 + 4.0 + 0.25));
  for (std::size_t j = 0; j < w.size(); ++j) EXPECT_DOUBLE_EQ(o.gradient[j], -2.0 * 0.5 * w[j]);
}

TEST(Cll, MatchesNaiveDefinition) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = make_instances(rng, 6, 10);
    std::vector<double> w(10);
    for (double& v : w) v = n(rng);
    EXPECT_NEAR(cll_objective(w, 0.3, data).value, naive_cll(w, 0.3, data), 1e-10);
  }
}

TEST(Cll, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 25; ++trial) {
    const auto data = make_instances(rng, 4, 10);
    std::vector<double> w(10);
    for (double& v : w) v = n(rng);
    const Objective o = cll_objective(w, 0.5, data);
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto up = w, down = w;
      up[j] += h;
      down[j] -= h;
      const double fd = (naive_cll(up, 0.5, data) - naive_cll(down, 0.5, data)) / (2 * h);
      EXPECT_LT(std::abs(fd - o.gradient[j]) / std::max(1.0, std::abs(fd)), 1e-5);
    }
  }
}

TEST(Cll, ConcaveAlongRandomDirections) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto data = make_instances(rng, 5, 6);
    std::vector<double> w(6), u(6);
    for (double& v : w) v = n(rng);
    for (double& v : u) v = n(rng);
    auto at = [&](double a) {
      std::vector<double> x(6);
      for (std::size_t j = 0; j < 6; ++j) x[j] = w[j] + a * u[j];
      return cll_objective(x, 0.5, data).value;
    };
    EXPECT_GE(at(0.0), 0.5 * (at(-0.1) + at(0.1)) - 1e-9);
  }
}

TEST(Lbfgs, MinimizesQuadratic) {
  // f(x) = sum_i (i+1) (x_i - i)^2
  auto f = [](std::span<const double> x, std::span<double> g) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - static_cast<double>(i);
      v += static_cast<double>(i + 1) * d * d;
      g[i] = 2.0 * static_cast<double>(i + 1) * d;
    }
    return v;
  };
  const LbfgsResult r = lbfgs_minimize(f, std::vector<double>(8, 0.0));
  EXPECT_EQ(r.status, LbfgsStatus::kConverged);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(r.x[i], static_cast<double>(i), 1e-6);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LT(r.trace[i], r.trace[i - 1]);
}

TEST(Lbfgs, MinimizesRosenbrock) {
  auto f = [](std::span<const double> x, std::span<double> g) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  LbfgsOptions o;
  o.max_iterations = 1000;
  const LbfgsResult r = lbfgs_minimize(f, std::vector<double>{-1.2, 1.0}, o);
  EXPECT_EQ(r.status, LbfgsStatus::kConverged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
}

TEST(Lbfgs, NonFiniteObjectiveAborts) {
  auto f = [](std::span<const double> x, std::span<double> g) {
    g[0] = -1.0;
    return x[0] > 0.5 ? std::nan("") : -x[0];
  };
  EXPECT_THROW(lbfgs_minimize(f, std::vector<double>{0.0}), TrainingError);
}

TEST(Train, ReachesTolerance) {
  std::mt19937_64 rng(31);
  const auto data = make_instances(rng, 30, 5);
  const TrainResult r = train(data, 0.5, registry_of(5));
  EXPECT_EQ(r.status, LbfgsStatus::kConverged);
  EXPECT_LE(r.gradient_norm, 1e-6);
  EXPECT_LE(detail::inf_norm(cll_objective(r.model.weights, 0.5, data).gradient), 1e-6);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
    EXPECT_GT(r.objective_trace[i], r.objective_trace[i - 1]);
  }
}

TEST(Train, Deterministic) {
  std::mt19937_64 rng(32);
  const auto data = make_instances(rng, 20, 5);
  EXPECT_EQ(train(data, 0.5, registry_of(5)).model.weights,
            train(data, 0.5, registry_of(5)).model.weights);
}

TEST(Train, RegularizationLimits) {
  std::mt19937_64 rng(33);
  const auto data = make_instances(rng, 30, 6);
  EXPECT_LT(norm2(train(data, 1e6, registry_of(6)).model.weights), 1e-3);
  EXPECT_GT(norm2(train(data, 0.01, registry_of(6)).model.weights),
            norm2(train(data, 10.0, registry_of(6)).model.weights));
}

TEST(Train, RejectsBadInput) {
  std::mt19937_64 rng(34);
  auto data = make_instances(rng, 3, 4);
  EXPECT_THROW(train(data, 0.0, registry_of(4)), ConfigError);
  EXPECT_THROW(train(data, -1.0, registry_of(4)), ConfigError);
  EXPECT_THROW(train(data, 0.5, registry_of(5)), InputError);
  data[0].gold = data[0].tuples.size();
  EXPECT_THROW(train(data, 0.5, registry_of(4)), InputError);
}

TEST(ModelFile, JsonRoundTripIsExact) {
  Model m;
  m.weights.assign(FeatureRegistry::standard().size(), 0.0);
  for (std::size_t i = 0; i < m.weights.size(); ++i) m.weights[i] = 0.1 * std::sqrt(i + 2.0);
  m.sigma = 0.25;
  m.config.window = 40;
  m.pmi.pair_scores[PmiTable::key("a", "b")] = 1.0 / 3.0;
  m.stopwords = {"the", "of"};
  const Model back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.sigma, m.sigma);
  EXPECT_EQ(back.registry, m.registry);
  EXPECT_EQ(back.pmi, m.pmi);
  EXPECT_EQ(back.config, m.config);
  EXPECT_EQ(back.stopwords, m.stopwords);
}

TEST(ModelFile, RejectsWrongFormatOrVersion) {
  Model m;
  m.weights.assign(FeatureRegistry::standard().size(), 0.0);
  auto j = model_to_json(m);
  j["format_version"] = 99;
  EXPECT_THROW(model_from_json(j), FormatError);
  j = model_to_json(m);
  j["format"] = "something-else";
  EXPECT_THROW(model_from_json(j), FormatError);
  j = model_to_json(m);
  j["weights"] = std::vector<double>{1.0};
  EXPECT_THROW(model_from_json(j), FormatError);
  j = model_to_json(m);
  j.erase("pmi");
  EXPECT_THROW(model_from_json(j), FormatError);
}
