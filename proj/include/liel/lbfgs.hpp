#pragma once

/// \file lbfgs.hpp
/// Limited-memory BFGS minimizer with a strong-Wolfe line search.
///
/// The objective is any callable `double(std::span<const double> x,
/// std::span<double> grad)` returning f(x) and writing its gradient. Every
/// accepted step satisfies the Armijo condition, so the recorded trace of
/// objective values is strictly decreasing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "liel/error.hpp"

namespace liel {

struct LbfgsOptions {
  std::size_t history = 10;
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-6;  // on the infinity norm
  std::size_t max_line_search = 40;
  double armijo = 1e-4;
  double curvature = 0.9;
};

enum class LbfgsStatus { kConverged, kMaxIterations, kLineSearchFailed };

inline const char* to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::kConverged: return "converged";
    case LbfgsStatus::kMaxIterations: return "max-iterations";
    case LbfgsStatus::kLineSearchFailed: return "line-search-failed";
  }
  return "unknown";
}

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> trace;  // f at the start point and after each accepted step
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  LbfgsStatus status = LbfgsStatus::kMaxIterations;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

template <class Objective>
LbfgsResult lbfgs_minimize(Objective&& objective, std::vector<double> x0,
                           const LbfgsOptions& options = {}) {
  const std::size_t n = x0.size();
  LbfgsResult r;
  r.x = std::move(x0);
  r.gradient.assign(n, 0.0);

  auto evaluate = [&](std::span<const double> x, std::span<double> g) {
    const double f = objective(x, g);
    ++r.evaluations;
    if (!std::isfinite(f) ||
        !std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v); })) {
      throw TrainingError("non-finite objective or gradient during line search (evaluation " +
                          std::to_string(r.evaluations) + ")");
    }
    return f;
  };

  r.value = evaluate(r.x, r.gradient);
  r.trace.push_back(r.value);
  if (n == 0 || detail::inf_norm(r.gradient) <= options.gradient_tolerance) {
    r.status = LbfgsStatus::kConverged;
    return r;
  }

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  struct Point {
    double step, f, slope;
  };
  std::deque<Pair> memory;
  std::vector<double> direction(n), x_trial(n), g_trial(n), alpha(options.history);
  std::vector<double> best_x, best_g;

  while (r.iterations < options.max_iterations) {
    // Two-loop recursion: direction = -H g.
    for (std::size_t i = 0; i < n; ++i) direction[i] = -r.gradient[i];
    for (std::size_t k = memory.size(); k-- > 0;) {
      alpha[k] = memory[k].rho * detail::dot(memory[k].s, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] -= alpha[k] * memory[k].y[i];
    }
    if (!memory.empty()) {
      const auto& last = memory.back();
      const double gamma = detail::dot(last.s, last.y) / detail::dot(last.y, last.y);
      for (double& d : direction) d *= gamma;
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = memory[k].rho * detail::dot(memory[k].y, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] += memory[k].s[i] * (alpha[k] - beta);
    }
    double slope = detail::dot(r.gradient, direction);
    if (!(slope < 0.0)) {
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) direction[i] = -r.gradient[i];
      slope = detail::dot(r.gradient, direction);
    }

    const double f0 = r.value;
    auto sufficient = [&](double step, double f) {
      return f <= f0 + options.armijo * step * slope;
    };
    auto curvature_ok = [&](double d) { return std::abs(d) <= -options.curvature * slope; };

    double step = memory.empty() ? std::min(1.0, 1.0 / std::sqrt(-slope)) : 1.0;
    Point prev{0.0, f0, slope};
    Point lo{}, hi{};
    bool bracketed = false;
    bool accepted = false;
    double best_f = f0;
    double last_f = f0;
    best_x.clear();

    for (std::size_t ls = 0; ls < options.max_line_search; ++ls) {
      if (bracketed) {
        const double width = hi.step - lo.step;
        const double curv = (hi.f - lo.f - lo.slope * width) / (width * width);
        double trial = curv > 0.0 ? lo.step - lo.slope / (2.0 * curv) : 0.5 * (lo.step + hi.step);
        const double a = std::min(lo.step, hi.step);
        const double b = std::max(lo.step, hi.step);
        const double margin = 0.1 * (b - a);
        if (!std::isfinite(trial) || trial < a + margin || trial > b - margin) {
          trial = 0.5 * (lo.step + hi.step);
        }
        step = trial;
      }
      for (std::size_t i = 0; i < n; ++i) x_trial[i] = r.x[i] + step * direction[i];
      const double f = evaluate(x_trial, g_trial);
      last_f = f;
      const Point cur{step, f, detail::dot(g_trial, direction)};
      if (sufficient(step, f) && f < best_f) {
        best_f = f;
        best_x = x_trial;
        best_g = g_trial;
      }

      if (!bracketed) {
        if (!sufficient(step, f) || (ls > 0 && f >= prev.f)) {
          lo = prev, hi = cur, bracketed = true;
          continue;
        }
        if (curvature_ok(cur.slope)) {
          accepted = true;
          break;
        }
        if (cur.slope >= 0.0) {
          lo = cur, hi = prev, bracketed = true;
          continue;
        }
        prev = cur;
        step *= 2.0;
      } else {
        if (!sufficient(step, f) || f >= lo.f) {
          hi = cur;
        } else {
          if (curvature_ok(cur.slope)) {
            accepted = true;
            break;
          }
          if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
          lo = cur;
        }
        if (std::abs(hi.step - lo.step) <= 1e-16 * std::max(1.0, std::abs(lo.step))) break;
      }
    }

    if (accepted) {
      best_f = last_f;
      best_x = x_trial;
      best_g = g_trial;
    }
    if (best_x.empty()) {
      r.status = LbfgsStatus::kLineSearchFailed;
      return r;
    }

    Pair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = best_x[i] - r.x[i];
      pair.y[i] = best_g[i] - r.gradient[i];
    }
    const double sy = detail::dot(pair.s, pair.y);
    if (sy > 1e-12 * std::sqrt(detail::dot(pair.s, pair.s) * detail::dot(pair.y, pair.y))) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (memory.size() > options.history) memory.pop_front();
    }
    r.x = best_x;
    r.gradient = best_g;
    r.value = best_f;
    r.trace.push_back(r.value);
    ++r.iterations;
    if (detail::inf_norm(r.gradient) <= options.gradient_tolerance) {
      r.status = LbfgsStatus::kConverged;
      return r;
    }
  }
  r.status = LbfgsStatus::kMaxIterations;
  return r;
}

}  // namespace liel
