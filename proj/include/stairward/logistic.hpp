#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stairward/core.hpp"

namespace stairward {

/// Parameters of  y = a1 (1/2 - 1/(1 + exp(a2 (x - a3)))) + a4 x + a5.
struct LogisticParams {
  std::array<double, 5> alpha{0.0, 1.0, 0.0, 0.0, 0.0};

  // 1/2 - 1/(1 + e^t) == tanh(t/2) / 2, which does not overflow.
  [[nodiscard]] double operator()(double x) const {
    const double t = alpha[1] * (x - alpha[2]);
    return alpha[0] * 0.5 * std::tanh(0.5 * t) + alpha[3] * x + alpha[4];
  }

  [[nodiscard]] std::vector<double> apply(std::span<const double> xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back((*this)(x));
    return out;
  }

  [[nodiscard]] bool finite() const {
    return std::all_of(alpha.begin(), alpha.end(), [](double a) { return std::isfinite(a); });
  }
};

struct LogisticFit {
  LogisticParams params;
  double sse = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct LogisticFitOptions {
  int max_iterations = 500;
  double relative_tolerance = 1e-10;
};

namespace detail {

inline double logistic_sse(const LogisticParams& p, std::span<const double> x,
                           std::span<const double> y) {
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = p(x[i]) - y[i];
    sse += r * r;
  }
  return std::isfinite(sse) ? sse : std::numeric_limits<double>::infinity();
}

inline LogisticFit levenberg_marquardt(LogisticParams p, std::span<const double> x,
                                       std::span<const double> y, const LogisticFitOptions& opt) {
  using Vec5 = Eigen::Matrix<double, 5, 1>;
  using Mat5 = Eigen::Matrix<double, 5, 5>;

  LogisticFit fit;
  double sse = logistic_sse(p, x, y);
  double lambda = 1e-3;
  bool refresh = true;
  Mat5 jtj;
  Vec5 jtr;
  const double exact = 1e-28 * static_cast<double>(x.size());

  while (fit.iterations < opt.max_iterations) {
    if (sse <= exact) {
      fit.converged = true;
      break;
    }
    if (refresh) {
      jtj.setZero();
      jtr.setZero();
      const auto& a = p.alpha;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - a[2];
        const double th = std::tanh(0.5 * a[1] * dx);
        const double slope = 0.25 * (1.0 - th * th);
        Vec5 row;
        row << 0.5 * th, a[0] * slope * dx, -a[0] * slope * a[1], x[i], 1.0;
        jtj.noalias() += row * row.transpose();
        jtr.noalias() += row * (p(x[i]) - y[i]);
      }
      refresh = false;
    }

    ++fit.iterations;
    Mat5 damped = jtj;
    const double floor = 1e-12 * (1.0 + jtj.diagonal().maxCoeff());
    for (int k = 0; k < 5; ++k) damped(k, k) += lambda * std::max(jtj(k, k), floor);
    const Vec5 step = damped.ldlt().solve(-jtr);

    LogisticParams candidate = p;
    for (int k = 0; k < 5; ++k) candidate.alpha[static_cast<std::size_t>(k)] += step(k);
    const double candidate_sse =
        candidate.finite() ? logistic_sse(candidate, x, y) : std::numeric_limits<double>::infinity();

    if (candidate_sse < sse) {
      const double improvement = (sse - candidate_sse) / std::max(sse, 1e-300);
      p = candidate;
      sse = candidate_sse;
      lambda = std::max(lambda * 0.3, 1e-15);
      refresh = true;
      if (improvement < opt.relative_tolerance) {
        fit.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) {
        // No descent direction left at this point.
        fit.converged = true;
        break;
      }
    }
  }
  fit.params = p;
  fit.sse = sse;
  return fit;
}

// With a2 and a3 fixed the model is linear in (a1, a4, a5); solve that exactly.
inline LogisticParams refit_linear_part(LogisticParams p, std::span<const double> x,
                                        std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    design(i, 0) = 0.5 * std::tanh(0.5 * p.alpha[1] * (xi - p.alpha[2]));
    design(i, 1) = xi;
    design(i, 2) = 1.0;
    target(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(target);
  p.alpha[0] = coef(0);
  p.alpha[3] = coef(1);
  p.alpha[4] = coef(2);
  return p;
}

}  // namespace detail

/// Least-squares fit of the five-parameter logistic mapping predictions onto
/// subjective scores. Two starts are run (the conventional sigmoid start and
/// the ordinary least-squares line) and the lower-error fit wins, so the
/// result is never worse than the best straight line.
inline LogisticFit fit_logistic(std::span<const double> predicted, std::span<const double> mos,
                                const LogisticFitOptions& options = {}) {
  if (predicted.size() != mos.size()) data_error("fit_logistic: length mismatch");
  if (predicted.size() < 10) data_error("fit_logistic: needs at least 10 samples");
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!std::isfinite(predicted[i]) || !std::isfinite(mos[i])) {
      data_error("fit_logistic: non-finite input");
    }
  }
  const auto n = static_cast<double>(predicted.size());
  const double mean_x = std::accumulate(predicted.begin(), predicted.end(), 0.0) / n;
  const double mean_y = std::accumulate(mos.begin(), mos.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    sxx += (predicted[i] - mean_x) * (predicted[i] - mean_x);
    sxy += (predicted[i] - mean_x) * (mos[i] - mean_y);
  }
  if (!(sxx > 0.0)) data_error("fit_logistic: predictions are constant");
  const double std_x = std::sqrt(sxx / (n - 1.0));
  const auto [min_y, max_y] = std::minmax_element(mos.begin(), mos.end());
  const double range_y = *max_y - *min_y;

  LogisticParams sigmoid_start;
  sigmoid_start.alpha = {(sxy < 0.0 ? -1.0 : 1.0) * (range_y > 0.0 ? range_y : 1.0), 1.0 / std_x,
                         mean_x, 0.0, mean_y};

  LogisticParams linear_start;
  const double slope = sxy / sxx;
  linear_start.alpha = {0.0, 1.0 / std_x, mean_x, slope, mean_y - slope * mean_x};

  auto best = detail::levenberg_marquardt(sigmoid_start, predicted, mos, options);
  auto alt = detail::levenberg_marquardt(linear_start, predicted, mos, options);
  if (alt.sse < best.sse) {
    alt.iterations += best.iterations;
    best = alt;
  } else {
    best.iterations += alt.iterations;
  }

  const auto polished = detail::refit_linear_part(best.params, predicted, mos);
  if (polished.finite()) {
    const double polished_sse = detail::logistic_sse(polished, predicted, mos);
    if (polished_sse <= best.sse) {
      best.params = polished;
      best.sse = polished_sse;
    }
  }
  return best;
}

}  // namespace stairward
