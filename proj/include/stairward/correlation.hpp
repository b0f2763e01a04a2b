#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stairward/core.hpp"

namespace stairward {

namespace detail {

inline void check_pair(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size()) {
    data_error(std::string(what) + ": length mismatch (" + std::to_string(x.size()) + " vs " +
               std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) data_error(std::string(what) + ": needs at least 3 samples");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      data_error(std::string(what) + ": non-finite input");
    }
  }
}

inline double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

// Inversions (i < j with v[i] > v[j]) by merge sort; sorts v.
inline std::uint64_t count_inversions(std::vector<double>& v) {
  std::vector<double> buffer(v.size());
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const auto mid = std::min(lo + width, v.size());
      const auto hi = std::min(lo + 2 * width, v.size());
      std::size_t i = lo;
      std::size_t j = mid;
      std::size_t k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          inversions += mid - i;
          buffer[k++] = v[j++];
        } else {
          buffer[k++] = v[i++];
        }
      }
      while (i < mid) buffer[k++] = v[i++];
      while (j < hi) buffer[k++] = v[j++];
    }
    v.swap(buffer);
  }
  return inversions;
}

template <typename Equal>
std::uint64_t tied_pairs(std::span<const std::size_t> order, Equal equal) {
  std::uint64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= order.size(); ++i) {
    if (i < order.size() && equal(order[i - 1], order[i])) {
      ++run;
    } else {
      ties += run * (run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

}  // namespace detail

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> fractional_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
    i = j;
  }
  return ranks;
}

inline double plcc(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y, "plcc");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) data_error("plcc: zero variance input");
  return detail::clamp_unit(sxy / std::sqrt(sxx * syy));
}

/// Spearman correlation: Pearson correlation of the fractional ranks.
inline double srocc(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y, "srocc");
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  if (std::all_of(rx.begin(), rx.end(), [&](double r) { return r == rx.front(); }) ||
      std::all_of(ry.begin(), ry.end(), [&](double r) { return r == ry.front(); })) {
    data_error("srocc: zero rank variance");
  }
  return plcc(rx, ry);
}

/// Kendall tau-b in O(n log n) (Knight's algorithm).
inline double krocc(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y, "krocc");
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const auto x_ties = detail::tied_pairs(order, [&](auto a, auto b) { return x[a] == x[b]; });
  const auto joint_ties =
      detail::tied_pairs(order, [&](auto a, auto b) { return x[a] == x[b] && y[a] == y[b]; });

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const auto swaps = detail::count_inversions(ys);  // leaves ys sorted
  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  const auto y_ties = detail::tied_pairs(identity, [&](auto a, auto b) { return ys[a] == ys[b]; });

  const double denom = std::sqrt(static_cast<double>(total - x_ties)) *
                       std::sqrt(static_cast<double>(total - y_ties));
  if (denom == 0.0) data_error("krocc: zero rank variance");
  const double s = static_cast<double>(total) - static_cast<double>(x_ties) -
                   static_cast<double>(y_ties) + static_cast<double>(joint_ties) -
                   2.0 * static_cast<double>(swaps);
  return detail::clamp_unit(s / denom);
}

}  // namespace stairward
