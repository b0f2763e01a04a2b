#pragma once

// Independent brute-force oracles and small hand-rolled generators for the
// property tests. Nothing here calls into the library's numeric code.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "stairward/core.hpp"

namespace stairward::testkit {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("stairward-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

  // With probability `tie_rate` values come from a pool of three, forcing ties.
  std::vector<double> vec(std::size_t n, double tie_rate = 0.3) {
    std::vector<double> v(n);
    const bool tied = coin(tie_rate);
    for (auto& x : v) x = tied ? static_cast<double>(integer(0, 2)) : real(-10.0, 10.0);
    return v;
  }
};

inline AnnotatedImage image_record(std::string id, std::string label, std::string prompt = "a thing") {
  return AnnotatedImage{std::move(id),         "",          PromptText(std::move(prompt)),
                        ModelTag::other,       ModelGroup::bad, 0,
                        StyleClass::none,      "",          std::move(label),
                        ParamVariant::standard, std::nullopt};
}

inline std::vector<double> oracle_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double below = 0.0;
    double equal = 0.0;
    for (double v : x) {
      if (v < x[i]) below += 1.0;
      if (v == x[i]) equal += 1.0;
    }
    r[i] = below + (equal + 1.0) / 2.0;
  }
  return r;
}

// Single-pass moment formula in long double; a different route from the library's.
inline double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const auto n = static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double num = n * sxy - sx * sy;
  const long double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  return static_cast<double>(num / den);
}

inline double oracle_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return oracle_pearson(oracle_ranks(x), oracle_ranks(y));
}

// Tau-b by enumerating every pair.
inline double oracle_kendall(const std::vector<double>& x, const std::vector<double>& y) {
  double concordant = 0, discordant = 0, tie_x_only = 0, tie_y_only = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        tie_x_only += 1;
      } else if (dy == 0) {
        tie_y_only += 1;
      } else if ((dx > 0) == (dy > 0)) {
        concordant += 1;
      } else {
        discordant += 1;
      }
    }
  }
  return (concordant - discordant) /
         std::sqrt((concordant + discordant + tie_x_only) * (concordant + discordant + tie_y_only));
}

inline bool has_variance(const std::vector<double>& v) {
  for (double x : v) {
    if (x != v.front()) return true;
  }
  return false;
}

}  // namespace stairward::testkit
