#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "badmarket/common.hpp"
#include "badmarket/economy.hpp"

namespace testing {

using badmarket::Vector;

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector random_sphere_point(std::mt19937_64& rng, int ell) {
  Vector p(ell);
  for (int i = 0; i < ell; ++i) p[i] = uniform(rng, -1.0, 1.0);
  return p / p.cwiseAbs().sum();
}

/// Bad/good economy with one to three quadratic-bad consumers, a random cone
/// firm with free disposal and a plain cone firm.
inline badmarket::Economy random_fd_economy(std::mt19937_64& rng) {
  using namespace badmarket;
  Economy e;
  e.name = "random-fd";
  e.commodities = {2, 1, 1, {"bad", "good"}};
  const int n = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) {
    Consumer c;
    c.id = std::to_string(i + 1);
    c.weight = 1.0 / n;
    c.endowment = Vector(2);
    c.endowment << uniform(rng, 0.1, 1.0), uniform(rng, 0.5, 2.0);
    c.shares = Vector(2);
    c.shares << 1.0, 1.0;
    c.bounds = Vector(2);
    c.bounds << 5.0, kInf;
    c.preference = PreferenceSpec::quadratic_bad(1, 0, uniform(rng, 0.2, 2.0));
    e.consumers.push_back(c);
    e.monotone_witnesses[1].push_back(c.id);
  }
  Vector clean(2), dirty(2);
  clean << -1.0, uniform(rng, -0.8, 0.2);
  dirty << uniform(rng, 0.1, 1.0), uniform(rng, -0.5, -0.05);
  e.firms = {Technology::cone({clean}, "fd", true), Technology::cone({dirty}, "plant")};
  return e;
}

inline std::string data_path(const std::string& name) { return std::string(BADMARKET_DATA_DIR) + "/" + name; }

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("badmarket-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
