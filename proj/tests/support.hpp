#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  auto x = white_noise(n, seed, sd);
  for (std::size_t i = 1; i < n; ++i) x[i] += x[i - 1];
  return x;
}

inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed, double sd = 1.0, std::size_t burn = 200) {
  const auto e = white_noise(n + burn, seed, sd);
  std::vector<double> x(n + burn, 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) x[i] = phi * x[i - 1] + e[i];
  return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
}

struct GarchPath {
  std::vector<double> returns;
  std::vector<double> variances;
};

inline GarchPath garch11(std::size_t n, double omega, double alpha, double beta, std::uint64_t seed,
                         std::size_t burn = 1000) {
  auto z = white_noise(n + burn, seed);
  GarchPath p;
  double s2 = omega / (1.0 - alpha - beta);
  double prev = 0.0;
  for (std::size_t t = 0; t < n + burn; ++t) {
    s2 = omega + alpha * prev * prev + beta * s2;
    prev = std::sqrt(s2) * z[t];
    if (t >= burn) {
      p.returns.push_back(prev);
      p.variances.push_back(s2);
    }
  }
  return p;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("volrisk_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string fixture_path(const std::string& name) { return std::string(VOLRISK_FIXTURE_DIR) + "/" + name; }

}  // namespace testsupport
