#pragma once

#include "mlport/core.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace mlport {

/// 64-bit FNV-1a; stable across platforms and runs.
inline std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Deterministic child seed for (seed, i, j, ...), independent of call order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (path.size() + 1));
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto v : path) push(v);
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

/// n iid draws from N(mu, Sigma): x_i = mu + L z_i with Sigma = L L'.
inline Eigen::MatrixXd sample_returns_matrix(const PopulationSpec& pop, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "sample size must be positive");
  Eigen::LLT<Eigen::MatrixXd> llt(pop.sigma());
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularPopulation, "sigma has no Cholesky factor");
  const Eigen::Index m = pop.m();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) z(i, j) = normal(rng);
  }
  Eigen::MatrixXd x = z * llt.matrixL().transpose();
  x.rowwise() += pop.mu().transpose();
  return x;
}

inline ReturnsMatrix sample_returns(const PopulationSpec& pop, Eigen::Index n, std::uint64_t seed) {
  return ReturnsMatrix(sample_returns_matrix(pop, n, seed));
}

}  // namespace mlport
