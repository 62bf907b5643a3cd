#pragma once

#include <cstdint>
#include <random>

#include "tsac/linalg.hpp"

namespace tsac {

/// splitmix64 mix of a base seed and a salt. Used to derive independent
/// substream seeds from one run seed; the contract is per-(seed, substream)
/// determinism on a given platform, not cross-platform bit equality.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

/// Owned standard-normal stream. Each consumer (plant noise, TS sampling,
/// exploration noise) holds its own stream so draws never interleave.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double next() { return normal_(gen_); }

  Vector vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = next();
    return v;
  }

  Matrix matrix(int rows, int cols) {
    Matrix m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = next();
    return m;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_;
};

/// Substream ids for one simulated run.
enum class Substream : std::uint64_t {
  Plant = 0,
  Sampling = 1,
  Exploration = 2,
};

inline std::uint64_t substream_seed(std::uint64_t run_seed, Substream s) {
  return derive_seed(run_seed, static_cast<std::uint64_t>(s));
}

}  // namespace tsac
