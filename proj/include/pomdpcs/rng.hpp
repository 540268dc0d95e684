#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace pomdpcs {

/// Mixes a master seed with a stream index so that every worker, path or
/// model draws from an independent, reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// mt19937_64 with platform-independent conversions; the standard
/// distributions are implementation-defined, which would break
/// byte-identical artifacts across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on {0, ..., n - 1}.
  int index(int n) { return static_cast<int>(uniform() * n); }

  double exponential() { return -std::log1p(-uniform()); }

  /// Index drawn from a probability row by inverse CDF.
  template <typename Row>
  int categorical(const Row& probs) {
    const double r = uniform();
    double acc = 0.0;
    const auto n = static_cast<int>(probs.size());
    for (int i = 0; i < n; ++i) {
      acc += probs(i);
      if (r < acc) return i;
    }
    // Round-off can leave acc slightly below one; fall back to the last
    // index with positive mass.
    for (int i = n - 1; i >= 0; --i)
      if (probs(i) > 0.0) return i;
    return n - 1;
  }

  /// Uniform point of the simplex (flat Dirichlet).
  Eigen::VectorXd simplex_point(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = exponential();
    return v / v.sum();
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pomdpcs
