#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pomdpcs {

inline constexpr int kMaxGridStates = 6;
inline constexpr std::size_t kDefaultPointCap = 2'000'000;

/// Vertices and barycentric weights of the cell containing a belief.
struct Stencil {
  int count = 0;
  std::array<std::size_t, kMaxGridStates> index{};
  std::array<double, kMaxGridStates> weight{};
};

/// Uniform lattice {k / M : k in N^X, sum k = M} on the probability simplex.
///
/// Cells come from the Freudenthal triangulation in cumulative coordinates
/// z_j = M (pi(1) + ... + pi(j)), which maps the simplex onto the ordered
/// region 0 <= z_1 <= ... <= z_{X-1} <= M; every cell of the unit-cube
/// triangulation of that region has lattice vertices.
///
/// Points are ordered lexicographically by (k_X, k_{X-1}, ..., k_2), so for
/// two states point k is [1 - k/M, k/M].
class SimplexGrid {
 public:
  /// Throws std::invalid_argument for X outside [2, 6] or M < 1, and
  /// ResourceLimit when the point count exceeds `point_cap`.
  static std::shared_ptr<const SimplexGrid> build(int num_states, int resolution,
                                                  std::size_t point_cap = kDefaultPointCap);

  /// C(M + X - 1, X - 1), saturating at UINT64_MAX.
  static std::uint64_t point_count(int num_states, int resolution);

  int num_states() const { return dim_; }
  int resolution() const { return resolution_; }
  std::size_t size() const { return size_; }

  /// Lattice coordinates k (summing to M) of a point.
  std::span<const int> lattice(std::size_t i) const {
    return {lattice_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  Eigen::Map<const Eigen::VectorXd> point(std::size_t i) const {
    return Eigen::Map<const Eigen::VectorXd>(points_.data() + i * dim_, dim_);
  }

  /// Index of the point with lattice coordinates k, or nullopt when k is not
  /// on the lattice.
  std::optional<std::size_t> index_of(std::span<const int> k) const;

  /// Cell containing pi with barycentric weights (nonnegative, summing to 1).
  /// At a lattice point the stencil puts weight exactly 1 on that point.
  Stencil locate(const Eigen::Ref<const Eigen::VectorXd>& pi) const;

  /// Lattice point closest to pi (largest-remainder rounding of M pi).
  std::size_t nearest(const Eigen::Ref<const Eigen::VectorXd>& pi) const;

 private:
  SimplexGrid(int num_states, int resolution);
  std::uint64_t binom(int n, int k) const { return binom_[n * (dim_ + 1) + k]; }
  std::size_t rank(std::span<const int> k) const;

  int dim_;
  int resolution_;
  std::size_t size_ = 0;
  std::vector<int> lattice_;
  std::vector<double> points_;
  std::vector<std::uint64_t> binom_;
};

using GridPtr = std::shared_ptr<const SimplexGrid>;

class LatticeMesh;
using MeshPtr = std::shared_ptr<const LatticeMesh>;

/// Grid values with barycentric interpolation, over the grid's Freudenthal
/// cells or, when given, over a flipped mesh of the same grid.
class ValueFunction {
 public:
  ValueFunction(GridPtr grid, std::vector<double> values, MeshPtr mesh = nullptr);

  const SimplexGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double at_point(std::size_t i) const { return values_[i]; }

  const MeshPtr& mesh() const { return mesh_; }

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& pi) const;
  double evaluate(const Stencil& s) const;
  Stencil locate(const Eigen::Ref<const Eigen::VectorXd>& pi) const;
  /// max |V| over the grid.
  double sup_norm() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
  MeshPtr mesh_;
};

/// Homogeneous extension W(alpha) = |alpha|_1 V(alpha / |alpha|_1) of a grid
/// value function to the positive orthant, with W(0) = 0.
class RelaxedValueFunction {
 public:
  explicit RelaxedValueFunction(ValueFunction base) : base_(std::move(base)) {}

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& alpha) const;
  const ValueFunction& on_simplex() const { return base_; }

 private:
  ValueFunction base_;
};

/// Action per grid point (1-based actions).
class Policy {
 public:
  Policy(GridPtr grid, std::vector<int> actions, std::optional<double> threshold = std::nullopt);

  const SimplexGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<int>& actions() const { return actions_; }
  int at_point(std::size_t i) const { return actions_[i]; }

  /// Action of the nearest grid point.
  int operator()(const Eigen::Ref<const Eigen::VectorXd>& pi) const;

  /// Threshold pi* on pi(2) for two-state stopping policies with a single
  /// stop-to-continue switch.
  const std::optional<double>& threshold() const { return threshold_; }

 private:
  GridPtr grid_;
  std::vector<int> actions_;
  std::optional<double> threshold_;
};

}  // namespace pomdpcs
