#include "pomdpcs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pomdpcs/errors.hpp"
#include "pomdpcs/mesh.hpp"

namespace pomdpcs {

namespace {

// Cumulative coordinates within this distance of an integer are snapped so
// lattice points interpolate exactly.
constexpr double kSnap = 1e-10;

}  // namespace

std::uint64_t SimplexGrid::point_count(int num_states, int resolution) {
  // C(M + X - 1, X - 1) computed incrementally; every prefix is itself a
  // binomial coefficient so the division is exact.
  const int k = num_states - 1;
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(resolution) + i;
    if (c > std::numeric_limits<std::uint64_t>::max() / num)
      return std::numeric_limits<std::uint64_t>::max();
    c = c * num / i;
  }
  return c;
}

SimplexGrid::SimplexGrid(int num_states, int resolution)
    : dim_(num_states), resolution_(resolution) {}

std::shared_ptr<const SimplexGrid> SimplexGrid::build(int num_states, int resolution,
                                                      std::size_t point_cap) {
  if (num_states < 2 || num_states > kMaxGridStates)
    throw std::invalid_argument("build_grid: number of states must be in [2, " +
                                std::to_string(kMaxGridStates) + "], got " +
                                std::to_string(num_states));
  if (resolution < 1)
    throw std::invalid_argument("build_grid: resolution must be >= 1, got " +
                                std::to_string(resolution));
  const std::uint64_t n = point_count(num_states, resolution);
  if (n > point_cap)
    throw ResourceLimit("build_grid: " + std::to_string(n) + " points exceed the cap of " +
                        std::to_string(point_cap));

  std::shared_ptr<SimplexGrid> g(new SimplexGrid(num_states, resolution));
  const int X = num_states;
  const int M = resolution;
  g->size_ = static_cast<std::size_t>(n);

  g->binom_.assign(static_cast<std::size_t>(M + X + 1) * (X + 1), 0);
  for (int a = 0; a <= M + X; ++a) {
    g->binom_[a * (X + 1)] = 1;
    for (int b = 1; b <= std::min(a, X); ++b) {
      const std::uint64_t left = (b <= a - 1) ? g->binom_[(a - 1) * (X + 1) + b] : 0;
      g->binom_[a * (X + 1) + b] = g->binom_[(a - 1) * (X + 1) + b - 1] + left;
    }
  }

  g->lattice_.reserve(g->size_ * X);
  g->points_.reserve(g->size_ * X);
  std::vector<int> k(X, 0);
  // Fill k_X, k_{X-1}, ..., k_2 in increasing lexicographic order.
  auto fill = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == 0) {
      k[0] = remaining;
      for (int i = 0; i < X; ++i) {
        g->lattice_.push_back(k[i]);
        g->points_.push_back(static_cast<double>(k[i]) / M);
      }
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      k[pos] = v;
      self(self, pos - 1, remaining - v);
    }
  };
  fill(fill, X - 1, M);
  return g;
}

std::size_t SimplexGrid::rank(std::span<const int> k) const {
  std::size_t r = 0;
  int remaining = resolution_;
  for (int p = dim_ - 1; p >= 1; --p) {
    // Points whose coordinate p is smaller, with `p` free coordinates below:
    // C(rem + p, p) - C(rem - k_p + p, p).
    r += binom(remaining + p, p) - binom(remaining - k[p] + p, p);
    remaining -= k[p];
  }
  return r;
}

std::optional<std::size_t> SimplexGrid::index_of(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != dim_) return std::nullopt;
  int total = 0;
  for (int v : k) {
    if (v < 0) return std::nullopt;
    total += v;
  }
  if (total != resolution_) return std::nullopt;
  return rank(k);
}

Stencil SimplexGrid::locate(const Eigen::Ref<const Eigen::VectorXd>& pi) const {
  const int d = dim_ - 1;
  const int M = resolution_;
  std::array<double, kMaxGridStates> z{};
  std::array<int, kMaxGridStates> base{};
  std::array<double, kMaxGridStates> frac{};
  double acc = 0.0;
  for (int j = 0; j < d; ++j) {
    acc += pi(j);
    double zj = std::clamp(acc * M, 0.0, static_cast<double>(M));
    if (j > 0) zj = std::max(zj, z[j - 1]);
    const double r = std::round(zj);
    if (std::abs(zj - r) <= kSnap) zj = r;
    z[j] = zj;
    base[j] = std::clamp(static_cast<int>(std::floor(zj)), 0, M - 1);
    frac[j] = zj - base[j];
  }

  // Kuhn simplex: walk the cube from `base`, raising coordinates in order of
  // decreasing fractional part. Equal parts raise the higher coordinate
  // first so every vertex stays in the ordered region.
  std::array<int, kMaxGridStates> order{};
  std::iota(order.begin(), order.begin() + d, 0);
  std::sort(order.begin(), order.begin() + d, [&](int a, int b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a > b;
  });

  Stencil s;
  s.count = d + 1;
  std::array<int, kMaxGridStates> vz = base;
  std::array<int, kMaxGridStates> k{};
  auto vertex_index = [&]() {
    int prev = 0;
    for (int j = 0; j < d; ++j) {
      k[j] = vz[j] - prev;
      prev = vz[j];
    }
    k[d] = M - prev;
    return rank(std::span<const int>(k.data(), dim_));
  };
  s.index[0] = vertex_index();
  s.weight[0] = 1.0 - frac[order[0]];
  for (int step = 1; step <= d; ++step) {
    vz[order[step - 1]] += 1;
    s.index[step] = vertex_index();
    s.weight[step] = frac[order[step - 1]] - (step < d ? frac[order[step]] : 0.0);
  }
  return s;
}

std::size_t SimplexGrid::nearest(const Eigen::Ref<const Eigen::VectorXd>& pi) const {
  std::array<int, kMaxGridStates> k{};
  std::array<double, kMaxGridStates> rem{};
  int total = 0;
  for (int i = 0; i < dim_; ++i) {
    const double scaled = std::max(0.0, pi(i)) * resolution_;
    k[i] = static_cast<int>(std::floor(scaled));
    rem[i] = scaled - k[i];
    total += k[i];
  }
  std::array<int, kMaxGridStates> order{};
  std::iota(order.begin(), order.begin() + dim_, 0);
  std::stable_sort(order.begin(), order.begin() + dim_,
                   [&](int a, int b) { return rem[a] > rem[b]; });
  for (int i = 0; total < resolution_; i = (i + 1) % dim_, ++total) k[order[i]] += 1;
  for (int i = dim_ - 1; total > resolution_; i = (i + dim_ - 1) % dim_) {
    if (k[order[i]] > 0) {
      k[order[i]] -= 1;
      --total;
    }
  }
  return rank(std::span<const int>(k.data(), dim_));
}

ValueFunction::ValueFunction(GridPtr grid, std::vector<double> values, MeshPtr mesh)
    : grid_(std::move(grid)), values_(std::move(values)), mesh_(std::move(mesh)) {
  if (!grid_ || values_.size() != grid_->size())
    throw DimensionMismatch("value function: one value per grid point required");
  if (mesh_ && &mesh_->grid() != grid_.get())
    throw DimensionMismatch("value function: mesh belongs to a different grid");
}

Stencil ValueFunction::locate(const Eigen::Ref<const Eigen::VectorXd>& pi) const {
  return mesh_ ? mesh_->locate(pi) : grid_->locate(pi);
}

double ValueFunction::evaluate(const Stencil& s) const {
  double v = 0.0;
  for (int j = 0; j < s.count; ++j) v += s.weight[j] * values_[s.index[j]];
  return v;
}

double ValueFunction::operator()(const Eigen::Ref<const Eigen::VectorXd>& pi) const {
  return evaluate(locate(pi));
}

double ValueFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double RelaxedValueFunction::operator()(const Eigen::Ref<const Eigen::VectorXd>& alpha) const {
  const double mass = alpha.sum();
  if (!(mass > 0.0)) return 0.0;
  return mass * base_(alpha / mass);
}

Policy::Policy(GridPtr grid, std::vector<int> actions, std::optional<double> threshold)
    : grid_(std::move(grid)), actions_(std::move(actions)), threshold_(threshold) {
  if (!grid_ || actions_.size() != grid_->size())
    throw DimensionMismatch("policy: one action per grid point required");
}

int Policy::operator()(const Eigen::Ref<const Eigen::VectorXd>& pi) const {
  return actions_[grid_->nearest(pi)];
}

}  // namespace pomdpcs
