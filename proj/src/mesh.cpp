#include "pomdpcs/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pomdpcs {

namespace {

constexpr double kSnap = 1e-10;

long long orient(const std::array<int, 2>& p, const std::array<int, 2>& q,
                 const std::array<int, 2>& r) {
  return static_cast<long long>(q[0] - p[0]) * (r[1] - p[1]) -
         static_cast<long long>(q[1] - p[1]) * (r[0] - p[0]);
}

}  // namespace

LatticeMesh::LatticeMesh(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_ || grid_->num_states() != 3)
    throw std::invalid_argument("lattice mesh: three-state grid required");
  M_ = grid_->resolution();
  const std::size_t n = grid_->size();
  xy_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = grid_->lattice(i);
    xy_[i] = {k[1], k[2]};
  }
  const auto id = [&](int x, int y) {
    const std::array<int, 3> k = {M_ - x - y, x, y};
    return static_cast<int>(*grid_->index_of(k));
  };
  for (int y = 0; y < M_; ++y) {
    for (int x = 0; x + y < M_; ++x) {
      tris_.push_back({id(x, y), id(x + 1, y), id(x, y + 1)});
      if (x + y + 2 <= M_) tris_.push_back({id(x + 1, y), id(x + 1, y + 1), id(x, y + 1)});
    }
  }
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    for (int s = 0; s < 3; ++s) {
      const int a = tris_[t][s], b = tris_[t][(s + 1) % 3];
      const auto [it, fresh] = edge_of_.try_emplace(key(a, b), edges_.size());
      if (fresh)
        edges_.push_back({std::min(a, b), std::max(a, b), {static_cast<int>(t), -1}});
      else
        edges_[it->second].tri[1] = static_cast<int>(t);
    }
  }
  build_buckets();
}

std::uint64_t LatticeMesh::key(int a, int b) const {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return lo * grid_->size() + hi;
}

int LatticeMesh::opposite(int t, int a, int b) const {
  for (int v : tris_[t])
    if (v != a && v != b) return v;
  return -1;
}

double LatticeMesh::bend(const Edge& e, const std::vector<double>& values) const {
  const int p = opposite(e.tri[0], e.a, e.b);
  const int r = opposite(e.tri[1], e.a, e.b);
  // Barycentric coordinates of r in triangle (a, b, p), exact in integers.
  const auto &A = xy_[e.a], &B = xy_[e.b], &P = xy_[p], &R = xy_[r];
  const double det = static_cast<double>(orient(A, B, P));
  const double la = static_cast<double>(orient(R, B, P)) / det;
  const double lb = static_cast<double>(orient(A, R, P)) / det;
  const double lp = static_cast<double>(orient(A, B, R)) / det;
  return values[r] - (la * values[e.a] + lb * values[e.b] + lp * values[p]);
}

bool LatticeMesh::flippable(const Edge& e) const {
  const int p = opposite(e.tri[0], e.a, e.b);
  const int r = opposite(e.tri[1], e.a, e.b);
  const long long sa = orient(xy_[p], xy_[r], xy_[e.a]);
  const long long sb = orient(xy_[p], xy_[r], xy_[e.b]);
  return (sa > 0 && sb < 0) || (sa < 0 && sb > 0);
}

void LatticeMesh::reindex(int u, int v, int from, int to) {
  auto& tri = edges_[edge_of_.at(key(u, v))].tri;
  for (int& x : tri)
    if (x == from) {
      x = to;
      return;
    }
}

void LatticeMesh::flip(std::size_t ei) {
  Edge& e = edges_[ei];
  const int t0 = e.tri[0], t1 = e.tri[1];
  const int a = e.a, b = e.b;
  const int p = opposite(t0, a, b);
  const int r = opposite(t1, a, b);
  // New triangles (a, r, p) in t0 and (b, p, r) in t1.
  reindex(b, p, t0, t1);
  reindex(a, r, t1, t0);
  const auto ccw = [&](int x, int y, int z) -> std::array<int, 3> {
    return orient(xy_[x], xy_[y], xy_[z]) > 0 ? std::array<int, 3>{x, y, z}
                                              : std::array<int, 3>{x, z, y};
  };
  tris_[t0] = ccw(a, r, p);
  tris_[t1] = ccw(b, p, r);
  edge_of_.erase(key(a, b));
  e.a = std::min(p, r);
  e.b = std::max(p, r);
  edge_of_[key(p, r)] = ei;
}

std::size_t LatticeMesh::make_concave(const std::vector<double>& values, double tolerance) {
  std::size_t flips = 0;
  const std::size_t cap = 64 * edges_.size() + 1024;
  for (bool changed = true; changed && flips < cap;) {
    changed = false;
    for (std::size_t i = 0; i < edges_.size() && flips < cap; ++i) {
      const Edge& e = edges_[i];
      if (e.tri[1] < 0) continue;
      if (bend(e, values) > tolerance && flippable(e)) {
        flip(i);
        ++flips;
        changed = true;
      }
    }
  }
  if (flips > 0) build_buckets();
  return flips;
}

std::size_t LatticeMesh::nonconcave_edges(const std::vector<double>& values,
                                          double tolerance) const {
  std::size_t n = 0;
  for (const auto& e : edges_)
    if (e.tri[1] >= 0 && bend(e, values) > tolerance) ++n;
  return n;
}

void LatticeMesh::build_buckets() {
  const std::size_t nb = static_cast<std::size_t>(M_) * M_;
  std::vector<std::size_t> count(nb + 1, 0);
  const auto each_bucket = [&](const std::array<int, 3>& t, auto&& fn) {
    int x0 = M_, x1 = 0, y0 = M_, y1 = 0;
    for (int v : t) {
      x0 = std::min(x0, xy_[v][0]);
      x1 = std::max(x1, xy_[v][0]);
      y0 = std::min(y0, xy_[v][1]);
      y1 = std::max(y1, xy_[v][1]);
    }
    for (int x = x0; x <= std::min(x1, M_ - 1); ++x)
      for (int y = y0; y <= std::min(y1, M_ - 1); ++y) fn(static_cast<std::size_t>(x) * M_ + y);
  };
  for (const auto& t : tris_) each_bucket(t, [&](std::size_t b) { ++count[b + 1]; });
  for (std::size_t b = 0; b < nb; ++b) count[b + 1] += count[b];
  bucket_offset_ = count;
  bucket_tris_.assign(count[nb], -1);
  std::vector<std::size_t> fill(count.begin(), count.end() - 1);
  for (std::size_t t = 0; t < tris_.size(); ++t)
    each_bucket(tris_[t], [&](std::size_t b) { bucket_tris_[fill[b]++] = static_cast<int>(t); });
}

Stencil LatticeMesh::locate(const Eigen::Ref<const Eigen::VectorXd>& pi) const {
  const auto snap = [&](double v) {
    v = std::clamp(v * M_, 0.0, static_cast<double>(M_));
    const double r = std::round(v);
    return std::abs(v - r) <= kSnap ? r : v;
  };
  const double qx = snap(pi(1)), qy = snap(pi(2));
  const int bx = std::min(static_cast<int>(qx), M_ - 1);
  const int by = std::min(static_cast<int>(qy), M_ - 1);
  const std::size_t b = static_cast<std::size_t>(bx) * M_ + by;

  Stencil best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (std::size_t j = bucket_offset_[b]; j < bucket_offset_[b + 1]; ++j) {
    const auto& t = tris_[bucket_tris_[j]];
    const auto &A = xy_[t[0]], &B = xy_[t[1]], &C = xy_[t[2]];
    const double det = static_cast<double>(orient(A, B, C));
    const auto area = [&](const std::array<int, 2>& u, const std::array<int, 2>& v) {
      return (v[0] - u[0]) * (qy - u[1]) - (v[1] - u[1]) * (qx - u[0]);
    };
    const std::array<double, 3> w = {area(B, C) / det, area(C, A) / det, area(A, B) / det};
    const double lo = std::min({w[0], w[1], w[2]});
    if (lo > best_min) {
      best_min = lo;
      best.count = 3;
      double sum = 0.0;
      for (int s = 0; s < 3; ++s) {
        best.index[s] = static_cast<std::size_t>(t[s]);
        best.weight[s] = std::max(w[s], 0.0);
        sum += best.weight[s];
      }
      for (int s = 0; s < 3; ++s) best.weight[s] /= sum;
      if (lo >= 0.0) break;
    }
  }
  return best;
}

}  // namespace pomdpcs
