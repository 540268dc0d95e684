#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pomdpcs/grid.hpp"

namespace pomdpcs {

/// Triangulation of a three-state grid whose diagonals can be flipped.
///
/// Starts as the Freudenthal triangulation used by SimplexGrid::locate. Every
/// triangle is a unimodular lattice triangle, so interpolation still returns
/// stored values exactly at grid points. make_concave flips diagonals until
/// the piecewise-linear interpolant of the given values is concave across
/// every interior edge; when that succeeds the interpolant is the smallest
/// concave function through the data.
class LatticeMesh {
 public:
  /// Throws std::invalid_argument unless the grid has three states.
  explicit LatticeMesh(GridPtr grid);

  const SimplexGrid& grid() const { return *grid_; }
  std::size_t triangle_count() const { return tris_.size(); }

  /// Flips edges where the interpolant bends upward by more than `tolerance`
  /// and the adjacent triangles form a convex quadrilateral. Returns the
  /// number of flips. Terminates because each flip raises the interpolant.
  std::size_t make_concave(const std::vector<double>& values, double tolerance);

  /// Interior edges that still bend upward by more than `tolerance`.
  std::size_t nonconcave_edges(const std::vector<double>& values, double tolerance) const;

  /// Triangle containing pi with barycentric weights.
  Stencil locate(const Eigen::Ref<const Eigen::VectorXd>& pi) const;

 private:
  struct Edge {
    int a, b;
    std::array<int, 2> tri;  // -1 on the boundary
  };

  std::uint64_t key(int a, int b) const;
  // Upward bend of the interpolant across edge e: value at the far vertex of
  // tri[1] minus the extension of tri[0]'s plane there.
  double bend(const Edge& e, const std::vector<double>& values) const;
  int opposite(int t, int a, int b) const;
  bool flippable(const Edge& e) const;
  void flip(std::size_t e);
  void reindex(int u, int v, int from, int to);
  void build_buckets();

  GridPtr grid_;
  int M_;
  std::vector<std::array<int, 2>> xy_;  // (k_2, k_3) per grid point
  std::vector<std::array<int, 3>> tris_;  // counterclockwise in (k_2, k_3)
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> edge_of_;
  std::vector<std::size_t> bucket_offset_;
  std::vector<int> bucket_tris_;
};

}  // namespace pomdpcs
