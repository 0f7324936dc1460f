#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "kirchnet/network.hpp"

namespace kirchnet {

/// Per-edge uniform mesh: edge e is split into cells[e] >= 1 cells of width
/// spacing[e], with cells[e] * spacing[e] equal to lengths[e].
struct Mesh {
  std::vector<std::size_t> cells;
  std::vector<double> spacing;
  std::vector<double> lengths;

  /// cells = max(1, round(length / h)).
  static Mesh uniform(const Network& net, double h);

  std::size_t edge_count() const noexcept { return cells.size(); }
  double min_spacing() const;
  double max_spacing() const;

  bool operator==(const Mesh&) const = default;
};

/// Nodes: cells[e] + 1 samples per edge at x_i = i * h_e, the first and last
/// sitting on the glued vertices. Cells: cells[e] values per edge, one per cell,
/// interpreted as piecewise constant.
enum class Layout { Nodes, Cells };

using EdgeSampler = std::function<double(std::size_t edge, double x)>;

class GridFunction {
 public:
  GridFunction() = default;
  /// Throws MeshMismatch if the value arrays do not fit the mesh and layout.
  GridFunction(Mesh mesh, Layout layout, std::vector<std::vector<double>> values);

  static GridFunction constant(const Mesh& mesh, Layout layout, double value);
  static GridFunction sample(const Mesh& mesh, Layout layout, const EdgeSampler& f);

  const Mesh& mesh() const noexcept { return mesh_; }
  Layout layout() const noexcept { return layout_; }
  std::size_t edge_count() const noexcept { return values_.size(); }

  std::span<const double> values(std::size_t e) const { return values_.at(e); }
  double value(std::size_t e, std::size_t i) const { return values_.at(e).at(i); }
  /// Node position, or cell centre for the Cells layout.
  double coordinate(std::size_t e, std::size_t i) const;
  double max_abs() const;

  friend GridFunction linear_combination(double a, const GridFunction& f, double b,
                                         const GridFunction& g);
  friend GridFunction pointwise_product(const GridFunction& f, const GridFunction& g);

 private:
  Mesh mesh_;
  Layout layout_ = Layout::Nodes;
  std::vector<std::vector<double>> values_;
};

GridFunction linear_combination(double a, const GridFunction& f, double b, const GridFunction& g);
GridFunction pointwise_product(const GridFunction& f, const GridFunction& g);

struct Atom {
  NetworkPoint point;
  double weight = 0.0;
};

/// Finite atomic measure; atoms must be canonical points with positive weight.
struct DiscreteMeasure {
  std::vector<Atom> atoms;

  double total_weight() const;
};

/// Throws MeshMismatch unless `mesh` was built for `net`'s edges.
void require_mesh_fits(const Network& net, const Mesh& mesh);

}  // namespace kirchnet
