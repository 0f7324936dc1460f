#include "kirchnet/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kirchnet/error.hpp"

namespace kirchnet {

Mesh Mesh::uniform(const Network& net, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorKind::InvalidArgument, "mesh width must be positive");
  Mesh mesh;
  mesh.cells.reserve(net.edge_count());
  mesh.spacing.reserve(net.edge_count());
  for (const Edge& e : net.edges()) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(e.length / h)));
    mesh.cells.push_back(n);
    mesh.spacing.push_back(e.length / static_cast<double>(n));
    mesh.lengths.push_back(e.length);
  }
  return mesh;
}

double Mesh::min_spacing() const {
  return spacing.empty() ? 0.0 : *std::min_element(spacing.begin(), spacing.end());
}

double Mesh::max_spacing() const {
  return spacing.empty() ? 0.0 : *std::max_element(spacing.begin(), spacing.end());
}

void require_mesh_fits(const Network& net, const Mesh& mesh) {
  if (mesh.cells.size() != net.edge_count() || mesh.spacing.size() != net.edge_count() ||
      mesh.lengths.size() != net.edge_count())
    throw Error(ErrorKind::MeshMismatch, "mesh has " + std::to_string(mesh.cells.size()) +
                                             " edges, network has " +
                                             std::to_string(net.edge_count()));
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const double len = net.edge(e).length;
    if (mesh.cells[e] == 0 || mesh.lengths[e] != len ||
        std::abs(static_cast<double>(mesh.cells[e]) * mesh.spacing[e] - len) > 1e-12 * len)
      throw Error(ErrorKind::MeshMismatch, "mesh does not cover edge '" + net.edge(e).key + "'");
  }
}

GridFunction::GridFunction(Mesh mesh, Layout layout, std::vector<std::vector<double>> values)
    : mesh_(std::move(mesh)), layout_(layout), values_(std::move(values)) {
  if (mesh_.spacing.size() != mesh_.cells.size() || mesh_.lengths.size() != mesh_.cells.size())
    throw Error(ErrorKind::MeshMismatch, "inconsistent mesh arrays");
  if (values_.size() != mesh_.edge_count())
    throw Error(ErrorKind::MeshMismatch, "value arrays do not match mesh edge count");
  for (std::size_t e = 0; e < values_.size(); ++e) {
    const std::size_t expected = mesh_.cells[e] + (layout_ == Layout::Nodes ? 1 : 0);
    if (values_[e].size() != expected)
      throw Error(ErrorKind::MeshMismatch, "edge " + std::to_string(e) + " has " +
                                               std::to_string(values_[e].size()) +
                                               " samples, expected " + std::to_string(expected));
  }
}

GridFunction GridFunction::constant(const Mesh& mesh, Layout layout, double value) {
  return sample(mesh, layout, [value](std::size_t, double) { return value; });
}

GridFunction GridFunction::sample(const Mesh& mesh, Layout layout, const EdgeSampler& f) {
  std::vector<std::vector<double>> values(mesh.edge_count());
  for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
    const std::size_t n = mesh.cells[e];
    const double h = mesh.spacing[e];
    if (layout == Layout::Nodes) {
      values[e].resize(n + 1);
      for (std::size_t i = 0; i <= n; ++i)
        values[e][i] = f(e, i == n ? mesh.lengths[e] : h * static_cast<double>(i));
    } else {
      values[e].resize(n);
      for (std::size_t i = 0; i < n; ++i) values[e][i] = f(e, h * (static_cast<double>(i) + 0.5));
    }
  }
  return GridFunction(mesh, layout, std::move(values));
}

double GridFunction::coordinate(std::size_t e, std::size_t i) const {
  const double h = mesh_.spacing.at(e);
  if (layout_ == Layout::Nodes)
    return i == mesh_.cells.at(e) ? mesh_.lengths[e] : h * static_cast<double>(i);
  return h * (static_cast<double>(i) + 0.5);
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (const auto& edge : values_)
    for (double v : edge) m = std::max(m, std::abs(v));
  return m;
}

namespace {

void require_same_grid(const GridFunction& f, const GridFunction& g) {
  if (!(f.mesh() == g.mesh()) || f.layout() != g.layout())
    throw Error(ErrorKind::MeshMismatch, "grid functions live on different meshes");
}

}  // namespace

GridFunction linear_combination(double a, const GridFunction& f, double b, const GridFunction& g) {
  require_same_grid(f, g);
  auto values = f.values_;
  for (std::size_t e = 0; e < values.size(); ++e)
    for (std::size_t i = 0; i < values[e].size(); ++i)
      values[e][i] = a * f.values_[e][i] + b * g.values_[e][i];
  return GridFunction(f.mesh_, f.layout_, std::move(values));
}

GridFunction pointwise_product(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g);
  auto values = f.values_;
  for (std::size_t e = 0; e < values.size(); ++e)
    for (std::size_t i = 0; i < values[e].size(); ++i) values[e][i] *= g.values_[e][i];
  return GridFunction(f.mesh_, f.layout_, std::move(values));
}

double DiscreteMeasure::total_weight() const {
  double sum = 0.0;
  for (const Atom& a : atoms) sum += a.weight;
  return sum;
}

}  // namespace kirchnet
