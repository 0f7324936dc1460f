#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "kirchnet/grid_function.hpp"
#include "kirchnet/network.hpp"

namespace kirchnet {

/// Lebesgue measure of the whole network: the sum of edge lengths.
double total_measure(const Network& net);

/// Composite trapezoid per edge for nodal data; exact cell sums for cell data.
double integrate(const Network& net, const GridFunction& f);

struct ContinuityFailure {
  std::size_t vertex = 0;
  double mismatch = 0.0;
};

struct DerivativeViolation {
  std::size_t vertex = 0;
  std::size_t edge = 0;
  EndSide side = EndSide::Tail;
  /// Derivative pointing away from the vertex into the edge. For degree-2
  /// vertices this holds the mismatch between the two sides instead.
  double magnitude = 0.0;
};

struct C1Report {
  bool continuous = true;
  double worst_mismatch = 0.0;
  std::vector<ContinuityFailure> continuity_failures;
  std::vector<DerivativeViolation> violations;

  bool passes() const noexcept { return continuous && violations.empty(); }
};

/// Vertex-local test of continuous differentiability. Continuity: all edge-end
/// samples at a vertex agree within tol. Derivatives: with
/// threshold = tol * (1 + max|f|), every one-sided derivative at a vertex of
/// degree >= 3 must be at most threshold in magnitude, and at degree-2
/// vertices the path derivative must agree across the vertex.
C1Report check_c1(const Network& net, const GridFunction& f, double tol);

/// Derivative in the tail-to-head direction of each edge. Central differences
/// inside, second-order one-sided differences at the edge ends (first order
/// when an edge has a single cell). Nodal data only.
GridFunction spatial_derivative(const Network& net, const GridFunction& f);

/// Sum over edges of (fg)(head) - (fg)(tail).
double edgewise_boundary_sum(const Network& net, const GridFunction& f, const GridFunction& g);
/// Sum over vertices of sum_in (fg)(v) - sum_out (fg)(v); equals the edgewise sum.
double vertexwise_boundary_sum(const Network& net, const GridFunction& f, const GridFunction& g);

/// |int (Df g + f Dg) - sum_e [(fg)(head) - (fg)(tail)]|.
double integration_by_parts_residual(const Network& net, const GridFunction& f,
                                     const GridFunction& g);

/// Max over interior nodes of |D(fg) - (Df g + f Dg)|.
double product_rule_residual(const Network& net, const GridFunction& f, const GridFunction& g);

/// Piecewise-constant density on cells of `Mesh::uniform(net, h)`; each atom's
/// weight is spread over the cell containing it. Atoms on a vertex go to the
/// adjacent cell of the first edge end glued there.
GridFunction bin_discrete_measure(const Network& net, const DiscreteMeasure& m, double h);

/// CSV `edge,x,value` with header; nodes or cell centres per the layout.
void write_grid_function_csv(std::ostream& out, const Network& net, const GridFunction& f);
/// CSV `edge,x,weight` with header. Throws AtomOffNetwork or ParseError.
DiscreteMeasure read_discrete_measure_csv(std::istream& in, const Network& net,
                                          const std::string& source = "<measure>");

}  // namespace kirchnet
