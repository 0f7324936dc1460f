#include "kirchnet/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "kirchnet/error.hpp"
#include "text_util.hpp"

namespace kirchnet {

namespace {

void require_nodes(const GridFunction& f, const char* what) {
  if (f.layout() != Layout::Nodes)
    throw Error(ErrorKind::MeshMismatch, std::string(what) + " needs nodal samples");
}

void require_same_grid(const GridFunction& f, const GridFunction& g) {
  if (!(f.mesh() == g.mesh()) || f.layout() != g.layout())
    throw Error(ErrorKind::MeshMismatch, "grid functions live on different meshes");
}

// Derivative in the tail-to-head direction at the tail or head node.
double end_derivative(std::span<const double> v, double h, EndSide side) {
  const std::size_t n = v.size() - 1;
  if (n == 1) return (v[1] - v[0]) / h;
  if (side == EndSide::Tail) return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  return (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
}

double end_value(std::span<const double> v, EndSide side) {
  return side == EndSide::Tail ? v.front() : v.back();
}

}  // namespace

double total_measure(const Network& net) { return net.total_length(); }

double integrate(const Network& net, const GridFunction& f) {
  require_mesh_fits(net, f.mesh());
  double total = 0.0;
  for (std::size_t e = 0; e < f.edge_count(); ++e) {
    const auto v = f.values(e);
    const double h = f.mesh().spacing[e];
    double sum = 0.0;
    if (f.layout() == Layout::Nodes) {
      sum = 0.5 * (v.front() + v.back());
      for (std::size_t i = 1; i + 1 < v.size(); ++i) sum += v[i];
    } else {
      for (double x : v) sum += x;
    }
    total += h * sum;
  }
  return total;
}

C1Report check_c1(const Network& net, const GridFunction& f, double tol) {
  require_mesh_fits(net, f.mesh());
  require_nodes(f, "check_c1");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");

  C1Report report;
  const double threshold = tol * (1.0 + f.max_abs());

  for (std::size_t v = 0; v < net.vertex_count(); ++v) {
    const auto ends = net.ends(v);

    double lo = end_value(f.values(ends[0].edge), ends[0].side);
    double hi = lo;
    for (const EdgeEnd& end : ends) {
      const double x = end_value(f.values(end.edge), end.side);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    const double mismatch = hi - lo;
    report.worst_mismatch = std::max(report.worst_mismatch, mismatch);
    if (mismatch > tol) {
      report.continuous = false;
      report.continuity_failures.push_back({v, mismatch});
    }

    // Derivative of f along the edge, leaving the vertex.
    auto outward = [&](const EdgeEnd& end) {
      const double d = end_derivative(f.values(end.edge), f.mesh().spacing[end.edge], end.side);
      return end.side == EndSide::Tail ? d : -d;
    };

    if (ends.size() >= 3) {
      for (const EdgeEnd& end : ends) {
        const double d = outward(end);
        if (std::abs(d) > threshold)
          report.violations.push_back({v, end.edge, end.side, std::abs(d)});
      }
    } else if (ends.size() == 2) {
      // A path through the vertex arrives along one end and leaves along the
      // other, so the outward derivatives must cancel.
      const double jump = outward(ends[0]) + outward(ends[1]);
      if (std::abs(jump) > threshold)
        report.violations.push_back({v, ends[1].edge, ends[1].side, std::abs(jump)});
    }
  }
  return report;
}

GridFunction spatial_derivative(const Network& net, const GridFunction& f) {
  require_mesh_fits(net, f.mesh());
  require_nodes(f, "spatial_derivative");
  std::vector<std::vector<double>> out(f.edge_count());
  for (std::size_t e = 0; e < f.edge_count(); ++e) {
    const auto v = f.values(e);
    const double h = f.mesh().spacing[e];
    const std::size_t n = v.size() - 1;
    auto& d = out[e];
    d.resize(n + 1);
    d[0] = end_derivative(v, h, EndSide::Tail);
    d[n] = end_derivative(v, h, EndSide::Head);
    for (std::size_t i = 1; i < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  }
  return GridFunction(f.mesh(), Layout::Nodes, std::move(out));
}

double edgewise_boundary_sum(const Network& net, const GridFunction& f, const GridFunction& g) {
  require_mesh_fits(net, f.mesh());
  require_same_grid(f, g);
  require_nodes(f, "boundary sum");
  double sum = 0.0;
  for (std::size_t e = 0; e < net.edge_count(); ++e)
    sum += f.values(e).back() * g.values(e).back() - f.values(e).front() * g.values(e).front();
  return sum;
}

double vertexwise_boundary_sum(const Network& net, const GridFunction& f, const GridFunction& g) {
  require_mesh_fits(net, f.mesh());
  require_same_grid(f, g);
  require_nodes(f, "boundary sum");
  double sum = 0.0;
  for (std::size_t v = 0; v < net.vertex_count(); ++v) {
    const Incidence& inc = net.incidence(v);
    double in = 0.0;
    double out = 0.0;
    for (std::size_t e : inc.in) in += f.values(e).back() * g.values(e).back();
    for (std::size_t e : inc.out) out += f.values(e).front() * g.values(e).front();
    sum += in - out;
  }
  return sum;
}

double integration_by_parts_residual(const Network& net, const GridFunction& f,
                                     const GridFunction& g) {
  require_same_grid(f, g);
  const GridFunction df = spatial_derivative(net, f);
  const GridFunction dg = spatial_derivative(net, g);
  const GridFunction integrand =
      linear_combination(1.0, pointwise_product(df, g), 1.0, pointwise_product(f, dg));
  return std::abs(integrate(net, integrand) - edgewise_boundary_sum(net, f, g));
}

double product_rule_residual(const Network& net, const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g);
  const GridFunction dfg = spatial_derivative(net, pointwise_product(f, g));
  const GridFunction rhs = linear_combination(1.0, pointwise_product(spatial_derivative(net, f), g),
                                              1.0, pointwise_product(f, spatial_derivative(net, g)));
  double worst = 0.0;
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const auto a = dfg.values(e);
    const auto b = rhs.values(e);
    for (std::size_t i = 1; i + 1 < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

GridFunction bin_discrete_measure(const Network& net, const DiscreteMeasure& m, double h) {
  const Mesh mesh = Mesh::uniform(net, h);
  std::vector<std::vector<double>> values(net.edge_count());
  for (std::size_t e = 0; e < net.edge_count(); ++e) values[e].assign(mesh.cells[e], 0.0);

  for (const Atom& atom : m.atoms) {
    if (!(atom.weight > 0.0))
      throw Error(ErrorKind::InvalidArgument, "atom weights must be positive");
    std::size_t edge = 0;
    std::size_t cell = 0;
    if (const auto* vp = std::get_if<VertexPoint>(&atom.point)) {
      if (vp->vertex >= net.vertex_count())
        throw Error(ErrorKind::AtomOffNetwork, "vertex index " + std::to_string(vp->vertex));
      const EdgeEnd end = net.ends(vp->vertex).front();
      edge = end.edge;
      cell = end.side == EndSide::Tail ? 0 : mesh.cells[edge] - 1;
    } else {
      const auto& ep = std::get<EdgePoint>(atom.point);
      if (ep.edge >= net.edge_count() || !(ep.x > 0.0 && ep.x < net.edge(ep.edge).length))
        throw Error(ErrorKind::AtomOffNetwork, "atom is not a canonical point of the network");
      edge = ep.edge;
      cell = std::min(static_cast<std::size_t>(ep.x / mesh.spacing[edge]), mesh.cells[edge] - 1);
    }
    values[edge][cell] += atom.weight / mesh.spacing[edge];
  }
  return GridFunction(mesh, Layout::Cells, std::move(values));
}

void write_grid_function_csv(std::ostream& out, const Network& net, const GridFunction& f) {
  require_mesh_fits(net, f.mesh());
  out << "edge,x,value\n";
  for (std::size_t e = 0; e < f.edge_count(); ++e) {
    const auto v = f.values(e);
    for (std::size_t i = 0; i < v.size(); ++i)
      out << net.edge(e).key << ',' << detail::format_double(f.coordinate(e, i)) << ','
          << detail::format_double(v[i]) << '\n';
  }
}

DiscreteMeasure read_discrete_measure_csv(std::istream& in, const Network& net,
                                          const std::string& source) {
  DiscreteMeasure m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = detail::split(body, ',');
    if (fields.size() != 3) throw ParseError(source, line_no, "expected edge,x,weight");
    const auto x = detail::parse_double(fields[1]);
    const auto w = detail::parse_double(fields[2]);
    if (!x || !w) {
      if (line_no == 1) continue;  // header
      throw ParseError(source, line_no, "coordinate and weight must be numbers");
    }
    if (!(*w > 0.0)) throw ParseError(source, line_no, "weight must be positive");
    const auto edge = net.find_edge(fields[0]);
    if (!edge)
      throw Error(ErrorKind::AtomOffNetwork,
                  source + ":" + std::to_string(line_no) + ": unknown edge '" +
                      std::string(fields[0]) + "'");
    if (!(*x >= 0.0 && *x <= net.edge(*edge).length))
      throw Error(ErrorKind::AtomOffNetwork,
                  source + ":" + std::to_string(line_no) + ": coordinate outside edge");
    m.atoms.push_back({locate(net, *edge, *x), *w});
  }
  return m;
}

}  // namespace kirchnet
