#ifndef NPSPECTRA_GEOMETRY_HPP
#define NPSPECTRA_GEOMETRY_HPP

#include <memory>
#include <optional>
#include <vector>

#include "npspectra/mobius.hpp"
#include "npspectra/types.hpp"

namespace npspectra {

// ---------------------------------------------------------------------------
// Domain descriptions.
//
// Boundaries are counterclockwise chains of straight segments and circular
// arcs, or a single smooth closed curve (ellipse). Arc edges carry a bulge
// b = tan(arc_angle/4); positive bulge sweeps counterclockwise about the arc
// centre (left-turning, positive curvature). This family is closed under
// fractional linear maps.
// ---------------------------------------------------------------------------

enum class DomainKind { ellipse, polygon, arc_polygon };

struct DomainSpec {
  DomainKind kind = DomainKind::polygon;
  // ellipse: axis-aligned, semi-axes a >= b > 0, centred at `center`.
  double a = 1.0, b = 1.0;
  Complex center{0.0, 0.0};
  // polygon / arc_polygon: CCW vertices; bulges[k] belongs to the edge from
  // vertices[k] to vertices[k+1 mod n]; bulge 0 is a straight segment.
  std::vector<Complex> vertices;
  std::vector<double> bulges;
  std::optional<Complex> anchor;  // star centre override for area quadrature
  double scale_applied = 1.0;     // set by rescale_to_normal
};

// Presets. All are validated CCW chains.
DomainSpec disk_spec(double radius);
DomainSpec ellipse_spec(double a, double b);
DomainSpec square_spec(double side);
DomainSpec rectangle_spec(double width, double height);
DomainSpec regular_ngon_spec(int n, double circumradius);
// Circular sector: vertex of angle theta at the origin, closed by an arc of
// the given radius. Remaining two interior angles are pi/2.
DomainSpec truncated_wedge_spec(double theta, double cap_radius);
// Symmetric two-arc lens with both vertex angles equal to theta (a circular
// arc meets its chord at equal angles at both ends, so a two-arc lens cannot
// have two different vertex angles).
DomainSpec lens_spec(double theta, double chord = 1.0);
DomainSpec polygon_spec(std::vector<Complex> vertices);
DomainSpec arc_polygon_spec(std::vector<Complex> vertices, std::vector<double> bulges);

// Throws GeometryError: angle outside (0, 2pi), nonpositive signed area,
// degenerate edges, bulge magnitude beyond the supported arc range.
void validate_spec(const DomainSpec& spec);

std::vector<double> interior_angles(const DomainSpec& spec);  // empty for ellipse
double signed_area(const DomainSpec& spec);
Complex centroid(const DomainSpec& spec);
bool contains(const DomainSpec& spec, Complex z);

// Similarity transform into the disk of radius 1/2 about the origin
// (logarithmic capacity < 1, so single layer matrices stay positive
// definite). A domain already inside the target disk is returned unchanged
// with scale_applied = 1.
DomainSpec rescale_to_normal(const DomainSpec& spec);

// ---------------------------------------------------------------------------
// Parametrized geometry handles.
// ---------------------------------------------------------------------------

class Edge {
 public:
  virtual ~Edge() = default;
  virtual Complex point(double t) const = 0;       // t in [0,1]
  virtual Complex derivative(double t) const = 0;  // dz/dt
  virtual double curvature(double t) const = 0;    // signed, left-turn positive
};
using EdgePtr = std::shared_ptr<const Edge>;

class Domain {
 public:
  virtual ~Domain() = default;
  virtual bool contains(Complex z) const = 0;

  std::vector<EdgePtr> edges;     // CCW chain; edge k runs vertex k -> k+1
  std::vector<Complex> vertices;  // empty when the boundary is one closed curve
  Complex anchor{0.0, 0.0};
  bool smooth_closed = false;

  std::vector<double> interior_angles() const;
};
using DomainPtr = std::shared_ptr<const Domain>;

DomainPtr make_domain(const DomainSpec& spec);

// Image of `base` (or of its exterior) under L. For the exterior image the
// pole of L must lie inside `base`, the traversal is reversed so the image is
// again CCW, and `anchor` defaults to L(infinity) = a/c. Evaluation is exact
// (pushforward of the parametrization); nothing is resampled.
DomainPtr make_mobius_image(DomainPtr base, const MobiusMap& L, bool exterior = false,
                            std::optional<Complex> anchor = std::nullopt);

// Image DomainSpec under L for polygon/arc-polygon/circle specs (arcs map to
// arcs). Throws GeometryError for a genuine ellipse, whose Mobius image
// leaves the representable family.
DomainSpec mobius_apply(const MobiusMap& L, const DomainSpec& spec);

// ---------------------------------------------------------------------------
// Boundary meshes.
// ---------------------------------------------------------------------------

struct MeshOptions {
  std::size_t panels_per_edge = 8;  // >= 2 on corner chains
  std::size_t grading_levels = 4;   // dyadic subdivisions toward each vertex
  std::size_t quad_order = 8;       // Gauss nodes per panel, in [2, 32]
  // Smooth closed boundaries use the periodic trapezoid rule with
  // panels_per_edge * quad_order nodes (rounded up to even) instead of
  // panels; trapezoid_nodes overrides that count when nonzero.
  std::size_t trapezoid_nodes = 0;
  std::size_t max_nodes = 20000;
};

struct Panel {
  std::size_t edge;
  double t0, t1;           // parameter interval within the edge
  std::size_t first_node;  // nodes are contiguous per panel
  std::size_t order;
};

struct BoundaryMesh {
  DomainPtr domain;
  std::vector<Complex> nodes;
  std::vector<double> weights;  // positive arclength weights
  std::vector<Complex> tangents;
  std::vector<Complex> normals;  // outward unit
  std::vector<double> curvatures;
  std::vector<std::size_t> node_edge;
  std::vector<double> node_param;
  std::vector<Panel> panels;  // empty for the trapezoid rule
  bool trapezoid = false;
  std::size_t quad_order = 0;

  std::size_t size() const { return nodes.size(); }
  double perimeter() const;
  Complex dz(std::size_t j) const { return tangents[j] * weights[j]; }
};

BoundaryMesh build_boundary_mesh(DomainPtr domain, const MeshOptions& opts = {});
BoundaryMesh build_boundary_mesh(const DomainSpec& spec, const MeshOptions& opts = {});

// ---------------------------------------------------------------------------
// Interior quadrature for star-shaped domains: triangle fan from the anchor,
// one radial Gauss rule per boundary node. Fails loudly (GeometryError naming
// the worst ray) when the boundary is not star-shaped about the anchor.
// ---------------------------------------------------------------------------

struct AreaQuadrature {
  std::vector<Complex> points;  // strictly interior
  std::vector<double> weights;  // positive, summing to the area
  Complex anchor{0.0, 0.0};
  std::size_t exactness_degree = 0;  // straight-edge polynomial exactness
};

AreaQuadrature build_area_quadrature(const BoundaryMesh& mesh,
                                     std::optional<Complex> anchor = std::nullopt,
                                     std::size_t radial_order = 10);

}  // namespace npspectra

#endif
