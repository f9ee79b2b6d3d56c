#include "npspectra/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "npspectra/quadrature.hpp"

namespace npspectra {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFitRadius = 0.495;  // rescale target, strictly inside 1/2
constexpr double kMaxBulge = 20.0;    // arc sweep below ~1.94*pi

Complex unit(Complex v) { return v / std::abs(v); }

double principal_arg(Complex w) { return std::arg(w); }

// ---------------------------------------------------------------------------
// Edges
// ---------------------------------------------------------------------------

class LineEdge final : public Edge {
 public:
  LineEdge(Complex p, Complex q) : p_(p), d_(q - p) {}
  Complex point(double t) const override { return p_ + t * d_; }
  Complex derivative(double) const override { return d_; }
  double curvature(double) const override { return 0.0; }

 private:
  Complex p_, d_;
};

struct ArcGeom {
  Complex center;
  double radius;
  double alpha0;
  double sweep;  // signed; z(t) = C + r exp(i(alpha0 + sweep t))
};

ArcGeom arc_from_bulge(Complex p, Complex q, double b) {
  const Complex chord = q - p;
  const double c = 0.5 * std::abs(chord);
  if (c == 0.0) throw GeometryError("arc edge with coincident endpoints");
  const Complex u = chord / (2.0 * c);
  const double sweep = 4.0 * std::atan(b);
  const double sagitta = b * c;
  const double rad = c * (1.0 + b * b) / (2.0 * b);  // signed
  ArcGeom g;
  g.center = 0.5 * (p + q) + Complex(0.0, 1.0) * u * (rad - sagitta);
  g.radius = std::abs(rad);
  g.alpha0 = std::arg(p - g.center);
  g.sweep = sweep;
  return g;
}

class ArcEdge final : public Edge {
 public:
  ArcEdge(Complex p, Complex q, double bulge) : g_(arc_from_bulge(p, q, bulge)) {}
  Complex point(double t) const override {
    return g_.center + std::polar(g_.radius, g_.alpha0 + g_.sweep * t);
  }
  Complex derivative(double t) const override {
    return Complex(0.0, g_.sweep) * std::polar(g_.radius, g_.alpha0 + g_.sweep * t);
  }
  double curvature(double) const override {
    return (g_.sweep > 0.0 ? 1.0 : -1.0) / g_.radius;
  }
  const ArcGeom& geom() const { return g_; }

 private:
  ArcGeom g_;
};

class EllipseEdge final : public Edge {
 public:
  EllipseEdge(Complex center, double a, double b) : c_(center), a_(a), b_(b) {}
  Complex point(double t) const override {
    const double u = 2.0 * kPi * t;
    return c_ + Complex(a_ * std::cos(u), b_ * std::sin(u));
  }
  Complex derivative(double t) const override {
    const double u = 2.0 * kPi * t;
    return 2.0 * kPi * Complex(-a_ * std::sin(u), b_ * std::cos(u));
  }
  double curvature(double t) const override {
    const double u = 2.0 * kPi * t;
    const double s = a_ * a_ * std::sin(u) * std::sin(u) + b_ * b_ * std::cos(u) * std::cos(u);
    return a_ * b_ / (s * std::sqrt(s));
  }

 private:
  Complex c_;
  double a_, b_;
};

class MobiusEdge final : public Edge {
 public:
  MobiusEdge(EdgePtr base, const MobiusMap& map) : base_(std::move(base)), map_(map) {}
  Complex point(double t) const override { return map_(base_->point(t)); }
  Complex derivative(double t) const override {
    return map_.derivative(base_->point(t)) * base_->derivative(t);
  }
  double curvature(double t) const override {
    // kappa_w = (kappa_z + Im((L''/L') u)) / |L'|, u the unit tangent of the base curve
    const Complex z = base_->point(t);
    const Complex u = unit(base_->derivative(t));
    return (base_->curvature(t) + (map_.log_deriv2(z) * u).imag()) /
           std::abs(map_.derivative(z));
  }

 private:
  EdgePtr base_;
  MobiusMap map_;
};

class ReversedEdge final : public Edge {
 public:
  explicit ReversedEdge(EdgePtr base) : base_(std::move(base)) {}
  Complex point(double t) const override { return base_->point(1.0 - t); }
  Complex derivative(double t) const override { return -base_->derivative(1.0 - t); }
  double curvature(double t) const override { return -base_->curvature(1.0 - t); }

 private:
  EdgePtr base_;
};

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

class SpecDomain final : public Domain {
 public:
  explicit SpecDomain(DomainSpec spec) : spec_(std::move(spec)) {}
  bool contains(Complex z) const override { return npspectra::contains(spec_, z); }
  const DomainSpec& spec() const { return spec_; }

 private:
  DomainSpec spec_;
};

class MappedDomain final : public Domain {
 public:
  MappedDomain(DomainPtr base, const MobiusMap& map, bool exterior)
      : base_(std::move(base)), inv_(map.inverse()), exterior_(exterior) {}
  bool contains(Complex z) const override {
    const Complex den = inv_.c * z + inv_.d;
    if (std::abs(den) < 1e-300) return exterior_;  // z is the image of infinity
    const bool in_base = base_->contains(inv_(z));
    return exterior_ ? !in_base : in_base;
  }

 private:
  DomainPtr base_;
  MobiusMap inv_;
  bool exterior_;
};

std::vector<EdgePtr> chain_edges(const DomainSpec& spec) {
  const std::size_t n = spec.vertices.size();
  std::vector<EdgePtr> edges(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex p = spec.vertices[k];
    const Complex q = spec.vertices[(k + 1) % n];
    const double b = spec.bulges.empty() ? 0.0 : spec.bulges[k];
    if (std::abs(b) < 1e-12)
      edges[k] = std::make_shared<LineEdge>(p, q);
    else
      edges[k] = std::make_shared<ArcEdge>(p, q, b);
  }
  return edges;
}

double edge_length(const Edge& e) {
  const auto& rule = quad::gauss_legendre(32);
  double len = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    len += 0.5 * rule.weights[i] * std::abs(e.derivative(0.5 * (rule.nodes[i] + 1.0)));
  return len;
}

// contour integral of f(z(t)) z'(t) dt over one edge, Gauss-32
Complex edge_contour(const Edge& e, const std::function<Complex(Complex)>& f) {
  const auto& rule = quad::gauss_legendre(32);
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = 0.5 * (rule.nodes[i] + 1.0);
    s += 0.5 * rule.weights[i] * f(e.point(t)) * e.derivative(t);
  }
  return s;
}

std::vector<double> chain_angles(const std::vector<EdgePtr>& edges) {
  const std::size_t n = edges.size();
  std::vector<double> angles(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex tin = unit(edges[(k + n - 1) % n]->derivative(1.0));
    const Complex tout = unit(edges[k]->derivative(0.0));
    const double turn = std::atan2(cross(tin, tout), dot(tin, tout));
    double theta = kPi - turn;
    if (theta >= 2.0 * kPi) theta -= 2.0 * kPi;
    angles[k] = theta;
  }
  return angles;
}

}  // namespace

std::vector<double> Domain::interior_angles() const {
  if (smooth_closed || vertices.empty()) return {};
  return chain_angles(edges);
}

// ---------------------------------------------------------------------------
// Spec constructors
// ---------------------------------------------------------------------------

DomainSpec disk_spec(double radius) { return ellipse_spec(radius, radius); }

DomainSpec ellipse_spec(double a, double b) {
  DomainSpec s;
  s.kind = DomainKind::ellipse;
  s.a = a;
  s.b = b;
  validate_spec(s);
  return s;
}

DomainSpec square_spec(double side) { return rectangle_spec(side, side); }

DomainSpec rectangle_spec(double width, double height) {
  const double w = width / 2.0, h = height / 2.0;
  return polygon_spec({{w, -h}, {w, h}, {-w, h}, {-w, -h}});
}

DomainSpec regular_ngon_spec(int n, double circumradius) {
  if (n < 3) throw GeometryError("regular polygon needs n >= 3");
  std::vector<Complex> v(n);
  for (int k = 0; k < n; ++k)
    v[k] = std::polar(circumradius, 2.0 * kPi * double(k) / double(n));
  return polygon_spec(std::move(v));
}

DomainSpec truncated_wedge_spec(double theta, double cap_radius) {
  if (!(theta > 0.0 && theta < 2.0 * kPi))
    throw GeometryError("wedge angle must lie in (0, 2pi)");
  std::vector<Complex> v{{0.0, 0.0}, {cap_radius, 0.0}, std::polar(cap_radius, theta)};
  std::vector<double> b{0.0, std::tan(theta / 4.0), 0.0};
  return arc_polygon_spec(std::move(v), std::move(b));
}

DomainSpec lens_spec(double theta, double chord) {
  if (!(theta > 0.0 && theta < kPi))
    throw GeometryError("lens vertex angle must lie in (0, pi)");
  const double c = chord / 2.0;
  const double b = std::tan(theta / 4.0);
  return arc_polygon_spec({{-c, 0.0}, {c, 0.0}}, {b, b});
}

DomainSpec polygon_spec(std::vector<Complex> vertices) {
  DomainSpec s;
  s.kind = DomainKind::polygon;
  s.vertices = std::move(vertices);
  s.bulges.assign(s.vertices.size(), 0.0);
  validate_spec(s);
  return s;
}

DomainSpec arc_polygon_spec(std::vector<Complex> vertices, std::vector<double> bulges) {
  DomainSpec s;
  s.kind = DomainKind::arc_polygon;
  s.vertices = std::move(vertices);
  s.bulges = std::move(bulges);
  validate_spec(s);
  return s;
}

void validate_spec(const DomainSpec& spec) {
  if (spec.kind == DomainKind::ellipse) {
    if (!(spec.a > 0.0) || !(spec.b > 0.0))
      throw GeometryError("ellipse semi-axes must be positive");
    return;
  }
  const std::size_t n = spec.vertices.size();
  if (n < 2) throw GeometryError("boundary chain needs at least 2 vertices");
  if (!spec.bulges.empty() && spec.bulges.size() != n)
    throw GeometryError("bulge list length must match vertex count");
  double scale = 0.0;
  for (const auto& v : spec.vertices) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, 1e-30);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex d = spec.vertices[(k + 1) % n] - spec.vertices[k];
    if (std::abs(d) < 1e-13 * scale)
      throw GeometryError("degenerate edge: consecutive vertices coincide");
    if (!spec.bulges.empty() && std::abs(spec.bulges[k]) > kMaxBulge)
      throw GeometryError("bulge magnitude exceeds supported arc range");
  }
  if (n == 2) {
    const bool b0 = !spec.bulges.empty() && std::abs(spec.bulges[0]) > 1e-12;
    const bool b1 = !spec.bulges.empty() && std::abs(spec.bulges[1]) > 1e-12;
    if (!b0 || !b1) throw GeometryError("two-vertex chain needs two genuine arcs");
  }
  if (!(signed_area(spec) > 0.0))
    throw GeometryError("boundary must be counterclockwise with positive area");
  for (double theta : interior_angles(spec)) {
    if (!(theta > 1e-6 && theta < 2.0 * kPi - 1e-6)) {
      std::ostringstream os;
      os << "interior angle " << theta << " outside (0, 2pi)";
      throw GeometryError(os.str());
    }
  }
}

std::vector<double> interior_angles(const DomainSpec& spec) {
  if (spec.kind == DomainKind::ellipse) return {};
  return chain_angles(chain_edges(spec));
}

double signed_area(const DomainSpec& spec) {
  if (spec.kind == DomainKind::ellipse) return kPi * spec.a * spec.b;
  double area = 0.0;
  for (const auto& e : chain_edges(spec)) {
    const auto& rule = quad::gauss_legendre(32);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = 0.5 * (rule.nodes[i] + 1.0);
      area += 0.25 * rule.weights[i] * cross(e->point(t), e->derivative(t));
    }
  }
  return area;
}

Complex centroid(const DomainSpec& spec) {
  if (spec.kind == DomainKind::ellipse) return spec.center;
  Complex m{0.0, 0.0};
  for (const auto& e : chain_edges(spec))
    m += edge_contour(*e, [](Complex z) { return z * std::conj(z); });
  m /= Complex(0.0, 2.0);
  return m / signed_area(spec);
}

bool contains(const DomainSpec& spec, Complex z) {
  if (spec.kind == DomainKind::ellipse) {
    const Complex w = z - spec.center;
    const double xa = w.real() / spec.a, yb = w.imag() / spec.b;
    return xa * xa + yb * yb < 1.0;
  }
  // winding number; the chord argument is exact for straight edges, and for
  // arcs it only needs a +-2pi correction when z sits in the circular
  // segment between chord and arc (the wrap region of the closed loop
  // arc + reversed chord)
  double total = 0.0;
  for (const auto& e : chain_edges(spec)) {
    const Complex A = e->point(0.0), B = e->point(1.0);
    double inc = principal_arg((B - z) / (A - z));
    if (auto arc = dynamic_cast<const ArcEdge*>(e.get())) {
      const ArcGeom& g = arc->geom();
      if (std::abs(z - g.center) < g.radius) {
        const double side = cross(B - A, z - A);
        if (g.sweep > 0.0 && side < 0.0) inc += 2.0 * kPi;
        if (g.sweep < 0.0 && side > 0.0) inc -= 2.0 * kPi;
      }
    }
    total += inc;
  }
  return std::abs(total / (2.0 * kPi) - 1.0) < 0.5;
}

DomainSpec rescale_to_normal(const DomainSpec& spec) {
  const auto sample_max = [](const DomainSpec& s, Complex about) {
    double m = 0.0;
    if (s.kind == DomainKind::ellipse) {
      for (int k = 0; k < 512; ++k) {
        const double u = 2.0 * kPi * double(k) / 512.0;
        m = std::max(m, std::abs(s.center + Complex(s.a * std::cos(u), s.b * std::sin(u)) - about));
      }
      return m;
    }
    for (const auto& e : chain_edges(s))
      for (int k = 0; k <= 256; ++k)
        m = std::max(m, std::abs(e->point(double(k) / 256.0) - about));
    return m;
  };
  if (sample_max(spec, Complex{0.0, 0.0}) <= kFitRadius * (1.0 + 1e-9)) {
    DomainSpec out = spec;
    out.scale_applied = 1.0;
    return out;
  }
  const Complex c = centroid(spec);
  const double m = sample_max(spec, c);
  const double s = kFitRadius / m;
  DomainSpec out = spec;
  out.scale_applied = s;
  if (spec.kind == DomainKind::ellipse) {
    out.center = {0.0, 0.0};
    out.a = spec.a * s;
    out.b = spec.b * s;
  } else {
    for (auto& v : out.vertices) v = s * (v - c);
  }
  if (out.anchor) out.anchor = s * (*spec.anchor - c);
  return out;
}

DomainPtr make_domain(const DomainSpec& spec) {
  validate_spec(spec);
  auto dom = std::make_shared<SpecDomain>(spec);
  if (spec.kind == DomainKind::ellipse) {
    dom->edges = {std::make_shared<EllipseEdge>(spec.center, spec.a, spec.b)};
    dom->smooth_closed = true;
    dom->anchor = spec.anchor.value_or(spec.center);
  } else {
    dom->edges = chain_edges(spec);
    dom->vertices = spec.vertices;
    dom->anchor = spec.anchor.value_or(centroid(spec));
  }
  return dom;
}

DomainPtr make_mobius_image(DomainPtr base, const MobiusMap& L, bool exterior,
                            std::optional<Complex> anchor) {
  if (std::abs(L.a * L.d - L.b * L.c) < 1e-300)
    throw InputError("mobius map is singular");
  if (L.has_pole()) {
    const Complex pole = L.pole();
    const bool pole_inside = base->contains(pole);
    if (exterior && !pole_inside)
      throw GeometryError("exterior image needs the pole inside the domain");
    if (!exterior && pole_inside)
      throw GeometryError("interior image needs the pole off the closure");
  } else if (exterior) {
    throw GeometryError("exterior image needs a genuine pole inside the domain");
  }
  auto dom = std::make_shared<MappedDomain>(base, L, exterior);
  const std::size_t n = base->edges.size();
  dom->smooth_closed = base->smooth_closed;
  if (!exterior) {
    dom->edges.reserve(n);
    for (const auto& e : base->edges)
      dom->edges.push_back(std::make_shared<MobiusEdge>(e, L));
    for (const auto& v : base->vertices) dom->vertices.push_back(L(v));
    dom->anchor = anchor.value_or(L(base->anchor));
  } else {
    dom->edges.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      auto mapped = std::make_shared<MobiusEdge>(base->edges[n - 1 - j], L);
      dom->edges.push_back(std::make_shared<ReversedEdge>(mapped));
    }
    const std::size_t m = base->vertices.size();
    for (std::size_t j = 0; j < m; ++j)
      dom->vertices.push_back(L(base->vertices[(m - j) % m]));
    dom->anchor = anchor.value_or(L.a / L.c);  // image of infinity
  }
  return dom;
}

DomainSpec mobius_apply(const MobiusMap& L, const DomainSpec& spec) {
  if (std::abs(L.a * L.d - L.b * L.c) < 1e-300)
    throw InputError("mobius map is singular");
  if (spec.kind == DomainKind::ellipse && spec.a != spec.b)
    throw GeometryError(
        "mobius image of a genuine ellipse is not an arc polygon; "
        "use make_mobius_image for the parametrized handle");
  if (L.has_pole()) {
    const Complex pole = L.pole();
    if (contains(spec, pole)) throw GeometryError("mobius pole inside the domain");
  }
  if (spec.kind == DomainKind::ellipse) {
    // circle -> circle through three mapped points
    const double r = spec.a;
    const Complex p0 = L(spec.center + Complex(r, 0.0));
    const Complex p1 = L(spec.center + Complex(0.0, r));
    const Complex p2 = L(spec.center - Complex(r, 0.0));
    const Complex d1 = p1 - p0, d2 = p2 - p0;
    const double den = 2.0 * cross(d1, d2);
    if (std::abs(den) < 1e-14 * std::abs(d1) * std::abs(d2))
      throw GeometryError("circle image degenerates to a line");
    const double s1 = dot(d1, d1), s2 = dot(d2, d2);
    const Complex centre =
        p0 + Complex(d2.imag() * s1 - d1.imag() * s2, d1.real() * s2 - d2.real() * s1) / den;
    DomainSpec out;
    out.kind = DomainKind::ellipse;
    out.center = centre;
    out.a = out.b = std::abs(p0 - centre);
    if (spec.anchor) out.anchor = L(*spec.anchor);
    return out;
  }
  const auto edges = chain_edges(spec);
  const std::size_t n = spec.vertices.size();
  DomainSpec out;
  out.kind = DomainKind::arc_polygon;
  out.vertices.resize(n);
  out.bulges.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.vertices[k] = L(spec.vertices[k]);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex P = out.vertices[k];
    const Complex Q = out.vertices[(k + 1) % n];
    const Complex M = L(edges[k]->point(0.5));
    const Complex d1 = M - P, d2 = Q - P;
    if (std::abs(cross(d1, d2)) < 1e-13 * std::abs(d1) * std::abs(d2)) {
      out.bulges[k] = 0.0;
      continue;
    }
    // circumcentre of P, M, Q, then the signed sweep P -> M -> Q
    const double s1 = dot(d1, d1), s2 = dot(d2, d2);
    const double den = 2.0 * cross(d1, d2);
    const Complex C =
        P + Complex(d2.imag() * s1 - d1.imag() * s2, d1.real() * s2 - d2.real() * s1) / den;
    const double a0 = std::arg(P - C), am = std::arg(M - C), a1 = std::arg(Q - C);
    double sw1 = std::remainder(am - a0, 2.0 * kPi);
    double sw2 = std::remainder(a1 - am, 2.0 * kPi);
    if (sw1 * sw2 < 0.0)
      throw GeometryError("mobius image of arc edge is inconsistent");
    out.bulges[k] = std::tan((sw1 + sw2) / 4.0);
  }
  if (spec.anchor) out.anchor = L(*spec.anchor);
  validate_spec(out);
  return out;
}

Complex MobiusMap::pole() const {
  if (!has_pole()) throw InputError("affine map has no pole");
  return -d / c;
}

MobiusMap MobiusMap::inverse() const { return {d, -b, -c, a}; }

MobiusMap MobiusMap::compose(const MobiusMap& g) const {
  return {a * g.a + b * g.c, a * g.b + b * g.d, c * g.a + d * g.c, c * g.b + d * g.d};
}

// ---------------------------------------------------------------------------
// Meshing
// ---------------------------------------------------------------------------

double BoundaryMesh::perimeter() const {
  double p = 0.0;
  for (double w : weights) p += w;
  return p;
}

namespace {

void append_panel_nodes(BoundaryMesh& mesh, const Edge& edge, std::size_t edge_id, double t0,
                        double t1, std::size_t order) {
  const auto& rule = quad::gauss_legendre(order);
  Panel panel{edge_id, t0, t1, mesh.nodes.size(), order};
  const double h = 0.5 * (t1 - t0);
  const double m = 0.5 * (t0 + t1);
  for (std::size_t q = 0; q < order; ++q) {
    const double t = m + h * rule.nodes[q];
    const Complex d = edge.derivative(t);
    const double speed = std::abs(d);
    mesh.nodes.push_back(edge.point(t));
    mesh.weights.push_back(rule.weights[q] * h * speed);
    mesh.tangents.push_back(d / speed);
    mesh.normals.push_back(Complex(0.0, -1.0) * d / speed);
    mesh.curvatures.push_back(edge.curvature(t));
    mesh.node_edge.push_back(edge_id);
    mesh.node_param.push_back(t);
  }
  mesh.panels.push_back(panel);
}

}  // namespace

BoundaryMesh build_boundary_mesh(DomainPtr domain, const MeshOptions& opts) {
  if (!domain || domain->edges.empty()) throw InputError("mesh of an empty domain");
  if (opts.quad_order < 2 || opts.quad_order > 32)
    throw InputError("quad_order must lie in [2, 32]");
  BoundaryMesh mesh;
  mesh.domain = domain;
  mesh.quad_order = opts.quad_order;

  if (domain->smooth_closed) {
    std::size_t n = opts.trapezoid_nodes ? opts.trapezoid_nodes
                                         : opts.panels_per_edge * opts.quad_order;
    n += n % 2;  // the periodic log rule needs an even count
    if (n < 8) n = 8;
    if (n > opts.max_nodes) throw InputError("node count exceeds configured cap");
    const Edge& e = *domain->edges[0];
    mesh.trapezoid = true;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = double(j) / double(n);
      const Complex d = e.derivative(t);
      const double speed = std::abs(d);
      mesh.nodes.push_back(e.point(t));
      mesh.weights.push_back(speed / double(n));
      mesh.tangents.push_back(d / speed);
      mesh.normals.push_back(Complex(0.0, -1.0) * d / speed);
      mesh.curvatures.push_back(e.curvature(t));
      mesh.node_edge.push_back(0);
      mesh.node_param.push_back(t);
    }
    return mesh;
  }

  const std::size_t P = std::max<std::size_t>(2, opts.panels_per_edge);
  double perimeter_est = 0.0;
  for (const auto& e : domain->edges) perimeter_est += edge_length(*e);

  for (std::size_t eid = 0; eid < domain->edges.size(); ++eid) {
    const Edge& edge = *domain->edges[eid];
    const double base = 1.0 / double(P);
    const double elen = edge_length(edge);
    // smallest panel never below 1e-12 of the perimeter
    std::size_t g = opts.grading_levels;
    while (g > 0 && base * std::ldexp(1.0, -int(g)) * elen < 1e-12 * perimeter_est) --g;

    std::vector<double> cuts;
    cuts.push_back(0.0);
    for (std::size_t lev = g; lev >= 1; --lev) cuts.push_back(base * std::ldexp(1.0, -int(lev)));
    for (std::size_t k = 1; k + 1 <= P - 1; ++k) cuts.push_back(base * double(k));
    cuts.push_back(1.0 - base);
    for (std::size_t lev = 1; lev <= g; ++lev)
      cuts.push_back(1.0 - base * std::ldexp(1.0, -int(lev)));
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double x, double y) { return std::abs(x - y) < 1e-15; }),
               cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      append_panel_nodes(mesh, edge, eid, cuts[k], cuts[k + 1], opts.quad_order);
    if (mesh.nodes.size() > opts.max_nodes)
      throw InputError("node count exceeds configured cap");
  }
  return mesh;
}

BoundaryMesh build_boundary_mesh(const DomainSpec& spec, const MeshOptions& opts) {
  return build_boundary_mesh(make_domain(spec), opts);
}

AreaQuadrature build_area_quadrature(const BoundaryMesh& mesh, std::optional<Complex> anchor,
                                     std::size_t radial_order) {
  if (radial_order < 2 || radial_order > 48)
    throw InputError("radial_order must lie in [2, 48]");
  const Complex a = anchor.value_or(mesh.domain ? mesh.domain->anchor : Complex{0.0, 0.0});
  AreaQuadrature quadr;
  quadr.anchor = a;
  const auto& rad = quad::gauss_legendre(radial_order);
  const std::size_t n = mesh.size();

  for (std::size_t j = 0; j < n; ++j) {
    const double c = cross(mesh.nodes[j] - a, mesh.tangents[j]);
    if (!(c > 1e-12 * std::abs(mesh.nodes[j] - a))) {
      std::ostringstream os;
      os << "boundary not star-shaped about anchor (" << a.real() << ", " << a.imag()
         << "): ray toward node " << j << " at angle " << std::arg(mesh.nodes[j] - a);
      throw GeometryError(os.str());
    }
  }
  quadr.points.reserve(n * radial_order);
  quadr.weights.reserve(n * radial_order);
  for (std::size_t j = 0; j < n; ++j) {
    const Complex ray = mesh.nodes[j] - a;
    const double c = cross(ray, mesh.tangents[j]) * mesh.weights[j];
    for (std::size_t q = 0; q < radial_order; ++q) {
      const double s = 0.5 * (rad.nodes[q] + 1.0);
      quadr.points.push_back(a + s * ray);
      quadr.weights.push_back(0.5 * rad.weights[q] * s * c);
    }
  }
  const std::size_t torder = mesh.trapezoid ? 1000 : mesh.quad_order;
  quadr.exactness_degree = std::min(2 * radial_order - 2, 2 * torder - 2);
  return quadr;
}

}  // namespace npspectra
