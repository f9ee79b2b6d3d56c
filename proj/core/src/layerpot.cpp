#include "npspectra/layerpot.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "npspectra/parallel.hpp"
#include "npspectra/quadrature.hpp"

namespace npspectra {

namespace {

constexpr double kPi = std::numbers::pi;

// Positive definiteness of W*S needs logarithmic capacity below one; any set
// inside the disk of this radius qualifies with margin. rescale_to_normal
// places domains well inside.
constexpr double kCapacityRadius = 0.75;

// Same-edge targets within this many panel half-lengths of a panel midpoint
// go through the product log rule; farther targets are resolved by the plain
// Gauss weights to below 1e-10.
constexpr double kNearPanelReach = 2.5;

double max_node_radius(const BoundaryMesh& mesh) {
  double r = 0.0;
  for (const Complex& z : mesh.nodes) r = std::max(r, std::abs(z));
  return r;
}

// Targets on another edge closer than this many source panel arclengths get
// the subdivided interpolatory rule below; the plain rule is spectrally
// accurate beyond it.
constexpr double kCrossEdgeReach = 1.2;

std::vector<double> panel_arclens(const BoundaryMesh& mesh) {
  std::vector<double> len(mesh.panels.size(), 0.0);
  for (std::size_t p = 0; p < mesh.panels.size(); ++p)
    for (std::size_t q = 0; q < mesh.panels[p].order; ++q)
      len[p] += mesh.weights[mesh.panels[p].first_node + q];
  return len;
}

// Near-singular panel integration: the kernel is smooth on the panel but has
// a complex singularity at the distance of the target, which can be far
// smaller than the panel (nodes of a neighbouring edge crowd the shared
// corner). The panel is split dyadically toward the closest point until each
// piece is at most half its own distance from the target, and the density is
// carried to the fine nodes by its panel Lagrange interpolant, keeping the
// Nystrom structure intact. kernel(y, normal_y) excludes the weight.
template <typename Kernel>
void near_panel_accumulate(const BoundaryMesh& mesh, const Panel& p, const Complex& xi,
                           Kernel&& kernel, double* out) {
  const Edge& edge = *mesh.domain->edges[p.edge];
  const auto& rule = quad::gauss_legendre(p.order);
  std::array<double, 64> beta{};
  for (std::size_t i = 0; i < p.order; ++i) {
    double b = 1.0;
    for (std::size_t k = 0; k < p.order; ++k)
      if (k != i) b /= (rule.nodes[i] - rule.nodes[k]);
    beta[i] = b;
  }
  const double hh = 0.5 * (p.t1 - p.t0);
  const double mm = 0.5 * (p.t1 + p.t0);

  struct Iv {
    double a, b;
    int depth;
  };
  std::vector<Iv> stack{{-1.0, 1.0, 0}};
  std::array<double, 64> lagr{};
  while (!stack.empty()) {
    const Iv iv = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (iv.a + iv.b);
    const Complex ya = edge.point(mm + hh * iv.a);
    const Complex yb = edge.point(mm + hh * iv.b);
    const Complex ym = edge.point(mm + hh * mid);
    const double len = std::abs(ya - ym) + std::abs(ym - yb);
    const double dist = std::min({std::abs(xi - ya), std::abs(xi - ym), std::abs(xi - yb)});
    if (len > 0.5 * dist && iv.depth < 40) {
      stack.push_back({iv.a, mid, iv.depth + 1});
      stack.push_back({mid, iv.b, iv.depth + 1});
      continue;
    }
    const double sh = 0.5 * (iv.b - iv.a);
    for (std::size_t r = 0; r < p.order; ++r) {
      const double tau = mid + sh * rule.nodes[r];
      const double t = mm + hh * tau;
      const Complex d = edge.derivative(t);
      const double speed = std::abs(d);
      const Complex nrm = Complex(0.0, -1.0) * d / speed;
      const double kv = kernel(edge.point(t), nrm);
      // barycentric Lagrange basis of the panel nodes at tau
      double denom = 0.0;
      std::size_t hit = p.order;
      for (std::size_t j = 0; j < p.order; ++j) {
        const double diff = tau - rule.nodes[j];
        if (std::abs(diff) < 1e-14) {
          hit = j;
          break;
        }
        lagr[j] = beta[j] / diff;
        denom += lagr[j];
      }
      const double common = rule.weights[r] * sh * hh * speed * kv;
      if (hit < p.order) {
        out[hit] += common;
        continue;
      }
      for (std::size_t j = 0; j < p.order; ++j) out[j] += common * lagr[j] / denom;
    }
  }
}

// Local node spacing: the scale on which near-boundary quadrature degrades.
std::vector<double> node_spacing(const BoundaryMesh& mesh) {
  std::vector<double> ell(mesh.size(), 0.0);
  if (mesh.trapezoid) {
    for (std::size_t j = 0; j < mesh.size(); ++j) ell[j] = mesh.weights[j];
    return ell;
  }
  for (const Panel& p : mesh.panels) {
    double len = 0.0;
    for (std::size_t q = 0; q < p.order; ++q) len += mesh.weights[p.first_node + q];
    for (std::size_t q = 0; q < p.order; ++q) ell[p.first_node + q] = len / double(p.order);
  }
  return ell;
}

}  // namespace

Eigen::VectorXd weight_vector(const BoundaryMesh& mesh) {
  return Eigen::Map<const Eigen::VectorXd>(mesh.weights.data(),
                                           static_cast<Eigen::Index>(mesh.weights.size()));
}

Eigen::MatrixXd assemble_K(const BoundaryMesh& mesh) {
  const std::size_t n = mesh.size();
  if (n == 0) throw InputError("assemble_K: empty mesh");
  Eigen::MatrixXd K(n, n);
  std::atomic<bool> coincident{false};

  const auto plain = [&](std::size_t i, std::size_t j) {
    const Complex d = mesh.nodes[j] - mesh.nodes[i];
    const double r2 = std::norm(d);
    if (r2 == 0.0) {
      coincident.store(true, std::memory_order_relaxed);
      return 0.0;
    }
    return (dot(mesh.normals[j], d) / r2) * mesh.weights[j] / kPi;
  };

  if (mesh.trapezoid) {
    parallel_for(n, [&](std::size_t i) {
      for (std::size_t j = 0; j < n; ++j)
        K(i, j) = (j == i) ? (0.5 * mesh.curvatures[i] / kPi) * mesh.weights[i] : plain(i, j);
    });
  } else {
    const std::vector<double> plen = panel_arclens(mesh);
    parallel_for(n, [&](std::size_t i) {
      const Complex xi = mesh.nodes[i];
      for (std::size_t pi = 0; pi < mesh.panels.size(); ++pi) {
        const Panel& p = mesh.panels[pi];
        // on the panel's own edge the kernel continues smoothly through the
        // diagonal; only other-edge targets crowding a corner are near
        bool near = false;
        if (mesh.node_edge[i] != p.edge) {
          double dist = std::numeric_limits<double>::infinity();
          for (std::size_t q = 0; q < p.order; ++q)
            dist = std::min(dist, std::abs(xi - mesh.nodes[p.first_node + q]));
          near = dist < kCrossEdgeReach * plen[pi];
        }
        if (!near) {
          for (std::size_t q = 0; q < p.order; ++q) {
            const std::size_t j = p.first_node + q;
            K(i, j) = (j == i) ? (0.5 * mesh.curvatures[i] / kPi) * mesh.weights[i]
                               : plain(i, j);
          }
          continue;
        }
        std::array<double, 64> acc{};
        near_panel_accumulate(mesh, p, xi, [&](const Complex& y, const Complex& nrm) {
          const Complex d = y - xi;
          return (dot(nrm, d) / std::norm(d)) / kPi;
        }, acc.data());
        for (std::size_t q = 0; q < p.order; ++q) K(i, p.first_node + q) = acc[q];
      }
    });
  }
  if (coincident.load()) throw InputError("assemble_K: coincident mesh nodes");
  return K;
}

Eigen::MatrixXd assemble_S(const BoundaryMesh& mesh, double* ws_asymmetry) {
  const std::size_t n = mesh.size();
  if (n == 0) throw InputError("assemble_S: empty mesh");
  const double maxr = max_node_radius(mesh);
  if (maxr > kCapacityRadius) {
    std::ostringstream os;
    os << "assemble_S: boundary reaches radius " << maxr
       << "; the single layer is only positive definite in normal position, "
          "apply rescale_to_normal to the domain spec first";
    throw InputError(os.str());
  }

  Eigen::MatrixXd S(n, n);
  if (mesh.trapezoid) {
    const auto lags = quad::kussmaul_martensen_lags(n);
    parallel_for(n, [&](std::size_t i) {
      const Complex xi = mesh.nodes[i];
      const double ti = mesh.node_param[i];
      for (std::size_t j = 0; j < n; ++j) {
        const double wj = mesh.weights[j];
        const double sp_j = double(n) * wj / (2.0 * kPi);  // |dz/ds| in the 2pi parameter
        const std::size_t d = (i + n - j) % n;
        double smooth;
        if (j == i) {
          smooth = std::log(sp_j);
        } else {
          const double chord = std::abs(xi - mesh.nodes[j]);
          const double gap = 2.0 * std::abs(std::sin(kPi * (ti - mesh.node_param[j])));
          smooth = std::log(chord / gap);
        }
        S(i, j) = -(0.5 * lags[d] * sp_j + smooth * wj) / (2.0 * kPi);
      }
    });
  } else {
    const std::vector<double> plen = panel_arclens(mesh);
    parallel_for(n, [&](std::size_t i) {
      const Complex xi = mesh.nodes[i];
      for (std::size_t pi = 0; pi < mesh.panels.size(); ++pi) {
        const Panel& p = mesh.panels[pi];
        const double h = 0.5 * (p.t1 - p.t0);
        const double m = 0.5 * (p.t1 + p.t0);
        if (mesh.node_edge[i] == p.edge) {
          const double tau_i = (mesh.node_param[i] - m) / h;
          if (std::abs(tau_i) <= kNearPanelReach) {
            const auto& rule = quad::gauss_legendre(p.order);
            const auto c = quad::log_weights(p.order, tau_i);
            for (std::size_t q = 0; q < p.order; ++q) {
              const std::size_t j = p.first_node + q;
              const double wj = mesh.weights[j];
              const double jac = wj / rule.weights[q];  // h * speed at the node
              double smooth;
              if (j == i) {
                smooth = std::log(jac);
              } else {
                const double chord = std::abs(xi - mesh.nodes[j]);
                smooth = std::log(chord / std::abs(tau_i - rule.nodes[q]));
              }
              S(i, j) = -(c[q] * jac + smooth * wj) / (2.0 * kPi);
            }
            continue;
          }
        } else {
          double dist = std::numeric_limits<double>::infinity();
          for (std::size_t q = 0; q < p.order; ++q)
            dist = std::min(dist, std::abs(xi - mesh.nodes[p.first_node + q]));
          if (dist < kCrossEdgeReach * plen[pi]) {
            std::array<double, 64> acc{};
            near_panel_accumulate(mesh, p, xi, [&](const Complex& y, const Complex&) {
              return -std::log(std::abs(y - xi)) / (2.0 * kPi);
            }, acc.data());
            for (std::size_t q = 0; q < p.order; ++q) S(i, p.first_node + q) = acc[q];
            continue;
          }
        }
        for (std::size_t q = 0; q < p.order; ++q) {
          const std::size_t j = p.first_node + q;
          const double chord = std::abs(xi - mesh.nodes[j]);
          S(i, j) = -std::log(chord) * mesh.weights[j] / (2.0 * kPi);
        }
      }
    });
  }

  // The W-weighted matrix is symmetric in exact arithmetic; average away the
  // quadrature defect and record its size.
  const Eigen::VectorXd w = weight_vector(mesh);
  Eigen::MatrixXd A = w.asDiagonal() * S;
  const double scale = std::max(A.norm(), std::numeric_limits<double>::min());
  const double asym = (A - A.transpose()).norm() / scale;
  if (ws_asymmetry) *ws_asymmetry = asym;
  A = 0.5 * (A + A.transpose()).eval();
  return w.cwiseInverse().asDiagonal() * A;
}

Eigen::MatrixXd discrete_adjoint(const Eigen::MatrixXd& Kmat, const Eigen::VectorXd& weights) {
  if (Kmat.rows() != Kmat.cols() || Kmat.rows() != weights.size())
    throw InputError("discrete_adjoint: dimension mismatch");
  return weights.cwiseInverse().asDiagonal() * Kmat.transpose() * weights.asDiagonal();
}

double plemelj_residual(const Eigen::MatrixXd& Kmat, const Eigen::MatrixXd& Smat,
                        const Eigen::VectorXd& weights) {
  const Eigen::MatrixXd Kstar = discrete_adjoint(Kmat, weights);
  const double denom = std::max(Smat.norm(), std::numeric_limits<double>::min());
  return (Kmat * Smat - Smat * Kstar).norm() / denom;
}

Eigen::VectorXd SymmetrizedSystem::density(std::size_t k) const {
  return llt.matrixU().solve(eigenvectors.col(static_cast<Eigen::Index>(k)));
}

SymmetrizedSystem symmetrized_system(const Eigen::MatrixXd& Kmat, const Eigen::MatrixXd& Smat,
                                     const Eigen::VectorXd& weights) {
  const Eigen::Index n = Kmat.rows();
  if (Kmat.cols() != n || Smat.rows() != n || Smat.cols() != n || weights.size() != n)
    throw InputError("symmetrized_system: dimension mismatch");

  SymmetrizedSystem sys;
  sys.weights = weights;
  Eigen::MatrixXd A = weights.asDiagonal() * Smat;
  A = 0.5 * (A + A.transpose()).eval();
  sys.llt.compute(A);
  if (sys.llt.info() != Eigen::Success)
    throw NumericError(
        "symmetrized_system: W*S is not positive definite; assemble on a domain "
        "in normal position (rescale_to_normal)");

  const Eigen::MatrixXd Kstar = discrete_adjoint(Kmat, weights);
  Eigen::MatrixXd B = A * Kstar;

  // A*K* is symmetric exactly when the discrete Plemelj identity KS = SK*
  // holds; the skew half is the W-dressed commutator defect, averaged away
  // here and recorded relative to ||A||_F. Symmetrizing before the whitening
  // keeps the recorded number free of the cond(A) amplification the L-solves
  // would apply to it.
  sys.asymmetry = 0.5 * (B - B.transpose()).norm() / std::max(A.norm(), std::numeric_limits<double>::min());
  B = 0.5 * (B + B.transpose()).eval();

  const Eigen::MatrixXd L = sys.llt.matrixL();
  const Eigen::MatrixXd Y = L.triangularView<Eigen::Lower>().solve(B);
  Eigen::MatrixXd M = L.triangularView<Eigen::Lower>().solve(Y.transpose()).transpose();
  M = 0.5 * (M + M.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw NumericError("symmetrized_system: eigensolver failed");
  sys.eigenvalues = es.eigenvalues();
  sys.eigenvectors = es.eigenvectors();

  // The lambda = 1 sector is the eigenvector most correlated with the
  // constant density in the W pairing, never the one nearest 1 in value.
  const Eigen::MatrixXd G =
      sys.llt.matrixU().solve(sys.eigenvectors);  // densities, one per column
  const double wsum = weights.sum();
  double best = -1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double num = std::abs(G.col(k).dot(weights));
    const double den =
        std::sqrt(G.col(k).dot(weights.cwiseProduct(G.col(k))) * wsum);
    const double corr = den > 0.0 ? num / den : 0.0;
    if (corr > best) {
      best = corr;
      sys.constant_index = static_cast<std::size_t>(k);
    }
  }
  return sys;
}

SpectrumResult symmetrized_spectrum(const Eigen::MatrixXd& Kmat, const Eigen::MatrixXd& Smat,
                                    const Eigen::VectorXd& weights, bool drop_constant) {
  SymmetrizedSystem sys = symmetrized_system(Kmat, Smat, weights);
  const std::size_t n = static_cast<std::size_t>(sys.eigenvalues.size());

  SpectrumResult res;
  res.method = "nystrom";
  res.n_nodes = n;
  res.asymmetry = sys.asymmetry;
  res.plemelj_residual = plemelj_residual(Kmat, Smat, weights);
  res.eigenvalues.resize(n);
  for (std::size_t k = 0; k < n; ++k) res.eigenvalues[k] = sys.eigenvalues[n - 1 - k];
  const std::size_t cidx = n - 1 - sys.constant_index;  // descending position
  res.deflated_eigenvalue = res.eigenvalues[cidx];

  double radius = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (drop_constant && k == cidx) continue;
    radius = std::max(radius, std::abs(res.eigenvalues[k]));
  }
  res.spectral_radius = radius;

  const double thresh = 3.0 * sys.asymmetry;
  double pairing = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (drop_constant && k == cidx) continue;
    const double lk = res.eigenvalues[k];
    if (std::abs(lk) <= thresh) continue;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < n; ++l) {
      if (drop_constant && l == cidx) continue;
      dist = std::min(dist, std::abs(lk + res.eigenvalues[l]));
    }
    pairing = std::max(pairing, dist);
  }
  res.pairing_residual = pairing;

  if (sys.asymmetry > 1e-3) {
    std::ostringstream os;
    os << "symmetrization defect " << sys.asymmetry
       << " exceeds 1e-3; K and S look mutually inconsistent";
    res.warnings.push_back(os.str());
  }
  return res;
}

SpectrumResult symmetrized_spectrum(const BoundaryMesh& mesh, bool drop_constant) {
  const Eigen::MatrixXd K = assemble_K(mesh);
  double ws_asym = 0.0;
  const Eigen::MatrixXd S = assemble_S(mesh, &ws_asym);
  SpectrumResult res = symmetrized_spectrum(K, S, weight_vector(mesh), drop_constant);
  if (ws_asym > 1e-3) {
    std::ostringstream os;
    os << "single layer W-symmetry defect " << ws_asym << " before averaging";
    res.warnings.push_back(os.str());
  }
  return res;
}

namespace {

// Shared driver for the two potentials: kernel(j, z) gives the contribution
// of node j at the point z, already including the quadrature weight.
template <typename Kernel>
std::vector<double> eval_layer(const BoundaryMesh& mesh, const Eigen::VectorXd& density,
                               const std::vector<Complex>& points, Warnings* warnings,
                               const char* name, Kernel&& kernel) {
  const std::size_t n = mesh.size();
  if (static_cast<std::size_t>(density.size()) != n)
    throw InputError(std::string(name) + ": density size does not match the mesh");
  const std::vector<double> ell = node_spacing(mesh);
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Complex z = points[p];
    double best = std::numeric_limits<double>::infinity();
    std::size_t near = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double dist = std::abs(z - mesh.nodes[j]);
      if (dist < best) {
        best = dist;
        near = j;
      }
    }
    if (best == 0.0) throw InputError(std::string(name) + ": evaluation point on a mesh node");
    if (warnings && best < 3.0 * ell[near]) {
      std::ostringstream os;
      os << name << ": point (" << z.real() << ", " << z.imag() << ") lies " << best
         << " from the boundary, inside 3 local spacings (" << 3.0 * ell[near] << ")";
      warnings->push_back(os.str());
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += kernel(j, z) * density[static_cast<Eigen::Index>(j)];
    out[p] = acc;
  }
  return out;
}

}  // namespace

std::vector<double> eval_single_layer(const BoundaryMesh& mesh, const Eigen::VectorXd& density,
                                      const std::vector<Complex>& points, Warnings* warnings) {
  return eval_layer(mesh, density, points, warnings, "eval_single_layer",
                    [&](std::size_t j, const Complex& z) {
                      return -std::log(std::abs(z - mesh.nodes[j])) * mesh.weights[j] /
                             (2.0 * kPi);
                    });
}

std::vector<double> eval_double_layer(const BoundaryMesh& mesh, const Eigen::VectorXd& density,
                                      const std::vector<Complex>& points, Warnings* warnings) {
  return eval_layer(mesh, density, points, warnings, "eval_double_layer",
                    [&](std::size_t j, const Complex& z) {
                      const Complex d = mesh.nodes[j] - z;
                      return -(dot(mesh.normals[j], d) / std::norm(d)) * mesh.weights[j] /
                             (2.0 * kPi);
                    });
}

namespace {

// Normal component of grad S f, evaluated off the boundary; nu is the fixed
// probe direction.
double single_layer_normal_gradient(const BoundaryMesh& mesh, const Eigen::VectorXd& f,
                                    const Complex& z, const Complex& nu) {
  double acc = 0.0;
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const Complex d = z - mesh.nodes[j];
    acc += -(dot(nu, d) / std::norm(d)) * mesh.weights[j] *
           f[static_cast<Eigen::Index>(j)] / (2.0 * kPi);
  }
  return acc;
}

}  // namespace

JumpReport jump_test(const BoundaryMesh& mesh, const Eigen::VectorXd& f,
                     const Eigen::VectorXd& g) {
  const std::size_t n = mesh.size();
  if (static_cast<std::size_t>(f.size()) != n || static_cast<std::size_t>(g.size()) != n)
    throw InputError("jump_test: data size does not match the mesh");

  const Eigen::MatrixXd K = assemble_K(mesh);
  const Eigen::VectorXd w = weight_vector(mesh);
  const Eigen::VectorXd Kg = K * g;
  const Eigen::VectorXd Ksf = discrete_adjoint(K, w) * f;
  const std::vector<double> ell = node_spacing(mesh);

  // Extrapolation abscissae in units of the local spacing. Starting at 5
  // spacings keeps the plain quadrature error negligible; eight points give
  // a degree-7 model, needed because the fields decay like powers of 1/r.
  const std::array<double, 8> xs = {5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0};
  std::array<double, 8> lag;  // Lagrange weights for the value at 0
  for (std::size_t m = 0; m < xs.size(); ++m) {
    double v = 1.0;
    for (std::size_t k = 0; k < xs.size(); ++k)
      if (k != m) v *= (0.0 - xs[k]) / (xs[m] - xs[k]);
    lag[m] = v;
  }

  // Corner distance per node: the fields are only analytic up to the nearest
  // vertex, so probes whose extrapolation window gets near one are skipped.
  const std::vector<Complex>* verts =
      (!mesh.trapezoid && mesh.domain) ? &mesh.domain->vertices : nullptr;

  const double far = xs.back();
  const std::size_t stride = std::max<std::size_t>(1, n / 192);
  std::vector<std::size_t> probes;
  std::vector<Complex> pts;  // 16 per probe: 8 interior then 8 exterior
  for (std::size_t i = 0; i < n; i += stride) {
    const double L = ell[i];
    if (verts) {
      double dc = std::numeric_limits<double>::infinity();
      for (const Complex& v : *verts) dc = std::min(dc, std::abs(mesh.nodes[i] - v));
      if (dc < 2.5 * far * L) continue;
    }
    const Complex far_in = mesh.nodes[i] - far * L * mesh.normals[i];
    const Complex far_out = mesh.nodes[i] + far * L * mesh.normals[i];
    double din = std::numeric_limits<double>::infinity();
    double dout = din;
    for (std::size_t j = 0; j < n; ++j) {
      din = std::min(din, std::abs(far_in - mesh.nodes[j]));
      dout = std::min(dout, std::abs(far_out - mesh.nodes[j]));
    }
    // keep the whole segment inside the normal collar of its own node
    if (din < 0.65 * far * L || dout < 0.65 * far * L) continue;
    probes.push_back(i);
    for (double x : xs) pts.push_back(mesh.nodes[i] - x * L * mesh.normals[i]);
    for (double x : xs) pts.push_back(mesh.nodes[i] + x * L * mesh.normals[i]);
  }
  if (probes.empty())
    throw NumericError(
        "jump_test: no probe node is far enough from the vertices for the "
        "extrapolation window; use more panels per edge");

  const std::vector<double> uD = eval_double_layer(mesh, g, pts, nullptr);

  double rDint = 0.0, rDext = 0.0, rSint = 0.0, rSext = 0.0;
  double mDint = 0.0, mDext = 0.0, mSint = 0.0, mSext = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const std::size_t i = probes[p];
    double eDin = 0.0, eDout = 0.0, eSin = 0.0, eSout = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      eDin += lag[k] * uD[16 * p + k];
      eDout += lag[k] * uD[16 * p + 8 + k];
      eSin += lag[k] * single_layer_normal_gradient(mesh, f, pts[16 * p + k], mesh.normals[i]);
      eSout +=
          lag[k] * single_layer_normal_gradient(mesh, f, pts[16 * p + 8 + k], mesh.normals[i]);
    }

    const double tDint = -0.5 * (g[static_cast<Eigen::Index>(i)] + Kg[static_cast<Eigen::Index>(i)]);
    const double tDext = 0.5 * (g[static_cast<Eigen::Index>(i)] - Kg[static_cast<Eigen::Index>(i)]);
    const double tSint = 0.5 * (f[static_cast<Eigen::Index>(i)] - Ksf[static_cast<Eigen::Index>(i)]);
    const double tSext = 0.5 * (-f[static_cast<Eigen::Index>(i)] - Ksf[static_cast<Eigen::Index>(i)]);

    rDint = std::max(rDint, std::abs(eDin - tDint));
    rDext = std::max(rDext, std::abs(eDout - tDext));
    rSint = std::max(rSint, std::abs(eSin - tSint));
    rSext = std::max(rSext, std::abs(eSout - tSext));
    mDint = std::max(mDint, std::abs(tDint));
    mDext = std::max(mDext, std::abs(tDext));
    mSint = std::max(mSint, std::abs(tSint));
    mSext = std::max(mSext, std::abs(tSext));
  }

  JumpReport rep;
  const double tiny = std::numeric_limits<double>::min();
  rep.dlayer_interior = rDint / std::max(mDint, tiny);
  rep.dlayer_exterior = rDext / std::max(mDext, tiny);
  rep.slayer_interior = rSint / std::max(mSint, tiny);
  rep.slayer_exterior = rSext / std::max(mSext, tiny);
  rep.max_residual = std::max({rep.dlayer_interior, rep.dlayer_exterior, rep.slayer_interior,
                               rep.slayer_exterior});
  return rep;
}

PoincareQuotient poincare_quotient(const Eigen::MatrixXd& Kmat, const Eigen::MatrixXd& Smat,
                                   const Eigen::VectorXd& weights, const Eigen::VectorXd& g) {
  if (g.size() != Kmat.rows()) throw InputError("poincare_quotient: density size mismatch");
  const Eigen::VectorXd Sg = Smat * g;
  const Eigen::VectorXd wg = weights.cwiseProduct(g);
  const double den = wg.dot(Sg);
  if (!(den > 0.0))
    throw NumericError(
        "poincare_quotient: <g, S g>_W is not positive; the density must be "
        "nontrivial on a domain in normal position");
  const Eigen::VectorXd Ksg =
      weights.cwiseInverse().cwiseProduct(Kmat.transpose() * weights.cwiseProduct(g));
  const double num = weights.cwiseProduct(Ksg).dot(Sg);
  PoincareQuotient q;
  q.quotient = num / den;
  q.energy_interior = 0.5 * (den - num);
  q.energy_exterior = 0.5 * (den + num);
  return q;
}

EquilibriumResult equilibrium_density(const Eigen::MatrixXd& Kmat, const Eigen::MatrixXd& Smat,
                                      const Eigen::VectorXd& weights) {
  const Eigen::Index n = Kmat.rows();
  if (Kmat.cols() != n || Smat.rows() != n || weights.size() != n)
    throw InputError("equilibrium_density: dimension mismatch");
  const Eigen::MatrixXd B =
      Eigen::MatrixXd::Identity(n, n) - discrete_adjoint(Kmat, weights);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  EquilibriumResult res;
  if (n >= 2) {
    const double s0 = sv[n - 1];
    const double s1 = sv[n - 2];
    const double ratio = s1 / std::max(s0, std::numeric_limits<double>::min());
    if (ratio < 10.0) {
      std::ostringstream os;
      os << "equilibrium_density: smallest singular value of I - K* poorly isolated "
            "(ratio "
         << ratio << ")";
      res.warnings.push_back(os.str());
    }
  }

  Eigen::VectorXd g0 = svd.matrixV().col(n - 1);
  const double wnorm = std::sqrt(g0.dot(weights.cwiseProduct(g0)));
  g0 /= wnorm;
  if (g0.dot(weights) < 0.0) g0 = -g0;
  res.density = g0;

  const Eigen::VectorXd Sg = Smat * g0;
  const double wsum = weights.sum();
  const double mean = weights.dot(Sg) / wsum;
  const double var = weights.dot((Sg.array() - mean).square().matrix()) / wsum;
  res.s_variation = std::sqrt(var) / std::max(std::abs(mean), std::numeric_limits<double>::min());
  return res;
}

}  // namespace npspectra
