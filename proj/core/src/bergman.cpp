#include "npspectra/bergman.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace npspectra {

namespace {

constexpr std::size_t kMaxDegree = 60;
constexpr double kNormalRadius = 0.75;  // same guard as the single layer

}  // namespace

Eigen::MatrixXcd MomentTable::gram(std::size_t d) const {
  const Eigen::Index m = static_cast<Eigen::Index>(d) + 1;
  if (m > mu.rows()) throw InputError("MomentTable::gram: degree beyond the stored table");
  return mu.topLeftCorner(m, m);
}

MomentTable boundary_moments(const BoundaryMesh& mesh, std::size_t max_deg) {
  if (mesh.size() == 0) throw InputError("boundary_moments: empty mesh");
  if (max_deg > kMaxDegree) {
    std::ostringstream os;
    os << "boundary_moments: max_deg " << max_deg << " exceeds " << kMaxDegree
       << "; the monomial Gram is numerically singular beyond that";
    throw InputError(os.str());
  }
  double rad = 0.0;
  for (const Complex& z : mesh.nodes) rad = std::max(rad, std::abs(z));
  if (rad > kNormalRadius) {
    std::ostringstream os;
    os << "boundary_moments: boundary reaches |z| = " << rad
       << "; monomial moments need a domain in normal position (rescale_to_normal)";
    throw InputError(os.str());
  }

  const std::size_t dim = max_deg + 2;
  MomentTable table;
  table.max_deg = max_deg;
  table.mu = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));

  std::vector<Complex> zp(dim + 1), cp(dim + 1);
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const Complex z = mesh.nodes[j];
    const Complex dz = mesh.dz(j);
    zp[0] = cp[0] = 1.0;
    for (std::size_t m = 1; m <= dim; ++m) {
      zp[m] = zp[m - 1] * z;
      cp[m] = cp[m - 1] * std::conj(z);
    }
    for (std::size_t m = 0; m < dim; ++m)
      for (std::size_t n = 0; n < dim; ++n)
        table.mu(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) +=
            zp[m] * cp[n + 1] * dz / (Complex(0.0, 2.0) * double(n + 1));
  }

  // The continuum table is Hermitian (integrate d(z^m conj(z)^n) = 0 around
  // the closed boundary); project the quadrature onto that structure.
  table.mu = 0.5 * (table.mu + table.mu.adjoint()).eval();
  return table;
}

CoeffMatrix orthonormal_basis(const MomentTable& moments, double cond_cap) {
  const Eigen::Index dim = moments.mu.rows();
  if (dim < 2) throw InputError("orthonormal_basis: moment table too small");
  if (!(cond_cap >= 1.0)) throw InputError("orthonormal_basis: cond_cap must be >= 1");

  // Degree-1 block must be positive definite or the data is not a Gram table.
  {
    const Eigen::MatrixXcd G1 = moments.gram(1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G1);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw InputError("orthonormal_basis: Gram is not positive definite at degree 1");
  }

  // Largest degree whose normalized Gram block stays well conditioned.
  std::size_t eff = 1;
  for (Eigen::Index d = 1; d < dim; ++d) {
    const Eigen::MatrixXcd G = moments.gram(static_cast<std::size_t>(d));
    Eigen::VectorXd s = G.diagonal().real().cwiseSqrt();
    if ((G.diagonal().real().array() <= 0.0).any()) break;
    const Eigen::MatrixXcd Gn =
        s.cwiseInverse().asDiagonal() * G * s.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Gn);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0 || hi / lo > cond_cap) break;
    eff = static_cast<std::size_t>(d);
  }

  const Eigen::Index m = static_cast<Eigen::Index>(eff) + 1;
  const Eigen::MatrixXcd G = moments.gram(eff);
  Eigen::LLT<Eigen::MatrixXcd> llt(G);
  if (llt.info() != Eigen::Success)
    throw NumericError("orthonormal_basis: Cholesky failed inside the conditioning cap");
  CoeffMatrix basis;
  basis.effective_degree = eff;
  basis.C = llt.matrixL().solve(Eigen::MatrixXcd::Identity(m, m));

  // One refinement pass: the first factorization leaves a residual of order
  // machine epsilon times the block condition number, the second removes it.
  const Eigen::MatrixXcd R = basis.C * G * basis.C.adjoint();
  Eigen::LLT<Eigen::MatrixXcd> rllt(R);
  if (rllt.info() == Eigen::Success)
    basis.C = rllt.matrixL().solve(basis.C).eval();
  return basis;
}

Eigen::MatrixXcd evaluate_basis(const CoeffMatrix& basis, const std::vector<Complex>& points) {
  const Eigen::Index m = basis.C.rows();
  Eigen::MatrixXcd E(static_cast<Eigen::Index>(points.size()), m);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const Complex z = points[q];
    for (Eigen::Index k = 0; k < m; ++k) {
      Complex acc = basis.C(k, k);
      for (Eigen::Index j = k - 1; j >= 0; --j) acc = acc * z + basis.C(k, j);
      E(static_cast<Eigen::Index>(q), k) = acc;
    }
  }
  return E;
}

}  // namespace npspectra
