#ifndef NPSPECTRA_BERGMAN_HPP
#define NPSPECTRA_BERGMAN_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "npspectra/geometry.hpp"
#include "npspectra/types.hpp"

namespace npspectra {

// Monomial area moments mu[m][n] = int_Omega z^m conj(z)^n dA for
// 0 <= m, n <= max_deg + 1. The table is Hermitian by construction
// (conjugate-pair estimates averaged), so mu(0,0) is the real area and every
// leading Gram block is Hermitian.
struct MomentTable {
  Eigen::MatrixXcd mu;      // (max_deg + 2) x (max_deg + 2)
  std::size_t max_deg = 0;  // largest basis degree the table supports

  double area() const { return mu(0, 0).real(); }

  // Gram block of {1, z, ..., z^d}: G(m, n) = <z^m, z^n> = mu[m][n].
  Eigen::MatrixXcd gram(std::size_t d) const;
};

// Stokes reduction of the area moments to the boundary:
//   mu[m][n] = (1/(2i(n+1))) oint z^m conj(z)^{n+1} dz,
// evaluated with the mesh nodes, tangents and weights. The mesh must be in
// normal position (|z| <= ~1/2); max_deg > 60 is refused since beyond that
// the monomial scale ladder exhausts double precision.
MomentTable boundary_moments(const BoundaryMesh& mesh, std::size_t max_deg);

// Orthonormal polynomial basis of the Bergman space: rows of the
// lower-triangular C give e_k = sum_{m <= k} C(k, m) z^m with
// C * Gram * C^H = I on the kept block.
struct CoeffMatrix {
  Eigen::MatrixXcd C;                // (effective_degree + 1) square, lower triangular
  std::size_t effective_degree = 0;  // largest degree kept
};

// Cholesky orthonormalization of the monomials. The truncation keeps the
// largest degree whose diagonally normalized Gram block has spectral
// condition number <= cond_cap; the raw-scale conditioning is immaterial
// because Cholesky commutes with diagonal scaling. A second orthonormalization
// pass keeps C * Gram * C^H at machine-level identity even near the cap.
CoeffMatrix orthonormal_basis(const MomentTable& moments, double cond_cap = 1e12);

// E(q, k) = e_k(points[q]) by Horner evaluation, one row per point.
Eigen::MatrixXcd evaluate_basis(const CoeffMatrix& basis, const std::vector<Complex>& points);

}  // namespace npspectra

#endif
