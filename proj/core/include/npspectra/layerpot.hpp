#ifndef NPSPECTRA_LAYERPOT_HPP
#define NPSPECTRA_LAYERPOT_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "npspectra/geometry.hpp"
#include "npspectra/types.hpp"

namespace npspectra {

// Dense Nystrom discretizations of the boundary operators associated with
// G(x,y) = -(1/2pi) log|x-y|:
//   K f(x)  = -2 int dG/dn_y (x,y) f(y) dsigma(y)   (double layer, K1 = 1)
//   S g(x)  =    int G(x,y) g(y) dsigma(y)          (single layer)
// The single layer requires the domain in normal position (inside the disk
// of radius 1/2, see rescale_to_normal) so that W*S is positive definite.

// Entry (i,j), i != j: (1/pi) <n_j, x_j - x_i> / |x_j - x_i|^2 * w_j;
// diagonal (1/pi)(kappa_i/2) w_i.
Eigen::MatrixXd assemble_K(const BoundaryMesh& mesh);

// Off-panel entries -(1/2pi) log|x_i - x_j| w_j. The logarithmic self and
// neighbour interaction (same edge, target within |tau| <= 2.5 panel
// half-lengths) uses a panel product rule exact for log x polynomial; targets
// of another edge crowding a shared corner get a subdivided interpolatory
// rule. Smooth closed meshes use the periodic Kussmaul-Martensen rule.
// The returned matrix has W*S symmetric to machine precision (required
// before the Cholesky whitening); one-sided product integration is only
// O(h^2) W-symmetric on its own, and that averaged-away defect (relative
// Frobenius) is written to *ws_asymmetry as a diagnostic when given.
Eigen::MatrixXd assemble_S(const BoundaryMesh& mesh, double* ws_asymmetry = nullptr);

// K* = W^{-1} K^T W, the adjoint for the discrete L2 pairing.
Eigen::MatrixXd discrete_adjoint(const Eigen::MatrixXd& Kmat, const Eigen::VectorXd& weights);

// || K S - S K* ||_F / ||S||_F.
double plemelj_residual(const Eigen::MatrixXd& Kmat, const Eigen::MatrixXd& Smat,
                        const Eigen::VectorXd& weights);

struct SpectrumResult {
  std::string method;               // "nystrom" or "bergman"
  std::size_t n_nodes = 0;          // boundary nodes (nystrom) / basis size (bergman)
  std::vector<double> eigenvalues;  // sorted descending
  double spectral_radius = 0.0;     // max |lambda| with the constant sector removed
  double pairing_residual = 0.0;    // worst distance from -lambda to the spectrum
  double plemelj_residual = 0.0;
  double asymmetry = 0.0;           // relative skew defect of A*K*, <= plemelj in practice
  double deflated_eigenvalue = 0.0; // the constant-sector eigenvalue (nystrom)
  Warnings warnings;
};

// Whitened eigensystem of the Plemelj-symmetrized problem. With A = W*S and
// A = L L^T, the matrix M = L^{-1} (A K*) L^{-T} is symmetric exactly when
// the discrete Plemelj identity K S = S K* holds; the defect is recorded and
// averaged away. Eigenvalues ascending (solver order).
struct SymmetrizedSystem {
  Eigen::LLT<Eigen::MatrixXd> llt;  // factor of A
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;     // columns, whitened coordinates
  Eigen::VectorXd weights;
  std::size_t constant_index = 0;   // eigenvector most correlated with the constant density
  double asymmetry = 0.0;  // skew half of A*K* averaged away, relative to ||A||_F

  // density g with <g, S g>-quotient equal to eigenvalues[k]: g = L^{-T} v_k
  Eigen::VectorXd density(std::size_t k) const;
};

SymmetrizedSystem symmetrized_system(const Eigen::MatrixXd& Kmat, const Eigen::MatrixXd& Smat,
                                     const Eigen::VectorXd& weights);

// Full spectrum of the symmetrized problem. The eigenvalue 1 sector is
// identified by correlation with the constant density (never by value
// proximity); with drop_constant it is excluded from spectral_radius and
// from the pairing scan. pairing_residual covers eigenvalues with
// |lambda| > 3 * asymmetry.
SpectrumResult symmetrized_spectrum(const Eigen::MatrixXd& Kmat, const Eigen::MatrixXd& Smat,
                                    const Eigen::VectorXd& weights, bool drop_constant = true);
SpectrumResult symmetrized_spectrum(const BoundaryMesh& mesh, bool drop_constant = true);

// Potential evaluation off the boundary by direct quadrature. Points closer
// than 3 local node spacings get a warning naming the distance.
std::vector<double> eval_single_layer(const BoundaryMesh& mesh, const Eigen::VectorXd& density,
                                      const std::vector<Complex>& points,
                                      Warnings* warnings = nullptr);
std::vector<double> eval_double_layer(const BoundaryMesh& mesh, const Eigen::VectorXd& density,
                                      const std::vector<Complex>& points,
                                      Warnings* warnings = nullptr);

// Verifies the jump relations by polynomial extrapolation along interior and
// exterior normal segments at distances (5..12) local spacings:
//   Tr_int D g = -(g + K g)/2        Tr_ext D g = (g - K g)/2
//   dS f/dn_int = (f - K* f)/2       dS f/dn_ext = (-f - K* f)/2
// Residuals are sup-norm, relative to the data size.
struct JumpReport {
  double dlayer_interior = 0.0;
  double dlayer_exterior = 0.0;
  double slayer_interior = 0.0;
  double slayer_exterior = 0.0;
  double max_residual = 0.0;
};
JumpReport jump_test(const BoundaryMesh& mesh, const Eigen::VectorXd& f,
                     const Eigen::VectorXd& g);

// Poincare's energy quotient <K* g, S g>_W / <g, S g>_W for mean-zero g,
// which equals (E_ext - E_int)/(E_ext + E_int) for the single layer field;
// the two energies are <(g -+ K* g)/2, S g>_W.
struct PoincareQuotient {
  double quotient = 0.0;
  double energy_interior = 0.0;
  double energy_exterior = 0.0;
};
PoincareQuotient poincare_quotient(const Eigen::MatrixXd& Kmat, const Eigen::MatrixXd& Smat,
                                   const Eigen::VectorXd& weights, const Eigen::VectorXd& g);

// Equilibrium density: ker(I - K*) via the smallest singular vector,
// normalized to unit W-norm and positive mean. s_variation is the W-weighted
// standard deviation of S g0 relative to its mean (S g0 is constant in the
// continuum limit).
struct EquilibriumResult {
  Eigen::VectorXd density;
  double s_variation = 0.0;
  Warnings warnings;
};
EquilibriumResult equilibrium_density(const Eigen::MatrixXd& Kmat, const Eigen::MatrixXd& Smat,
                                      const Eigen::VectorXd& weights);

// Weights of the mesh as an Eigen vector (convenience for the ops above).
Eigen::VectorXd weight_vector(const BoundaryMesh& mesh);

}  // namespace npspectra

#endif
