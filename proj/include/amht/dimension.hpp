#ifndef AMHT_DIMENSION_HPP
#define AMHT_DIMENSION_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "amht/errors.hpp"

namespace amht {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// M_n = (1/n) sum_j m_n(eta_j) m_n^H(eta_j) with its descending real spectrum.
struct TargetMatrix {
    MatrixXcd m;
    VectorXd eigenvalues;  // descending
};

// TDRR ridges. The recommended values decay like sqrt(p) log(n) / sqrt(n);
// see default_ridges.
struct RidgeConfig {
    double c1n = 0.0;
    double c2n = 0.0;
    double tau = 0.5;
};

// m_n(t) = (1/n) sum_j x_j exp(i t eta_j), x rows already centered.
VectorXcd char_moment(const MatrixXd& x_centered, const VectorXd& residuals, double t);

// Builds M_n: centers x by column means, evaluates char_moment at each
// t = eta_j and averages the outer products (the dF_eta(t) integral is the
// empirical average over t in {eta_1, ..., eta_n}).
TargetMatrix target_matrix(const MatrixXd& x, const VectorXd& residuals);

// All eigenvalues of a Hermitian matrix, sorted descending. Computed through
// the 2p x 2p real symmetric embedding [[Re, -Im], [Im, Re]], whose spectrum
// duplicates each eigenvalue; one copy of each pair is returned.
// Throws contract_error when the input is not Hermitian within 1e-10.
VectorXd hermitian_eigenvalues(const MatrixXcd& m);

// c1n = 3e-4 sqrt(p) ln(n)/sqrt(n), c2n = (4/5) sqrt(p) ln(n)/sqrt(n), tau = 1/2.
RidgeConfig default_ridges(int n, int p);

// Intermediate TDRR quantities, exposed for diagnostics.
struct TdrrChain {
    std::vector<double> s_hat;   // s_j, j = 1..p
    std::vector<double> s_star;  // s*_j, j = 1..p
    std::vector<double> ratios;  // r_j, j = 1..p
    int q_hat = 0;
};

TdrrChain tdrr_chain(const VectorXd& eigenvalues, const RidgeConfig& cfg);

// Thresholding double ridge ratio. eigenvalues must be descending; negative
// entries (floating-point noise) are clamped to 0. Returns q in [0, p].
//   s_j  = lam_j / (lam_j + 1), with s_j = 0 for j > p
//   s*_j = (s_j^2 + c1n) / (s_{j+1}^2 + c1n) - 1
//   r_j  = (s*_{j+1} + c2n) / (s*_j + c2n)
//   q    = 0 if r_j > tau for all j, else the largest j with r_j <= tau.
int tdrr_dimension(const VectorXd& eigenvalues, const RidgeConfig& cfg);

} // namespace amht

#endif
