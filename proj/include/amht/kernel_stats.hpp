#ifndef AMHT_KERNEL_STATS_HPP
#define AMHT_KERNEL_STATS_HPP

#include <Eigen/Dense>

#include "amht/model.hpp"

namespace amht {

// Product-Gaussian kernel K(u) = prod_i (2 pi)^{-1/2} exp(-u_i^2 / 2) with
// bandwidth rule h = c_h * n^{-1/(p+4)} on standardized covariates.
struct KernelConfig {
    double bandwidth_multiplier = 1.0;  // c_h
    double bandwidth(int n, int p) const;
};

// w(x) = c * exp(-||x||_2)
struct WeightConfig {
    double c = 0.12;
};

double weight(const VectorXd& x, const WeightConfig& cfg);

// V_0 = (1/n) sum_j eta_j w_j
double v0(const VectorXd& residuals, const VectorXd& weights);

// V_1 = 1/(n(n-1)) sum_{j != k} eta_j eta_k (1/h^p) K((x_j - x_k)/h).
// Exact O(n^2) upper-triangle sum, doubled, with Neumaier compensation.
double v1(const VectorXd& residuals, const MatrixXd& x, const KernelConfig& cfg);
double v1(const VectorXd& residuals, const MatrixXd& x, double h);

// sigma0^2 estimator:
//   (n^-1 sum eta_j^2) [ n^-1 sum w_j^2
//       - (n^-1 sum gdot_j w_j)^T (n^-1 sum gdot_j gdot_j^T)^-1 (n^-1 sum gdot_j w_j) ]
// Gradients gdot_j = grad g(x_j, theta_hat) are taken on the raw covariates;
// the weights come from the caller (standardized covariates in the pipeline).
// Throws degenerate_variance_error when the Gram matrix is singular
// (Condition 6: E[g_dot g_dot^T] nonsingular).
double sigma0_sq_hat(const FitResult& fit, const MatrixXd& x,
                     const ParametricModel& model, const VectorXd& weights);

struct ZhengResult {
    double statistic = 0.0;
    double p_value = 0.5;
};

// Zheng (1996)-type standardized statistic:
//   n h^{p/2} V1 / sqrt(Sigma_Zh),
//   Sigma_Zh = 2/(n(n-1)h^p) sum_{j != k} K^2((x_j-x_k)/h) eta_j^2 eta_k^2,
// upper-tail standard-normal p-value.
ZhengResult zheng_statistic(const VectorXd& residuals, const MatrixXd& x,
                            const KernelConfig& cfg);

// Column-wise (x - mean) / sd with the population (1/n) sd convention.
// Throws data_error on a constant column.
MatrixXd standardize_columns(const MatrixXd& x);

} // namespace amht

#endif
