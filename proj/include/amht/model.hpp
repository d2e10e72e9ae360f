#ifndef AMHT_MODEL_HPP
#define AMHT_MODEL_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "amht/errors.hpp"

namespace amht {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Sample {(x_1,y_1),...,(x_n,y_n)}: covariate rows and responses.
struct Dataset {
    MatrixXd x;  // n x p
    VectorXd y;  // n

    int n() const { return static_cast<int>(x.rows()); }
    int p() const { return static_cast<int>(x.cols()); }

    // Throws data_error unless n >= 2, p >= 1, rows match and all
    // entries are finite.
    void validate() const;
};

// A regression family g(x, theta) with parameter dimension d. The gradient
// is d g / d theta; when absent, central finite differences are used.
struct ParametricModel {
    int d = 0;
    std::function<double(const VectorXd& x, const VectorXd& theta)> mean;
    std::function<VectorXd(const VectorXd& x, const VectorXd& theta)> gradient;  // optional
    std::string name;
    std::optional<VectorXd> default_init;

    bool has_gradient() const { return static_cast<bool>(gradient); }

    // Gradient of g wrt theta at (x, theta): analytic if supplied, else
    // central differences with step cbrt(eps) * max(1, |theta_i|).
    VectorXd grad_or_fd(const VectorXd& x, const VectorXd& theta) const;
};

struct FitOptions {
    int max_iterations = 200;
    double rss_rel_tol = 1e-10;
    double gradient_tol = 1e-8;
    double initial_damping = 1e-3;
    int restarts = 10;           // multi-start count when no init is given
    std::uint64_t seed = 0;      // sub-seed source for multi-start draws
};

struct FitResult {
    VectorXd theta_hat;
    VectorXd residuals;      // y_j - g(x_j, theta_hat)
    double rss = 0.0;
    bool converged = false;
    int iterations = 0;
    double gradient_norm = 0.0;  // || 2 J^T r ||_2 at theta_hat
};

// Least squares by damped Gauss-Newton (Levenberg-Marquardt). With no init,
// runs FitOptions::restarts standard-normal starts and keeps the smallest
// rss. Deterministic given (data, init, options.seed).
FitResult fit_least_squares(const Dataset& data, const ParametricModel& model,
                            const std::optional<VectorXd>& init = std::nullopt,
                            const FitOptions& options = {});

// Max over probes of the relative difference between the analytic gradient
// and central finite differences.
double gradient_check(const ParametricModel& model, const VectorXd& theta,
                      const std::vector<VectorXd>& probes);

// Built-in family registry.
//   "linear"            g(x,theta) = theta^T x                   d = p
//   "polynomial:k"      intercept + per-coordinate powers 1..k   d = 1 + p*k
//   "exp-index"         theta_1 * exp(theta_2^T x)               d = 1 + p
//   "index-quadratic"   beta^T x + gamma * (beta^T x)^2          d = p + 1
//   "study4-features"   linear in (x1, x2^2, x3^3, x4*x5, sin x6) d = 5
//   "quadratic-geo"     intercept + x1..x6 + x5^2 + x6^2 + x5*x6 d = 10
// Throws data_error for unknown names.
ParametricModel make_model(const std::string& name, int p);

std::vector<std::string> model_registry_names();

} // namespace amht

#endif
