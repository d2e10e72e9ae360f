#include "amht/kernel_stats.hpp"

#include <cmath>

namespace amht {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

// Neumaier compensated accumulator: summation error stays O(eps)
// independent of term order, which keeps V1 permutation-invariant
// at the 1e-14 level.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// prod_i (2 pi)^{-1/2} exp(-u_i^2/2) evaluated as a single exponential
double product_gaussian(const Eigen::RowVectorXd& u, double norm_const) {
    return norm_const * std::exp(-0.5 * u.squaredNorm());
}

double gaussian_norm_const(int p) { return std::pow(kInvSqrt2Pi, p); }

} // namespace

double KernelConfig::bandwidth(int n, int p) const {
    if (n < 2) throw contract_error("bandwidth: n >= 2 required");
    if (bandwidth_multiplier <= 0.0)
        throw contract_error("bandwidth: multiplier must be > 0");
    return bandwidth_multiplier * std::pow(static_cast<double>(n), -1.0 / (p + 4));
}

double weight(const VectorXd& x, const WeightConfig& cfg) {
    return cfg.c * std::exp(-x.norm());
}

double v0(const VectorXd& residuals, const VectorXd& weights) {
    if (residuals.size() != weights.size())
        throw contract_error("v0: length mismatch");
    CompensatedSum s;
    for (int j = 0; j < residuals.size(); ++j) s.add(residuals[j] * weights[j]);
    return s.value() / static_cast<double>(residuals.size());
}

double v1(const VectorXd& residuals, const MatrixXd& x, double h) {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (n < 2) throw contract_error("v1: n >= 2 required");
    if (residuals.size() != n) throw contract_error("v1: length mismatch");

    const double norm_const = gaussian_norm_const(p);
    CompensatedSum s;
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            const double kv = product_gaussian((x.row(j) - x.row(k)) / h, norm_const);
            s.add(2.0 * residuals[j] * residuals[k] * kv);
        }
    }
    const double hp = std::pow(h, p);
    return s.value() / (hp * static_cast<double>(n) * (n - 1.0));
}

double v1(const VectorXd& residuals, const MatrixXd& x, const KernelConfig& cfg) {
    return v1(residuals, x, cfg.bandwidth(static_cast<int>(x.rows()),
                                          static_cast<int>(x.cols())));
}

double sigma0_sq_hat(const FitResult& fit, const MatrixXd& x,
                     const ParametricModel& model, const VectorXd& weights) {
    const int n = static_cast<int>(x.rows());
    if (fit.residuals.size() != n || weights.size() != n)
        throw contract_error("sigma0_sq_hat: length mismatch");

    const int d = model.d;
    MatrixXd gram = MatrixXd::Zero(d, d);      // n^-1 sum gdot gdot^T
    VectorXd gw = VectorXd::Zero(d);           // n^-1 sum gdot w
    double w2 = 0.0;
    for (int j = 0; j < n; ++j) {
        const VectorXd g = model.grad_or_fd(x.row(j), fit.theta_hat);
        gram.noalias() += g * g.transpose();
        gw.noalias() += g * weights[j];
        w2 += weights[j] * weights[j];
    }
    gram /= n;
    gw /= n;
    w2 /= n;

    Eigen::FullPivLU<MatrixXd> lu(gram);
    if (!lu.isInvertible())
        throw degenerate_variance_error(
            "sigma0_sq_hat: singular gradient Gram matrix "
            "(Condition 6 fails: E[g_dot g_dot^T] must be nonsingular)");

    const double bracket = w2 - gw.dot(lu.solve(gw));
    const double s2 = fit.residuals.squaredNorm() / n;
    return s2 * bracket;
}

ZhengResult zheng_statistic(const VectorXd& residuals, const MatrixXd& x,
                            const KernelConfig& cfg) {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (n < 2) throw contract_error("zheng_statistic: n >= 2 required");
    const double h = cfg.bandwidth(n, p);
    const double hp = std::pow(h, p);

    const double norm_const = gaussian_norm_const(p);
    CompensatedSum num, var;
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            const double kv = product_gaussian((x.row(j) - x.row(k)) / h, norm_const);
            const double ee = residuals[j] * residuals[k];
            num.add(2.0 * ee * kv);
            var.add(2.0 * kv * kv * ee * ee);
        }
    }
    const double v1_val = num.value() / (hp * n * (n - 1.0));
    const double sigma = 2.0 * var.value() / (n * (n - 1.0) * hp);

    ZhengResult out;
    if (sigma <= 0.0) {
        if (v1_val == 0.0) return out;  // 0/0: all-zero residuals
        throw degenerate_variance_error("zheng_statistic: nonpositive variance estimate");
    }
    out.statistic = n * std::pow(h, p / 2.0) * v1_val / std::sqrt(sigma);
    out.p_value = 0.5 * std::erfc(out.statistic / std::sqrt(2.0));
    return out;
}

MatrixXd standardize_columns(const MatrixXd& x) {
    const int n = static_cast<int>(x.rows());
    MatrixXd z = x;
    for (int i = 0; i < x.cols(); ++i) {
        const double mu = x.col(i).mean();
        const double sd = std::sqrt((x.col(i).array() - mu).square().sum() / n);
        if (sd < 1e-12 * (1.0 + std::abs(mu)))
            throw data_error("standardize: covariate column " + std::to_string(i + 1) +
                             " is constant");
        z.col(i) = (x.col(i).array() - mu) / sd;
    }
    return z;
}

} // namespace amht
