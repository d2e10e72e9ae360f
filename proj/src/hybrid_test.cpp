#include "amht/hybrid_test.hpp"

#include <cmath>

namespace amht {

double chi2_1_upper_tail(double t) {
    if (t < 0.0) throw contract_error("chi2_1_upper_tail: t must be >= 0");
    return std::erfc(std::sqrt(0.5 * t));
}

double chi2_1_upper_quantile(double level) {
    if (level <= 0.0 || level >= 1.0)
        throw contract_error("chi2_1_upper_quantile: level must lie in (0, 1)");
    double lo = 0.0, hi = 1.0;
    while (chi2_1_upper_tail(hi) > level) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_1_upper_tail(mid) > level)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

TestOutcome hybrid_test(const Dataset& data, const ParametricModel& model,
                        const TestConfig& config) {
    data.validate();
    const int n = data.n();
    const int p = data.p();
    if (n < p + 2)
        throw data_error("hybrid_test: insufficient sample, need n >= p + 2");
    if (config.weight.c <= 0.0)
        throw contract_error("hybrid_test: weight constant c must be > 0");

    FitOptions fit_opt = config.fit;
    fit_opt.seed = config.seed;
    const FitResult fit = fit_least_squares(data, model, std::nullopt, fit_opt);

    const MatrixXd xs = standardize_columns(data.x);

    const TargetMatrix tm = target_matrix(xs, fit.residuals);
    const RidgeConfig ridges = config.ridges ? *config.ridges : default_ridges(n, p);
    const int q = tdrr_dimension(tm.eigenvalues, ridges);

    VectorXd w(n);
    for (int j = 0; j < n; ++j) w[j] = weight(xs.row(j), config.weight);

    const double s0 = sigma0_sq_hat(fit, data.x, model, w);
    const double mean_r2 = fit.residuals.squaredNorm() / n;
    if (s0 < 1e-12 * (1.0 + mean_r2))
        throw degenerate_variance_error(
            "hybrid_test: sigma0^2 estimate is degenerate (near-interpolating fit)");

    TestOutcome out;
    out.q_hat = q;
    out.h = config.kernel.bandwidth(n, p);
    out.v0 = v0(fit.residuals, w);
    out.sigma0_sq = s0;
    out.theta_hat = fit.theta_hat;
    out.eigenvalues = tm.eigenvalues;
    out.model_name = model.name;
    out.ridges = ridges;
    out.weight_c = config.weight.c;
    out.bandwidth_multiplier = config.kernel.bandwidth_multiplier;
    out.seed = config.seed;
    out.fit_converged = fit.converged;

    out.v1 = v1(fit.residuals, xs, out.h);
    if (q == 0) {
        out.branch = Branch::moment;
        out.t_n = n * out.v0 * out.v0 / s0;
    } else {
        out.branch = Branch::kernel;
        out.t_n = n * std::abs(out.v1) / s0;
    }
    out.p_value = chi2_1_upper_tail(out.t_n);
    return out;
}

} // namespace amht
