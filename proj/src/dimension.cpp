#include "amht/dimension.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace amht {

VectorXcd char_moment(const MatrixXd& x_centered, const VectorXd& residuals, double t) {
    const int n = static_cast<int>(x_centered.rows());
    const int p = static_cast<int>(x_centered.cols());
    if (residuals.size() != n) throw contract_error("char_moment: length mismatch");
    VectorXcd m = VectorXcd::Zero(p);
    for (int j = 0; j < n; ++j) {
        const std::complex<double> phase(std::cos(t * residuals[j]),
                                         std::sin(t * residuals[j]));
        for (int i = 0; i < p; ++i) m[i] += x_centered(j, i) * phase;
    }
    return m / static_cast<double>(n);
}

TargetMatrix target_matrix(const MatrixXd& x, const VectorXd& residuals) {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (n < 2) throw contract_error("target_matrix: n >= 2 required");
    if (residuals.size() != n) throw contract_error("target_matrix: length mismatch");

    MatrixXd xc = x.rowwise() - x.colwise().mean();

    // Row t of mhat is m_n(eta_t)^T. The phase exp(i eta_t eta_j) is
    // symmetric in (t, j), so each pair feeds two rows at once.
    MatrixXcd mhat = MatrixXcd::Zero(n, p);
    for (int t = 0; t < n; ++t) {
        const double att = residuals[t] * residuals[t];
        const std::complex<double> diag(std::cos(att), std::sin(att));
        for (int i = 0; i < p; ++i) mhat(t, i) += xc(t, i) * diag;
        for (int j = t + 1; j < n; ++j) {
            const double a = residuals[t] * residuals[j];
            const std::complex<double> phase(std::cos(a), std::sin(a));
            for (int i = 0; i < p; ++i) {
                mhat(t, i) += xc(j, i) * phase;
                mhat(j, i) += xc(t, i) * phase;
            }
        }
    }
    mhat /= static_cast<double>(n);

    TargetMatrix out;
    // sum_t m(eta_t) m(eta_t)^H with row t = m(eta_t)^T
    out.m = (mhat.transpose() * mhat.conjugate()) / static_cast<double>(n);
    // enforce exact Hermitian symmetry against rounding
    out.m = 0.5 * (out.m + out.m.adjoint().eval());
    out.eigenvalues = hermitian_eigenvalues(out.m);
    return out;
}

VectorXd hermitian_eigenvalues(const MatrixXcd& m) {
    const int p = static_cast<int>(m.rows());
    if (m.cols() != p) throw contract_error("hermitian_eigenvalues: square matrix required");
    const double scale = std::max(1.0, m.norm());
    if ((m - m.adjoint()).norm() > 1e-10 * scale)
        throw contract_error("hermitian_eigenvalues: input not Hermitian within 1e-10");

    // [[Re, -Im], [Im, Re]] is real symmetric and carries each eigenvalue
    // of m exactly twice.
    MatrixXd embed(2 * p, 2 * p);
    embed.topLeftCorner(p, p) = m.real();
    embed.topRightCorner(p, p) = -m.imag();
    embed.bottomLeftCorner(p, p) = m.imag();
    embed.bottomRightCorner(p, p) = m.real();
    embed = 0.5 * (embed + embed.transpose().eval());

    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(embed, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw contract_error("hermitian_eigenvalues: eigensolver failed");
    const VectorXd all = solver.eigenvalues();  // ascending, duplicated pairs

    VectorXd out(p);
    for (int i = 0; i < p; ++i)
        out[i] = 0.5 * (all[2 * p - 1 - 2 * i] + all[2 * p - 2 - 2 * i]);
    return out;
}

RidgeConfig default_ridges(int n, int p) {
    if (n < 2) throw contract_error("default_ridges: n >= 2 required");
    if (p < 1) throw contract_error("default_ridges: p >= 1 required");
    const double base = std::sqrt(static_cast<double>(p)) * std::log(static_cast<double>(n)) /
                        std::sqrt(static_cast<double>(n));
    RidgeConfig cfg;
    cfg.c1n = 3e-4 * base;
    cfg.c2n = 0.8 * base;
    cfg.tau = 0.5;
    return cfg;
}

TdrrChain tdrr_chain(const VectorXd& eigenvalues, const RidgeConfig& cfg) {
    const int p = static_cast<int>(eigenvalues.size());
    if (p < 1) throw contract_error("tdrr_dimension: empty spectrum");
    if (cfg.c1n <= 0.0 || cfg.c2n <= 0.0)
        throw contract_error("tdrr_dimension: ridges must be positive");
    if (cfg.tau <= 0.0 || cfg.tau >= 1.0)
        throw contract_error("tdrr_dimension: tau must lie in (0, 1)");
    for (int j = 0; j + 1 < p; ++j)
        if (eigenvalues[j] + 1e-10 < eigenvalues[j + 1])
            throw contract_error("tdrr_dimension: eigenvalues not descending");

    // s_j with the boundary convention s_j = 0 for j > p
    std::vector<double> s(p + 2, 0.0);
    for (int j = 0; j < p; ++j) {
        const double lam = std::max(eigenvalues[j], 0.0);
        s[j] = lam / (lam + 1.0);
    }
    // s*_j for j = 1..p+1 (0-based 0..p)
    std::vector<double> sstar(p + 1, 0.0);
    for (int j = 0; j <= p; ++j)
        sstar[j] = (s[j] * s[j] + cfg.c1n) / (s[j + 1] * s[j + 1] + cfg.c1n) - 1.0;

    TdrrChain chain;
    chain.s_hat.assign(s.begin(), s.begin() + p);
    chain.s_star.assign(sstar.begin(), sstar.begin() + p);
    chain.ratios.resize(p);
    for (int j = 0; j < p; ++j) {
        chain.ratios[j] = (sstar[j + 1] + cfg.c2n) / (sstar[j] + cfg.c2n);
        if (chain.ratios[j] <= cfg.tau) chain.q_hat = j + 1;
    }
    return chain;
}

int tdrr_dimension(const VectorXd& eigenvalues, const RidgeConfig& cfg) {
    return tdrr_chain(eigenvalues, cfg).q_hat;
}

} // namespace amht
