#include "amht/model.hpp"

#include <cmath>
#include <limits>

#include "amht/rng.hpp"

namespace amht {

void Dataset::validate() const {
    if (x.rows() != y.size())
        throw data_error("dataset: x and y row counts differ");
    if (x.rows() < 2) throw data_error("dataset: need n >= 2");
    if (x.cols() < 1) throw data_error("dataset: need p >= 1");
    if (!x.allFinite() || !y.allFinite())
        throw data_error("dataset: non-finite entry");
}

VectorXd ParametricModel::grad_or_fd(const VectorXd& x, const VectorXd& theta) const {
    if (gradient) return gradient(x, theta);
    static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    VectorXd g(d);
    VectorXd t = theta;
    for (int i = 0; i < d; ++i) {
        const double step = base * std::max(1.0, std::abs(theta[i]));
        const double saved = t[i];
        t[i] = saved + step;
        const double fp = mean(x, t);
        t[i] = saved - step;
        const double fm = mean(x, t);
        t[i] = saved;
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

namespace {

struct LmState {
    VectorXd theta;
    VectorXd residuals;
    double rss = std::numeric_limits<double>::infinity();
    bool converged = false;
    bool diverged = false;
    int iterations = 0;
    double gradient_norm = std::numeric_limits<double>::infinity();
};

// residuals r = y - g(x, theta); returns false on non-finite model output
bool eval_residuals(const Dataset& data, const ParametricModel& model,
                    const VectorXd& theta, VectorXd& r) {
    const int n = data.n();
    r.resize(n);
    for (int j = 0; j < n; ++j) {
        const double g = model.mean(data.x.row(j), theta);
        if (!std::isfinite(g)) return false;
        r[j] = data.y[j] - g;
    }
    return true;
}

// Jacobian of the model mean, row j = grad g(x_j, theta)^T
bool eval_jacobian(const Dataset& data, const ParametricModel& model,
                   const VectorXd& theta, MatrixXd& jac) {
    const int n = data.n();
    jac.resize(n, model.d);
    for (int j = 0; j < n; ++j) {
        const VectorXd g = model.grad_or_fd(data.x.row(j), theta);
        if (!g.allFinite()) return false;
        jac.row(j) = g.transpose();
    }
    return true;
}

LmState lm_from(const Dataset& data, const ParametricModel& model,
                const VectorXd& init, const FitOptions& opt) {
    LmState st;
    st.theta = init;
    VectorXd r;
    if (!eval_residuals(data, model, st.theta, r)) {
        st.diverged = true;
        return st;
    }
    st.residuals = r;
    st.rss = r.squaredNorm();
    if (!std::isfinite(st.rss)) {
        st.diverged = true;
        return st;
    }

    const int d = model.d;
    double lambda = opt.initial_damping;
    MatrixXd jac;
    const MatrixXd eye = MatrixXd::Identity(d, d);

    for (int it = 1; it <= opt.max_iterations; ++it) {
        st.iterations = it;
        if (!eval_jacobian(data, model, st.theta, jac)) {
            st.diverged = true;
            return st;
        }
        const VectorXd jtr = jac.transpose() * st.residuals;
        st.gradient_norm = 2.0 * jtr.norm();
        if (st.gradient_norm < opt.gradient_tol) {
            st.converged = true;
            return st;
        }
        const MatrixXd jtj = jac.transpose() * jac;

        bool accepted = false;
        VectorXd r_new;
        double rss_new = 0.0;
        VectorXd theta_new;
        for (int tries = 0; tries < 30; ++tries) {
            const VectorXd delta = (jtj + lambda * eye).ldlt().solve(jtr);
            theta_new = st.theta + delta;
            if (theta_new.allFinite() && eval_residuals(data, model, theta_new, r_new)) {
                rss_new = r_new.squaredNorm();
                if (std::isfinite(rss_new) && rss_new < st.rss) {
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
        if (!accepted) {
            // Damping exhausted: we are at a (numerical) local minimum.
            st.converged = st.gradient_norm < 1e-4 * (1.0 + st.rss);
            return st;
        }
        const double rel = (st.rss - rss_new) / std::max(st.rss, 1e-300);
        if (rel < opt.rss_rel_tol) {
            // Improvement below tolerance: stop without moving, so a refit
            // from theta_hat is an exact fixed point.
            st.converged = true;
            return st;
        }
        st.theta = theta_new;
        st.residuals = r_new;
        st.rss = rss_new;
        lambda = std::max(lambda * 0.1, 1e-12);
    }
    return st;
}

} // namespace

FitResult fit_least_squares(const Dataset& data, const ParametricModel& model,
                            const std::optional<VectorXd>& init,
                            const FitOptions& options) {
    data.validate();
    if (model.d >= data.n())
        throw fit_error("fit: ill-posed, parameter dimension d=" +
                        std::to_string(model.d) + " >= n=" + std::to_string(data.n()));
    if (init && init->size() != model.d)
        throw contract_error("fit: init length != d");

    LmState best;
    bool any = false;
    if (init) {
        best = lm_from(data, model, *init, options);
        if (best.diverged)
            throw fit_error("fit: non-finite model output during iteration");
        any = true;
    } else {
        std::vector<VectorXd> starts;
        if (model.default_init) starts.push_back(*model.default_init);
        Rng rng(splitmix64(options.seed));
        const int extra = std::max(options.restarts - static_cast<int>(starts.size()), 0);
        for (int s = 0; s < extra; ++s) {
            VectorXd t(model.d);
            for (int i = 0; i < model.d; ++i) t[i] = rng.normal();
            starts.push_back(std::move(t));
        }
        for (const auto& start : starts) {
            LmState st = lm_from(data, model, start, options);
            if (st.diverged) continue;  // a single bad start is not fatal
            if (!any || st.rss < best.rss) {
                best = st;
                any = true;
            }
        }
        if (!any)
            throw fit_error("fit: non-finite model output from every start");
    }

    FitResult out;
    out.theta_hat = best.theta;
    out.residuals = best.residuals;
    out.rss = best.rss;
    out.converged = best.converged;
    out.iterations = best.iterations;
    out.gradient_norm = best.gradient_norm;
    return out;
}

double gradient_check(const ParametricModel& model, const VectorXd& theta,
                      const std::vector<VectorXd>& probes) {
    if (!model.has_gradient())
        throw contract_error("gradient_check: model has no analytic gradient");
    ParametricModel numeric = model;
    numeric.gradient = nullptr;
    double worst = 0.0;
    for (const auto& x : probes) {
        const VectorXd ga = model.gradient(x, theta);
        const VectorXd gn = numeric.grad_or_fd(x, theta);
        const double denom = std::max(ga.norm(), 1.0);
        worst = std::max(worst, (ga - gn).norm() / denom);
    }
    return worst;
}

namespace {

ParametricModel linear_model(int p) {
    ParametricModel m;
    m.name = "linear";
    m.d = p;
    m.mean = [](const VectorXd& x, const VectorXd& th) { return x.dot(th); };
    m.gradient = [](const VectorXd& x, const VectorXd&) { return x; };
    return m;
}

ParametricModel polynomial_model(int p, int degree) {
    ParametricModel m;
    m.name = "polynomial:" + std::to_string(degree);
    m.d = 1 + p * degree;
    m.mean = [p, degree](const VectorXd& x, const VectorXd& th) {
        double v = th[0];
        int k = 1;
        for (int i = 0; i < p; ++i) {
            double pw = 1.0;
            for (int dgr = 1; dgr <= degree; ++dgr) {
                pw *= x[i];
                v += th[k++] * pw;
            }
        }
        return v;
    };
    m.gradient = [p, degree](const VectorXd& x, const VectorXd& th) {
        VectorXd g(th.size());
        g[0] = 1.0;
        int k = 1;
        for (int i = 0; i < p; ++i) {
            double pw = 1.0;
            for (int dgr = 1; dgr <= degree; ++dgr) {
                pw *= x[i];
                g[k++] = pw;
            }
        }
        return g;
    };
    return m;
}

// g(x, theta) = theta_1 * exp(theta_2^T x), the Study 1/3 null family.
ParametricModel exp_index_model(int p) {
    ParametricModel m;
    m.name = "exp-index";
    m.d = 1 + p;
    m.mean = [](const VectorXd& x, const VectorXd& th) {
        return th[0] * std::exp(th.tail(th.size() - 1).dot(x));
    };
    m.gradient = [](const VectorXd& x, const VectorXd& th) {
        const double e = std::exp(th.tail(th.size() - 1).dot(x));
        VectorXd g(th.size());
        g[0] = e;
        g.tail(th.size() - 1) = th[0] * e * x;
        return g;
    };
    VectorXd init = VectorXd::Zero(m.d);
    init[0] = 1.0;  // theta_1 = 0 makes the index block a stationary ridge
    m.default_init = init;
    return m;
}

// g(x, (beta, gamma)) = beta^T x + gamma (beta^T x)^2, the Study 2 null family.
ParametricModel index_quadratic_model(int p) {
    ParametricModel m;
    m.name = "index-quadratic";
    m.d = p + 1;
    m.mean = [p](const VectorXd& x, const VectorXd& th) {
        const double u = th.head(p).dot(x);
        return u + th[p] * u * u;
    };
    m.gradient = [p](const VectorXd& x, const VectorXd& th) {
        const double u = th.head(p).dot(x);
        VectorXd g(p + 1);
        g.head(p) = (1.0 + 2.0 * th[p] * u) * x;
        g[p] = u * u;
        return g;
    };
    return m;
}

// Linear in the features (x1, x2^2, x3^3, x4 x5, sin x6); Study 4 null.
ParametricModel study4_model(int p) {
    if (p < 6) throw data_error("study4-features: needs p >= 6");
    ParametricModel m;
    m.name = "study4-features";
    m.d = 5;
    auto feats = [](const VectorXd& x) {
        VectorXd f(5);
        f << x[0], x[1] * x[1], x[2] * x[2] * x[2], x[3] * x[4], std::sin(x[5]);
        return f;
    };
    m.mean = [feats](const VectorXd& x, const VectorXd& th) { return feats(x).dot(th); };
    m.gradient = [feats](const VectorXd& x, const VectorXd&) { return feats(x); };
    return m;
}

// Quadratic-geography family for the real-estate example:
// alpha_0 + sum alpha_j x_j + alpha_7 x5^2 + alpha_8 x6^2 + alpha_9 x5 x6.
ParametricModel quadratic_geo_model(int p) {
    if (p != 6) throw data_error("quadratic-geo: needs exactly p = 6 covariates");
    ParametricModel m;
    m.name = "quadratic-geo";
    m.d = 10;
    auto feats = [](const VectorXd& x) {
        VectorXd f(10);
        f << 1.0, x[0], x[1], x[2], x[3], x[4], x[5],
             x[4] * x[4], x[5] * x[5], x[4] * x[5];
        return f;
    };
    m.mean = [feats](const VectorXd& x, const VectorXd& th) { return feats(x).dot(th); };
    m.gradient = [feats](const VectorXd& x, const VectorXd&) { return feats(x); };
    return m;
}

} // namespace

ParametricModel make_model(const std::string& name, int p) {
    if (name == "linear") return linear_model(p);
    if (name == "exp-index") return exp_index_model(p);
    if (name == "index-quadratic") return index_quadratic_model(p);
    if (name == "study4-features") return study4_model(p);
    if (name == "quadratic-geo") return quadratic_geo_model(p);
    if (name.rfind("polynomial:", 0) == 0) {
        const int degree = std::stoi(name.substr(11));
        if (degree < 1) throw data_error("polynomial degree must be >= 1");
        return polynomial_model(p, degree);
    }
    throw data_error("unknown model '" + name + "'");
}

std::vector<std::string> model_registry_names() {
    return {"linear", "polynomial:k", "exp-index", "index-quadratic",
            "study4-features", "quadratic-geo"};
}

} // namespace amht
