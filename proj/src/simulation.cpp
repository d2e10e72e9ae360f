#include "amht/simulation.hpp"

#include <Eigen/Cholesky>
#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <thread>

namespace amht {

void StudySpec::validate() const {
    if (id < 1 || id > 4) throw data_error("study: id must be 1..4");
    if (n < 2) throw data_error("study: n >= 2 required");
    if (a < 0.0) throw data_error("study: a >= 0 required");
    if (id == 1 || id == 2) {
        if (p < 2 || p % 2 != 0)
            throw data_error("study 1/2: p must be even and >= 2");
    }
    if (id == 3 && p != 8) throw data_error("study 3: p = 8 required");
    if (id == 4 && p < 6) throw data_error("study 4: p >= 6 required");
    if (id != 1 && covariance != Covariance::identity)
        throw data_error("studies 2-4 use identity covariance");
}

std::string StudySpec::default_family() const {
    switch (id) {
        case 1: return "exp-index";
        case 2: return "index-quadratic";
        case 3: return "exp-index";
        default: return "study4-features";
    }
}

namespace {

// alpha = (1,..,1,0,..,0)/sqrt(p/2), beta = (0,..,0,1,..,1)/sqrt(p/2)
void index_directions(int p, VectorXd& alpha, VectorXd& beta) {
    const int half = p / 2;
    const double s = 1.0 / std::sqrt(static_cast<double>(half));
    alpha = VectorXd::Zero(p);
    beta = VectorXd::Zero(p);
    alpha.head(half).setConstant(s);
    beta.tail(p - half).setConstant(s);
}

const MatrixXd& ar_half_cholesky(int p) {
    static std::mutex mu;
    static std::map<int, MatrixXd> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(p);
    if (it == cache.end()) {
        MatrixXd sigma(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                sigma(i, j) = std::pow(0.5, std::abs(i - j));
        it = cache.emplace(p, MatrixXd(sigma.llt().matrixL())).first;
    }
    return it->second;
}

} // namespace

VectorXd mvn_sample(Rng& rng, int p, Covariance cov) {
    VectorXd z(p);
    for (int i = 0; i < p; ++i) z[i] = rng.normal();
    if (cov == Covariance::identity) return z;
    return ar_half_cholesky(p) * z;
}

Dataset generate(const StudySpec& study, Rng& rng) {
    study.validate();
    const int n = study.n;
    const int p = study.p;
    Dataset d;
    d.x.resize(n, p);
    d.y.resize(n);
    for (int j = 0; j < n; ++j) d.x.row(j) = mvn_sample(rng, p, study.covariance).transpose();

    VectorXd alpha, beta;
    if (study.id == 1 || study.id == 2) index_directions(p, alpha, beta);

    // Study 4 coefficients C/||C||, C = (1, 1/2, 1/3, 1, 1)
    VectorXd c4(5);
    c4 << 1.0, 0.5, 1.0 / 3.0, 1.0, 1.0;
    c4 /= c4.norm();

    for (int j = 0; j < n; ++j) {
        const auto x = d.x.row(j);
        double mean = 0.0;
        switch (study.id) {
            case 1:
                mean = 0.25 * std::exp(2.0 * x.dot(alpha)) + study.a * std::sin(x.dot(beta));
                break;
            case 2: {
                const double u = x.dot(alpha);
                mean = u + 0.8 * u * u + study.a * std::tanh(x.dot(beta));
                break;
            }
            case 3:
                mean = 0.25 * std::exp(2.0 * x[0]) +
                       study.a * (0.5 * x[1] * x[1] * x[1] + std::cos(x[2]) + x[3] -
                                  std::abs(x[4]) + std::tanh(0.6 * M_PI * x[5]) +
                                  x[6] * x[7]);
                break;
            case 4:
                mean = c4[0] * x[0] + c4[1] * x[1] * x[1] + c4[2] * x[2] * x[2] * x[2] +
                       c4[3] * x[3] * x[4] + c4[4] * std::sin(x[5]) +
                       study.a * (0.2 * x[0] * x[0] + 0.3 * x[1] * x[1] * x[1]);
                break;
        }
        d.y[j] = mean;
    }
    for (int j = 0; j < n; ++j) d.y[j] += rng.normal();
    return d;
}

std::uint64_t replication_seed(std::uint64_t seed, const StudySpec& study, int rep) {
    std::uint64_t h = splitmix64(seed);
    h = hash_combine(h, static_cast<std::uint64_t>(study.id));
    h = hash_combine(h, static_cast<std::uint64_t>(study.n));
    h = hash_combine(h, static_cast<std::uint64_t>(study.p));
    h = hash_combine(h, static_cast<std::uint64_t>(study.covariance));
    h = hash_combine(h, std::bit_cast<std::uint64_t>(study.a));
    h = hash_combine(h, static_cast<std::uint64_t>(rep));
    return h;
}

namespace {

struct RepOutcome {
    bool failed = false;
    bool rejected = false;
    bool zheng_rejected = false;
    int q_hat = 0;
};

RepOutcome run_one(const StudySpec& study, int rep, const RunOptions& opt,
                   const ParametricModel& model) {
    RepOutcome res;
    Rng rng(replication_seed(opt.seed, study, rep));
    const Dataset data = generate(study, rng);
    TestConfig cfg = opt.test;
    cfg.seed = rng.next_u64();  // multi-start stream, derived after the data
    try {
        const TestOutcome out = hybrid_test(data, model, cfg);
        res.q_hat = out.q_hat;
        res.rejected = out.p_value <= opt.level;
        if (opt.with_zheng) {
            // Same residuals/pipeline inputs as the hybrid test.
            FitOptions fo = cfg.fit;
            fo.seed = cfg.seed;
            const FitResult fit = fit_least_squares(data, model, std::nullopt, fo);
            const MatrixXd xs = standardize_columns(data.x);
            const ZhengResult z = zheng_statistic(fit.residuals, xs, cfg.kernel);
            res.zheng_rejected = z.p_value <= opt.level;
        }
    } catch (const error&) {
        res.failed = true;
    }
    return res;
}

} // namespace

PowerTable run_study(const std::vector<StudySpec>& grid, const RunOptions& options) {
    if (options.replications < 1)
        throw contract_error("run_study: replications >= 1 required");
    if (options.level <= 0.0 || options.level > 1.0)
        throw contract_error("run_study: level must lie in (0, 1]");

    PowerTable table;
    table.level = options.level;
    table.seed = options.seed;
    table.replications = options.replications;

    int threads = options.threads;
    if (threads <= 0)
        threads = std::max(1u, std::thread::hardware_concurrency());

    for (const StudySpec& study : grid) {
        study.validate();
        const std::string family =
            study.null_family.empty() ? study.default_family() : study.null_family;
        const ParametricModel model = make_model(family, study.p);

        const int reps = options.replications;
        std::vector<RepOutcome> results(reps);
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int rep = next.fetch_add(1);
                if (rep >= reps) break;
                results[rep] = run_one(study, rep, options, model);
            }
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(threads);
            for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        PowerRow row;
        row.study = study.id;
        row.n = study.n;
        row.p = study.p;
        row.a = study.a;
        row.covariance = study.covariance;
        row.replications = reps;
        row.seed = options.seed;
        row.q_hat_histogram.assign(study.p + 1, 0);
        std::int64_t rejections = 0, zheng_rejections = 0;
        for (const RepOutcome& r : results) {
            if (r.failed) {
                ++row.failures;
                continue;
            }
            ++row.q_hat_histogram[std::min(r.q_hat, study.p)];
            if (r.rejected) ++rejections;
            if (r.zheng_rejected) ++zheng_rejections;
        }
        if (row.failures * 20 > reps)
            throw fit_error("run_study: more than 5% of replications failed to fit");
        row.rejection_rate = static_cast<double>(rejections) / reps;
        if (options.with_zheng)
            row.zheng_rejection_rate = static_cast<double>(zheng_rejections) / reps;
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::vector<double> tn_samples(const StudySpec& study, const RunOptions& options) {
    study.validate();
    const std::string family =
        study.null_family.empty() ? study.default_family() : study.null_family;
    const ParametricModel model = make_model(family, study.p);

    const int reps = options.replications;
    std::vector<double> out(reps, std::numeric_limits<double>::quiet_NaN());
    std::atomic<int> next{0};
    int threads = options.threads;
    if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
    auto worker = [&]() {
        for (;;) {
            const int rep = next.fetch_add(1);
            if (rep >= reps) break;
            Rng rng(replication_seed(options.seed, study, rep));
            const Dataset data = generate(study, rng);
            TestConfig cfg = options.test;
            cfg.seed = rng.next_u64();
            try {
                out[rep] = hybrid_test(data, model, cfg).t_n;
            } catch (const error&) {
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    std::vector<double> clean;
    clean.reserve(reps);
    for (double v : out)
        if (std::isfinite(v)) clean.push_back(v);
    return clean;
}

std::string covariance_name(Covariance cov) {
    return cov == Covariance::identity ? "identity" : "ar";
}

Covariance covariance_from_name(const std::string& name) {
    if (name == "identity" || name == "id" || name == "iid") return Covariance::identity;
    if (name == "ar" || name == "ar_half" || name == "ar0.5") return Covariance::ar_half;
    throw data_error("unknown covariance '" + name + "' (use identity or ar)");
}

} // namespace amht
