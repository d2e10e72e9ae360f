#ifndef AMHT_SIMULATION_HPP
#define AMHT_SIMULATION_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amht/hybrid_test.hpp"
#include "amht/model.hpp"
#include "amht/rng.hpp"

namespace amht {

enum class Covariance { identity, ar_half };

// One cell of the simulation grid.
//   Study 1: Y = 0.25 exp(2 a^T X) + a_dep sin(b^T X) + e      (iid or AR X)
//   Study 2: Y = a^T X + 0.8 (a^T X)^2 + a_dep tanh(b^T X) + e (identity X)
//   Study 3: Y = 0.25 exp(2 X1) + a_dep {0.5 X2^3 + cos X3 + X4 - |X5|
//                 + tanh(0.6 pi X6) + X7 X8} + e               (p = 8)
//   Study 4: Y = c1 X1 + c2 X2^2 + c3 X3^3 + c4 X4 X5 + c5 sin X6
//                 + a_dep {0.2 X1^2 + 0.3 X2^3} + e            (p >= 6)
// with alpha = (1..1,0..0)/sqrt(p/2), beta = (0..0,1..1)/sqrt(p/2) and the
// Study 4 coefficients C/||C||, C = (1, 1/2, 1/3, 1, 1).
struct StudySpec {
    int id = 1;
    int n = 200;
    int p = 2;
    double a = 0.0;
    Covariance covariance = Covariance::identity;
    std::string null_family;  // empty = study default

    void validate() const;
    std::string default_family() const;
};

struct PowerRow {
    int study = 0;
    int n = 0;
    int p = 0;
    double a = 0.0;
    Covariance covariance = Covariance::identity;
    double rejection_rate = 0.0;
    std::vector<std::int64_t> q_hat_histogram;  // counts over q = 0..p
    int replications = 0;
    int failures = 0;
    std::uint64_t seed = 0;
    double zheng_rejection_rate = -1.0;  // < 0 when not computed
};

struct PowerTable {
    std::vector<PowerRow> rows;
    double level = 0.05;
    std::uint64_t seed = 0;
    int replications = 0;
};

struct RunOptions {
    int replications = 500;
    double level = 0.05;
    std::uint64_t seed = 0;
    int threads = 0;          // 0 = hardware concurrency
    bool with_zheng = false;  // also evaluate the Zheng baseline per replication
    TestConfig test;
};

// One draw of X per the covariance spec. AR(0.5) uses a cached Cholesky.
VectorXd mvn_sample(Rng& rng, int p, Covariance cov);

// Full dataset draw for one replication: X rows first (row-major), then the
// error vector, all from the single rng stream.
Dataset generate(const StudySpec& study, Rng& rng);

// Per-replication sub-seed: splitmix64 chain over
// (seed, study, n, p, covariance, bits(a), rep).
std::uint64_t replication_seed(std::uint64_t seed, const StudySpec& study, int rep);

// Monte Carlo driver. Rejection = p_value <= level. Replications are
// distributed over a thread pool; each owns a sub-seeded stream and a
// preallocated output slot, so the result is independent of thread count.
// Fit failures are counted; more than 5% fails the run.
PowerTable run_study(const std::vector<StudySpec>& grid, const RunOptions& options);

// Convenience: Tn samples for one grid cell (used for divergence and
// distribution-shape checks). Failed replications are skipped.
std::vector<double> tn_samples(const StudySpec& study, const RunOptions& options);

std::string covariance_name(Covariance cov);
Covariance covariance_from_name(const std::string& name);

} // namespace amht

#endif
