// amht: adaptive-to-model hybrid specification test for parametric regressions.
//
// Subcommands: fit, test, dimension, simulate, power-curve.
// Results go to stdout (or --out); logs go to stderr. Exit codes:
// 0 success, 1 pipeline error (JSON error body), 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "amht/io.hpp"

using nlohmann::json;

namespace {

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) vals.push_back(std::stod(tok));
    }
    if (vals.empty()) throw amht::data_error("empty grid: '" + text + "'");
    return vals;
}

std::vector<int> parse_int_grid(const std::string& text) {
    std::vector<int> vals;
    for (double v : parse_grid(text)) vals.push_back(static_cast<int>(v));
    return vals;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw amht::data_error("cannot write '" + out_path + "'");
        out << text << "\n";
    }
}

struct CommonArgs {
    std::string data_path;
    std::string model_name;
    std::string response = "y";
    std::string recipe;
    double c = 0.12;
    double ch = 1.0;
    double c1n = 0.0;  // 0 = use default_ridges(n, p)
    double c2n = 0.0;
    double tau = 0.5;
    std::uint64_t seed = 0;
    std::string out_path;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_model) {
    cmd->add_option("--data", args.data_path, "input CSV file (header row required)")
        ->required();
    auto* model = cmd->add_option("--model", args.model_name,
                                  "model family: linear, polynomial:k, exp-index, "
                                  "index-quadratic, study4-features, quadratic-geo");
    if (needs_model) model->required();
    cmd->add_option("--response", args.response, "response column name")
        ->capture_default_str();
    cmd->add_option("--recipe", args.recipe,
                    "comma-separated derived columns appended before fitting, e.g. "
                    "'square(5),product(5,6)'");
    cmd->add_option("--c", args.c, "weight constant c in w(x) = c exp(-||x||)")
        ->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--ch", args.ch, "bandwidth multiplier: h = ch * n^(-1/(p+4))")
        ->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--c1n", args.c1n,
                    "first TDRR ridge override (default 3e-4 sqrt(p) ln(n)/sqrt(n))");
    cmd->add_option("--c2n", args.c2n,
                    "second TDRR ridge override (default 0.8 sqrt(p) ln(n)/sqrt(n))");
    cmd->add_option("--tau", args.tau, "TDRR threshold in (0,1)")->capture_default_str();
    cmd->add_option("--seed", args.seed, "seed (affects multi-start fitting only)")
        ->capture_default_str();
    cmd->add_option("--out", args.out_path, "write primary output to this file");
}

amht::Dataset load_with_recipe(const CommonArgs& args) {
    amht::CsvSchema schema;
    schema.response = args.response;
    amht::CsvData csv = amht::load_csv(args.data_path, schema);
    std::cerr << "loaded " << csv.data.n() << " rows, " << csv.data.p()
              << " covariates from " << args.data_path << "\n";
    if (args.recipe.empty()) return csv.data;
    std::vector<amht::Term> terms;
    std::stringstream ss(args.recipe);
    std::string tok;
    // split on commas that are not inside parentheses
    std::string cur;
    int depth = 0;
    for (char chr : args.recipe) {
        if (chr == '(') ++depth;
        if (chr == ')') --depth;
        if (chr == ',' && depth == 0) {
            terms.push_back(amht::parse_term(cur));
            cur.clear();
        } else {
            cur += chr;
        }
    }
    if (!cur.empty()) terms.push_back(amht::parse_term(cur));
    return amht::feature_expand(csv.data, terms);
}

amht::TestConfig make_config(const CommonArgs& args, int n, int p) {
    amht::TestConfig cfg;
    cfg.weight.c = args.c;
    cfg.kernel.bandwidth_multiplier = args.ch;
    cfg.seed = args.seed;
    if (args.c1n > 0.0 || args.c2n > 0.0 || args.tau != 0.5) {
        amht::RidgeConfig r = amht::default_ridges(n, p);
        if (args.c1n > 0.0) r.c1n = args.c1n;
        if (args.c2n > 0.0) r.c2n = args.c2n;
        r.tau = args.tau;
        cfg.ridges = r;
    }
    return cfg;
}

int cmd_fit(const CommonArgs& args) {
    const amht::Dataset data = load_with_recipe(args);
    const amht::ParametricModel model = amht::make_model(args.model_name, data.p());
    amht::FitOptions opt;
    opt.seed = args.seed;
    const amht::FitResult fit = amht::fit_least_squares(data, model, std::nullopt, opt);
    json j;
    j["model"] = model.name;
    j["theta_hat"] = std::vector<double>(fit.theta_hat.begin(), fit.theta_hat.end());
    j["rss"] = fit.rss;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["gradient_norm"] = fit.gradient_norm;
    emit(j.dump(2), args.out_path);
    return 0;
}

int cmd_test(const CommonArgs& args) {
    const amht::Dataset data = load_with_recipe(args);
    const amht::ParametricModel model = amht::make_model(args.model_name, data.p());
    const amht::TestOutcome out =
        amht::hybrid_test(data, model, make_config(args, data.n(), data.p()));
    emit(amht::to_json(out), args.out_path);
    return 0;
}

int cmd_dimension(const CommonArgs& args) {
    const amht::Dataset data = load_with_recipe(args);
    const amht::ParametricModel model = amht::make_model(args.model_name, data.p());
    amht::FitOptions opt;
    opt.seed = args.seed;
    const amht::FitResult fit = amht::fit_least_squares(data, model, std::nullopt, opt);
    const amht::MatrixXd xs = amht::standardize_columns(data.x);
    const amht::TargetMatrix tm = amht::target_matrix(xs, fit.residuals);
    amht::RidgeConfig ridges = amht::default_ridges(data.n(), data.p());
    const amht::TestConfig cfg = make_config(args, data.n(), data.p());
    if (cfg.ridges) ridges = *cfg.ridges;
    const amht::TdrrChain chain = amht::tdrr_chain(tm.eigenvalues, ridges);
    json j;
    j["q_hat"] = chain.q_hat;
    j["eigenvalues"] = std::vector<double>(tm.eigenvalues.begin(), tm.eigenvalues.end());
    j["s_hat"] = chain.s_hat;
    j["s_star"] = chain.s_star;
    j["ratios"] = chain.ratios;
    j["ridges"] = {{"c1n", ridges.c1n}, {"c2n", ridges.c2n}, {"tau", ridges.tau}};
    emit(j.dump(2), args.out_path);
    return 0;
}

struct SimArgs {
    int study = 1;
    std::string n_grid = "200";
    std::string p_grid = "2";
    std::string a_grid = "0";
    std::string cov = "identity";
    std::string family;
    int reps = 500;
    double level = 0.05;
    std::uint64_t seed = 0;
    int threads = 0;
    bool with_zheng = false;
    double c = 0.12;
    double ch = 1.0;
    std::string out_path;
};

void add_sim(CLI::App* cmd, SimArgs& args) {
    cmd->add_option("--study", args.study, "study id 1-4")->required()
        ->check(CLI::Range(1, 4));
    cmd->add_option("--n", args.n_grid, "sample size grid, comma separated")
        ->capture_default_str();
    cmd->add_option("--p", args.p_grid, "covariate dimension grid, comma separated")
        ->capture_default_str();
    cmd->add_option("--a", args.a_grid, "departure magnitude grid, comma separated")
        ->capture_default_str();
    cmd->add_option("--cov", args.cov, "covariate covariance: identity | ar")
        ->capture_default_str();
    cmd->add_option("--family", args.family, "null family override (default per study)");
    cmd->add_option("--reps", args.reps, "Monte Carlo replications")
        ->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--level", args.level, "significance level")->capture_default_str();
    cmd->add_option("--seed", args.seed, "master seed; replication streams are derived "
                    "as splitmix64(seed, study, n, p, cov, a, rep)")
        ->capture_default_str();
    cmd->add_option("--threads", args.threads,
                    "worker threads (0 = hardware concurrency; result is "
                    "thread-count independent)")->capture_default_str();
    cmd->add_flag("--with-zheng", args.with_zheng,
                  "also evaluate the Zheng-type baseline test");
    cmd->add_option("--c", args.c, "weight constant c")->capture_default_str();
    cmd->add_option("--ch", args.ch, "bandwidth multiplier c_h")->capture_default_str();
    cmd->add_option("--out", args.out_path, "output CSV path (JSON sidecar written "
                    "alongside as <out>.json)");
}

amht::PowerTable run_sim(const SimArgs& args) {
    std::vector<amht::StudySpec> grid;
    for (int n : parse_int_grid(args.n_grid))
        for (int p : parse_int_grid(args.p_grid))
            for (double a : parse_grid(args.a_grid)) {
                amht::StudySpec s;
                s.id = args.study;
                s.n = n;
                s.p = p;
                s.a = a;
                s.covariance = amht::covariance_from_name(args.cov);
                s.null_family = args.family;
                grid.push_back(s);
            }
    amht::RunOptions opt;
    opt.replications = args.reps;
    opt.level = args.level;
    opt.seed = args.seed;
    opt.threads = args.threads;
    opt.with_zheng = args.with_zheng;
    opt.test.weight.c = args.c;
    opt.test.kernel.bandwidth_multiplier = args.ch;
    return amht::run_study(grid, opt);
}

int cmd_simulate(const SimArgs& args) {
    const amht::PowerTable table = run_sim(args);
    emit(amht::to_csv(table), args.out_path);
    if (!args.out_path.empty()) {
        std::ofstream side(args.out_path + ".json");
        side << amht::to_json(table) << "\n";
        std::cerr << "wrote " << args.out_path << " and " << args.out_path << ".json\n";
    } else {
        std::cerr << "tip: --out FILE also writes a JSON sidecar with q-hat histograms\n";
    }
    return 0;
}

int cmd_power_curve(const SimArgs& args) {
    const amht::PowerTable table = run_sim(args);
    std::string out = "a,rejection_rate";
    const bool zheng = args.with_zheng;
    if (zheng) out += ",zheng_rejection_rate";
    out += "\n";
    for (const amht::PowerRow& r : table.rows) {
        out += amht::format_g17(r.a) + "," + amht::format_g17(r.rejection_rate);
        if (zheng) out += "," + amht::format_g17(r.zheng_rejection_rate);
        out += "\n";
    }
    emit(out, args.out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive-to-model hybrid specification test for parametric regressions"};
    app.require_subcommand(1);

    CommonArgs fit_args, test_args, dim_args;
    SimArgs sim_args, curve_args;

    add_common(app.add_subcommand("fit", "nonlinear least-squares fit"), fit_args, true);
    add_common(app.add_subcommand("test", "run the hybrid specification test"),
               test_args, true);
    add_common(app.add_subcommand("dimension",
                                  "indicative dimension of the residual central subspace"),
               dim_args, true);
    add_sim(app.add_subcommand("simulate", "Monte Carlo size/power table"), sim_args);
    add_sim(app.add_subcommand("power-curve", "a vs rejection-rate CSV for plotting"),
            curve_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("fit")) return cmd_fit(fit_args);
        if (app.got_subcommand("test")) return cmd_test(test_args);
        if (app.got_subcommand("dimension")) return cmd_dimension(dim_args);
        if (app.got_subcommand("simulate")) return cmd_simulate(sim_args);
        if (app.got_subcommand("power-curve")) return cmd_power_curve(curve_args);
    } catch (const amht::error& e) {
        std::cout << amht::error_json("pipeline", e.what()) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cout << amht::error_json("internal", e.what()) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
