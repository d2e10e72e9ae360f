#include "amht/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace amht {

using nlohmann::json;

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delim)) {
        // trim surrounding whitespace and CR
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == delim) cells.push_back("");
    return cells;
}

double parse_cell(const std::string& cell, int row, const std::string& col) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v))
        throw data_error("csv: cell at row " + std::to_string(row) + ", column '" + col +
                         "' is not a finite number: '" + cell + "'");
    return v;
}

} // namespace

CsvData load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw data_error("csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw data_error("csv: '" + path + "' is empty");
    const std::vector<std::string> header = split_line(line, schema.delimiter);

    int ycol = -1;
    std::vector<int> xcols;
    std::vector<std::string> xnames;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        if (header[i] == schema.response) {
            ycol = i;
        } else {
            xcols.push_back(i);
            xnames.push_back(header[i]);
        }
    }
    if (ycol < 0)
        throw data_error("csv: response column '" + schema.response + "' not found");
    if (xcols.empty()) throw data_error("csv: no covariate columns");

    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line, schema.delimiter);
        if (cells.size() != header.size())
            throw data_error("csv: row " + std::to_string(lineno) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        std::vector<double> vals(header.size());
        for (size_t i = 0; i < cells.size(); ++i)
            vals[i] = parse_cell(cells[i], lineno, header[i]);
        rows.push_back(std::move(vals));
    }
    if (rows.size() < 2) throw data_error("csv: need at least 2 data rows");

    CsvData out;
    out.covariate_names = xnames;
    const int n = static_cast<int>(rows.size());
    const int p = static_cast<int>(xcols.size());
    out.data.x.resize(n, p);
    out.data.y.resize(n);
    for (int r = 0; r < n; ++r) {
        out.data.y[r] = rows[r][ycol];
        for (int c = 0; c < p; ++c) out.data.x(r, c) = rows[r][xcols[c]];
    }
    out.data.validate();
    return out;
}

Term parse_term(const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw data_error("recipe: malformed term '" + text + "'");
    const std::string name = text.substr(0, open);
    const std::string args = text.substr(open + 1, close - open - 1);

    Term t;
    if (name == "identity") t.kind = TermKind::identity;
    else if (name == "square") t.kind = TermKind::square;
    else if (name == "cube") t.kind = TermKind::cube;
    else if (name == "product") t.kind = TermKind::product;
    else if (name == "sin") t.kind = TermKind::sine;
    else if (name == "cos") t.kind = TermKind::cosine;
    else if (name == "abs") t.kind = TermKind::absval;
    else if (name == "tanh") t.kind = TermKind::tanh_;
    else throw data_error("recipe: unknown term '" + name + "'");

    const auto comma = args.find(',');
    try {
        if (t.kind == TermKind::product) {
            if (comma == std::string::npos)
                throw data_error("recipe: product needs two indices");
            t.i = std::stoi(args.substr(0, comma));
            t.j = std::stoi(args.substr(comma + 1));
        } else {
            if (comma != std::string::npos)
                throw data_error("recipe: term '" + name + "' takes one index");
            t.i = std::stoi(args);
        }
    } catch (const std::invalid_argument&) {
        throw data_error("recipe: bad index in '" + text + "'");
    }
    return t;
}

Dataset feature_expand(const Dataset& data, const std::vector<Term>& recipe) {
    const int n = data.n();
    const int p = data.p();
    auto check = [p](int idx) {
        if (idx < 1 || idx > p)
            throw data_error("recipe: index " + std::to_string(idx) +
                             " out of range (p = " + std::to_string(p) + ")");
    };
    Dataset out;
    out.y = data.y;
    out.x.resize(n, p + static_cast<int>(recipe.size()));
    out.x.leftCols(p) = data.x;
    int col = p;
    for (const Term& t : recipe) {
        check(t.i);
        const auto xi = data.x.col(t.i - 1).array();
        switch (t.kind) {
            case TermKind::identity: out.x.col(col) = xi; break;
            case TermKind::square: out.x.col(col) = xi.square(); break;
            case TermKind::cube: out.x.col(col) = xi.cube(); break;
            case TermKind::product:
                check(t.j);
                out.x.col(col) = xi * data.x.col(t.j - 1).array();
                break;
            case TermKind::sine: out.x.col(col) = xi.sin(); break;
            case TermKind::cosine: out.x.col(col) = xi.cos(); break;
            case TermKind::absval: out.x.col(col) = xi.abs(); break;
            case TermKind::tanh_: out.x.col(col) = xi.tanh(); break;
        }
        ++col;
    }
    return out;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

json outcome_to_json_obj(const TestOutcome& o) {
    json j;
    j["q_hat"] = o.q_hat;
    j["branch"] = o.branch == Branch::moment ? "moment" : "kernel";
    j["v0"] = o.v0;
    j["v1"] = o.v1;
    j["sigma0_sq"] = o.sigma0_sq;
    j["t_n"] = o.t_n;
    j["p_value"] = o.p_value;
    j["h"] = o.h;
    j["theta_hat"] = std::vector<double>(o.theta_hat.begin(), o.theta_hat.end());
    j["eigenvalues"] = std::vector<double>(o.eigenvalues.begin(), o.eigenvalues.end());
    j["config"] = {{"model", o.model_name},
                   {"c", o.weight_c},
                   {"ch", o.bandwidth_multiplier},
                   {"c1n", o.ridges.c1n},
                   {"c2n", o.ridges.c2n},
                   {"tau", o.ridges.tau},
                   {"seed", o.seed}};
    j["fit_converged"] = o.fit_converged;
    return j;
}

} // namespace

std::string to_json(const TestOutcome& outcome, int indent) {
    return outcome_to_json_obj(outcome).dump(indent);
}

TestOutcome test_outcome_from_json(const std::string& text) {
    const json j = json::parse(text);
    TestOutcome o;
    o.q_hat = j.at("q_hat").get<int>();
    o.branch = j.at("branch").get<std::string>() == "moment" ? Branch::moment : Branch::kernel;
    o.v0 = j.at("v0").get<double>();
    o.v1 = j.at("v1").get<double>();
    o.sigma0_sq = j.at("sigma0_sq").get<double>();
    o.t_n = j.at("t_n").get<double>();
    o.p_value = j.at("p_value").get<double>();
    o.h = j.at("h").get<double>();
    const auto th = j.at("theta_hat").get<std::vector<double>>();
    o.theta_hat = Eigen::Map<const VectorXd>(th.data(), th.size());
    const auto ev = j.at("eigenvalues").get<std::vector<double>>();
    o.eigenvalues = Eigen::Map<const VectorXd>(ev.data(), ev.size());
    const auto& cfg = j.at("config");
    o.model_name = cfg.at("model").get<std::string>();
    o.weight_c = cfg.at("c").get<double>();
    o.bandwidth_multiplier = cfg.at("ch").get<double>();
    o.ridges.c1n = cfg.at("c1n").get<double>();
    o.ridges.c2n = cfg.at("c2n").get<double>();
    o.ridges.tau = cfg.at("tau").get<double>();
    o.seed = cfg.at("seed").get<std::uint64_t>();
    o.fit_converged = j.at("fit_converged").get<bool>();
    return o;
}

std::string to_json(const PowerTable& table, int indent) {
    json rows = json::array();
    for (const PowerRow& r : table.rows) {
        json row;
        row["study"] = r.study;
        row["n"] = r.n;
        row["p"] = r.p;
        row["a"] = r.a;
        row["covariance"] = covariance_name(r.covariance);
        row["rejection_rate"] = r.rejection_rate;
        row["q_hat_histogram"] = r.q_hat_histogram;
        row["replications"] = r.replications;
        row["failures"] = r.failures;
        row["seed"] = r.seed;
        if (r.zheng_rejection_rate >= 0.0)
            row["zheng_rejection_rate"] = r.zheng_rejection_rate;
        rows.push_back(std::move(row));
    }
    json j;
    j["level"] = table.level;
    j["seed"] = table.seed;
    j["replications"] = table.replications;
    j["rows"] = std::move(rows);
    return j.dump(indent);
}

std::string to_csv(const PowerTable& table) {
    std::string out = "study,n,p,a,covariance,rejection_rate,replications,failures,seed";
    const bool zheng = !table.rows.empty() && table.rows.front().zheng_rejection_rate >= 0.0;
    if (zheng) out += ",zheng_rejection_rate";
    out += "\n";
    for (const PowerRow& r : table.rows) {
        out += std::to_string(r.study) + "," + std::to_string(r.n) + "," +
               std::to_string(r.p) + "," + format_g17(r.a) + "," +
               covariance_name(r.covariance) + "," + format_g17(r.rejection_rate) + "," +
               std::to_string(r.replications) + "," + std::to_string(r.failures) + "," +
               std::to_string(r.seed);
        if (zheng) out += "," + format_g17(r.zheng_rejection_rate);
        out += "\n";
    }
    return out;
}

std::string error_json(const std::string& kind, const std::string& message) {
    json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    return j.dump(2);
}

} // namespace amht
