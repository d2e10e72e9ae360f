#ifndef AMHT_IO_HPP
#define AMHT_IO_HPP

#include <string>
#include <vector>

#include "amht/model.hpp"
#include "amht/hybrid_test.hpp"
#include "amht/simulation.hpp"

namespace amht {

struct CsvSchema {
    std::string response = "y";
    char delimiter = ',';
};

struct CsvData {
    Dataset data;
    std::vector<std::string> covariate_names;  // in file order
};

// Reads a headered CSV: the response column (by name) becomes y, every other
// column a covariate in file order. Errors name the offending cell.
CsvData load_csv(const std::string& path, const CsvSchema& schema = {});

// Derived-column recipe terms. Indices are 1-based covariate positions as in
// "square(5)"; product takes two.
enum class TermKind { identity, square, cube, product, sine, cosine, absval, tanh_ };

struct Term {
    TermKind kind = TermKind::identity;
    int i = 1;
    int j = 1;  // product only
};

Term parse_term(const std::string& text);

// Appends one derived column per term; original columns stay in place.
Dataset feature_expand(const Dataset& data, const std::vector<Term>& recipe);

// JSON (nlohmann) serialization. Doubles round-trip exactly.
std::string to_json(const TestOutcome& outcome, int indent = 2);
TestOutcome test_outcome_from_json(const std::string& text);

std::string to_json(const PowerTable& table, int indent = 2);

// PowerTable as CSV (17 significant digits on floating-point fields).
std::string to_csv(const PowerTable& table);

std::string error_json(const std::string& kind, const std::string& message);

// %.17g formatting used by the CSV writers.
std::string format_g17(double v);

} // namespace amht

#endif
