#ifndef AMHT_ERRORS_HPP
#define AMHT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace amht {

// Base class for everything this library throws on purpose.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Bad or inconsistent input data (CSV cells, dimension mismatches, ...).
class data_error : public error {
public:
    explicit data_error(const std::string& what) : error(what) {}
};

// Least-squares fitting failed (divergence, ill-posed problem).
class fit_error : public error {
public:
    explicit fit_error(const std::string& what) : error(what) {}
};

// A caller violated a documented precondition.
class contract_error : public error {
public:
    explicit contract_error(const std::string& what) : error(what) {}
};

// A variance estimate is too close to zero to standardize with.
class degenerate_variance_error : public error {
public:
    explicit degenerate_variance_error(const std::string& what) : error(what) {}
};

} // namespace amht

#endif
