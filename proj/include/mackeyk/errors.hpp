#ifndef MACKEYK_ERRORS_HPP
#define MACKEYK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mackeyk {

// Failure classes map 1:1 onto CLI exit codes (see tools/).
enum class ErrorKind {
    config = 1,             // invalid parameters, bad input files
    route_disagreement = 2, // the two independent construction routes differ
    certificate = 3,        // a machine-checked certificate failed
    budget = 4,             // enumeration/pair budget exceeded
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorKind::config, m) {}
};

struct RouteDisagreement : Error {
    explicit RouteDisagreement(const std::string& m)
        : Error(ErrorKind::route_disagreement, m) {}
};

struct CertificateError : Error {
    explicit CertificateError(const std::string& m)
        : Error(ErrorKind::certificate, m) {}
};

struct BudgetExceeded : Error {
    explicit BudgetExceeded(const std::string& m)
        : Error(ErrorKind::budget, m) {}
};

} // namespace mackeyk

#endif
