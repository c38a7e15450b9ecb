#pragma once

#include <stdexcept>
#include <string>

namespace mgmor {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid physical or per-unit input (non-positive base, negative resistance, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed network topology or degenerate branch.
class TopologyError : public Error {
public:
    using Error::Error;
};

/// Singular block encountered while eliminating states or buses.
class ReductionError : public Error {
public:
    using Error::Error;
};

/// Model assembly failed (singular mass matrix, bad conditioning, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Eigen-analysis or critical-gain search failed.
class AnalysisError : public Error {
public:
    using Error::Error;
};

/// No sign change of the spectral abscissa inside the requested bracket.
class BracketError : public AnalysisError {
public:
    BracketError(const std::string& what, double abscissa_lo, double abscissa_hi)
        : AnalysisError(what), abscissa_lo_(abscissa_lo), abscissa_hi_(abscissa_hi) {}

    double abscissa_lo() const noexcept { return abscissa_lo_; }
    double abscissa_hi() const noexcept { return abscissa_hi_; }

private:
    double abscissa_lo_;
    double abscissa_hi_;
};

/// Time integration could not proceed.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double time_reached)
        : Error(what), time_reached_(time_reached) {}

    double time_reached() const noexcept { return time_reached_; }

private:
    double time_reached_;
};

/// Scenario or matrix file could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace mgmor
