#pragma once

#include <stdexcept>
#include <string>

namespace rhognf {

// Bad argument to a numerical routine (length mismatch, out-of-range value,
// non-finite input, constant sequence).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// |rho| >= 1 where a density is required.
class DegenerateCopula : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InversionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergedFit : public std::runtime_error {
public:
    DivergedFit(int epoch, const std::string& what)
        : std::runtime_error(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

// Malformed dataset or parameter file. line() is 1-based, 0 when unknown.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A grid point of a rho sweep failed; rho() names the offending value.
class SweepError : public std::runtime_error {
public:
    SweepError(double rho, const std::string& what)
        : std::runtime_error("sweep failed at rho = " + std::to_string(rho) + ": " + what), rho_(rho) {}
    double rho() const noexcept { return rho_; }

private:
    double rho_;
};

}  // namespace rhognf
