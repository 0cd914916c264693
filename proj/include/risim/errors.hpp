// errors.hpp — exception types shared by all risim modules

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace risim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments: non-finite entries, wrong dimensions, non-Hermitian Hamiltonians, ...
class InputError : public Error {
public:
    using Error::Error;
};

// An eigenvalue sits on (or within 1e-8 rad of) the requested logarithm branch cut.
class BranchCutError : public Error {
public:
    BranchCutError(const std::string& what, double suggested_cut)
        : Error(what), suggested_cut_(suggested_cut) {}

    double suggested_cut() const noexcept { return suggested_cut_; }

private:
    double suggested_cut_;
};

// Jordan block where a semisimple eigenvalue was required.
class DefectError : public Error {
public:
    using Error::Error;
};

// The dynamics has no unique asymptotic state (eigenvalue 1 not simple, or other peripheral spectrum).
class NoAsymptoticStateError : public Error {
public:
    using Error::Error;
};

// A request would exceed a work limit (Dyson order, number of iterations, extreme couplings).
class CostGuardError : public Error {
public:
    using Error::Error;
};

// Configuration schema violation; path is a JSONPath-like location such as "$.model.spin.S".
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace risim
