#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pxcald {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Profile/interval mismatch when pairing p and gamma.
class DomainMismatchError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, std::size_t cell)
        : Error(what), cell_(cell) {}
    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

// Tabulated DN curve queried outside its sampled range.
class RangeError : public Error {
public:
    using Error::Error;
};

class BracketError : public Error {
public:
    using Error::Error;
};

// DN data incompatible with 1 < p < inf (e.g. dLambda/dm <= 1 at the fixed point).
class InconsistentDataError : public Error {
public:
    using Error::Error;
};

class UnsupportedOrderError : public Error {
public:
    using Error::Error;
};

class InsufficientMomentOrderError : public Error {
public:
    using Error::Error;
};

class NonRecoverableCellsError : public Error {
public:
    NonRecoverableCellsError(const std::string& what, std::vector<std::size_t> cells)
        : Error(what), cells_(std::move(cells)) {}
    const std::vector<std::size_t>& cells() const noexcept { return cells_; }

private:
    std::vector<std::size_t> cells_;
};

// Input document failed validation; path is a JSON-pointer style field path.
class ValidationError : public Error {
public:
    ValidationError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace pxcald
