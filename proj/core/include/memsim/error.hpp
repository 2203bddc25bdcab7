#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace memsim {

// Base of everything the library throws. Input problems and numerical
// failures are kept apart so front ends can map them to distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed text, invalid parameters, unreadable files.
class InputError : public Error {
public:
    using Error::Error;
};

/// Netlist or maze text that does not follow the grammar.
class ParseError : public InputError {
public:
    ParseError(std::string reason, std::size_t line, std::size_t column = 0);

    [[nodiscard]] const std::string& reason() const noexcept { return reason_; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::string reason_;
    std::size_t line_;
    std::size_t column_;
};

/// A simulation that could not be carried through.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public NumericalError {
public:
    SingularMatrixError(std::string message, std::size_t pivot_index,
                        std::vector<std::string> nodes = {});

    [[nodiscard]] std::size_t pivot_index() const noexcept { return pivot_index_; }
    /// Names of the unknowns implicated in the failure, when known.
    [[nodiscard]] const std::vector<std::string>& nodes() const noexcept { return nodes_; }

private:
    std::size_t pivot_index_;
    std::vector<std::string> nodes_;
};

}  // namespace memsim
