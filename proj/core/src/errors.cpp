#include "memsim/error.hpp"

#include <utility>

#include <fmt/format.h>

namespace memsim {

namespace {

std::string describe(const std::string& reason, std::size_t line, std::size_t column) {
    if (column == 0) return fmt::format("{} at line {}", reason, line);
    return fmt::format("{} at line {}, column {}", reason, line, column);
}

}  // namespace

ParseError::ParseError(std::string reason, std::size_t line, std::size_t column)
    : InputError(describe(reason, line, column)),
      reason_(std::move(reason)),
      line_(line),
      column_(column) {}

SingularMatrixError::SingularMatrixError(std::string message, std::size_t pivot_index,
                                         std::vector<std::string> nodes)
    : NumericalError(std::move(message)), pivot_index_(pivot_index), nodes_(std::move(nodes)) {}

}  // namespace memsim
