#pragma once

#include <string>

namespace memsim {

/// Shortest text that parses back to the identical double ("inf" for +inf).
[[nodiscard]] std::string format_roundtrip(double x);

/// Scientific notation with 9 significant digits, as used in waveform CSVs.
[[nodiscard]] std::string format_sci9(double x);

/// Six significant digits with a trimmed exponent: 1.28e-5, 0.4, 5e-6.
[[nodiscard]] std::string format_compact(double x);

}  // namespace memsim
