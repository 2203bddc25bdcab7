#include "memsim/number_format.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include <fmt/format.h>

namespace memsim {

std::string format_roundtrip(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) return fmt::format("{}", x);
    return {buf, end};
}

std::string format_sci9(double x) { return fmt::format("{:.8e}", x); }

std::string format_compact(double x) {
    std::string s = fmt::format("{:.6g}", x);
    auto e = s.find('e');
    if (e == std::string::npos) return s;
    std::string mantissa = s.substr(0, e);
    std::string exponent = s.substr(e + 1);
    const bool negative = !exponent.empty() && exponent.front() == '-';
    if (!exponent.empty() && (exponent.front() == '-' || exponent.front() == '+')) exponent.erase(0, 1);
    exponent.erase(0, exponent.find_first_not_of('0'));
    if (exponent.empty()) exponent = "0";
    return mantissa + "e" + (negative ? "-" : "") + exponent;
}

}  // namespace memsim
