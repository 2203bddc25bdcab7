#include "memsim/waveform.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "memsim/error.hpp"
#include "memsim/number_format.hpp"

namespace memsim {

Waveform::Waveform(double dt, std::vector<std::string> names, std::size_t reserve_samples)
    : dt_(dt), names_(std::move(names)), series_(names_.size()) {
    for (auto& s : series_) s.reserve(reserve_samples);
}

std::optional<std::size_t> Waveform::index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

std::span<const double> Waveform::series(std::string_view name) const {
    auto idx = index_of(name);
    if (!idx) throw InputError(fmt::format("signal {} was not recorded", name));
    return series_[*idx];
}

void Waveform::append(std::span<const double> row) {
    if (row.size() != series_.size()) throw InputError("waveform row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) series_[i].push_back(row[i]);
    ++samples_;
}

void Waveform::write_csv(std::ostream& out) const {
    out << 't';
    for (const auto& n : names_) out << ',' << n;
    out << '\n';
    std::string line;
    for (std::size_t k = 0; k < samples_; ++k) {
        line = format_sci9(time(k));
        for (const auto& s : series_) {
            line += ',';
            line += format_sci9(s[k]);
        }
        line += '\n';
        out << line;
    }
}

void Waveform::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
    write_csv(out);
}

}  // namespace memsim
