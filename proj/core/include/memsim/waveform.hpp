#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memsim {

/// Uniformly sampled signals on the grid t_k = k * dt.
class Waveform {
public:
    Waveform() = default;
    Waveform(double dt, std::vector<std::string> names, std::size_t reserve_samples = 0);

    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] std::size_t samples() const noexcept { return samples_; }
    [[nodiscard]] double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }
    /// End time of the record.
    [[nodiscard]] double duration() const noexcept {
        return samples_ == 0 ? 0.0 : time(samples_ - 1);
    }

    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;
    [[nodiscard]] bool has(std::string_view name) const { return index_of(name).has_value(); }

    /// Throws InputError for an unrecorded signal.
    [[nodiscard]] std::span<const double> series(std::string_view name) const;
    [[nodiscard]] std::span<const double> series(std::size_t index) const { return series_.at(index); }

    /// Appends one sample; `row` holds one value per signal in names() order.
    void append(std::span<const double> row);

    /// Header `t,<signal>,...` then one row per sample, 9 significant digits.
    void write_csv(std::ostream& out) const;
    void write_csv(const std::filesystem::path& path) const;

private:
    double dt_ = 0.0;
    std::size_t samples_ = 0;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> series_;
};

}  // namespace memsim
