#pragma once

// Memristor fingerprints measured on simulated waveforms: the i-v loop must
// be pinched at the origin, its lobes must shrink as the drive frequency
// rises, and rectangular spikes must move the state in monotone steps.

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memsim/circuit.hpp"
#include "memsim/devices.hpp"
#include "memsim/waveform.hpp"

namespace memsim {

struct LoopMetrics {
    double frequency = 0.0;        ///< Hz
    double area = 0.0;             ///< V*A, summed over lobes
    double pinch_deviation = 0.0;  ///< A, max |i| where v crosses zero
    std::size_t lobes = 0;

    friend bool operator==(const LoopMetrics&, const LoopMetrics&) = default;
};

/// Max |i| linearly interpolated at every zero of v in the record (samples
/// with v exactly 0 count as zeros). Throws InputError "no pinch points"
/// when v never reaches zero.
[[nodiscard]] double pinch_test(std::span<const double> v, std::span<const double> i);

/// Unsigned area of the closed i-v curve traced by one period of samples.
///
/// The samples are treated as a cyclic polygon. It is cut at every zero
/// crossing of v into lobes; each lobe contributes its own unsigned shoelace
/// area, so the oppositely wound lobes of a pinched loop add instead of
/// cancelling.
[[nodiscard]] double loop_area(std::span<const double> v, std::span<const double> i);

/// Number of lobes the cyclic window is cut into (at least 1).
[[nodiscard]] std::size_t lobe_count(std::span<const double> v);

struct SweepOptions {
    std::size_t periods = 2;                  ///< simulated; the last one is analyzed
    std::size_t min_samples_per_period = 200;
    std::string memristor;                    ///< empty: first memristor in the circuit
    bool parallel = true;
};

struct SweepRun {
    LoopMetrics metrics;
    Waveform waveform;  ///< v(a), v(b), i(X), vg(X) of the analyzed device
};

/// Re-runs `tmpl` once per frequency with its single SIN source retuned.
/// The time step is the template's .tran dt, refined so that each period is
/// an integer number of steps with at least min_samples_per_period.
[[nodiscard]] std::vector<SweepRun> frequency_sweep(const Circuit& tmpl, std::span<const double> freqs,
                                                    const SweepOptions& opts = {});

[[nodiscard]] std::vector<LoopMetrics> frequency_collapse(const Circuit& tmpl, std::span<const double> freqs,
                                                          const SweepOptions& opts = {});

/// CSV `freq,area,pinch_dev,lobes`.
void write_metrics_csv(std::ostream& out, std::span<const LoopMetrics> metrics);

struct PulseEvent {
    double t = 0.0;    ///< pulse start
    int polarity = 1;  ///< +1 or -1
};

struct StaircaseVerdict {
    bool monotone_ok = true;
    std::vector<double> step_sizes;  ///< V, one per pulse
};

/// For each pulse, the state change from the last sample before it starts
/// to the last sample before the next pulse (or the end of the record).
[[nodiscard]] StaircaseVerdict pulse_staircase(const Waveform& w, std::string_view vg_signal,
                                               std::span<const PulseEvent> schedule);

/// A PWL waveform sitting at `baseline` with a rectangular excursion of
/// polarity * amplitude for `width` seconds at each event. Edges take `edge`
/// seconds and end exactly on the event times, so a grid with step > edge
/// sees clean rectangles.
[[nodiscard]] PwlSource pulse_train(std::span<const PulseEvent> schedule, double baseline, double amplitude,
                                    double width, double edge);

struct HalfSineSpec {
    double offset = 0.6;            ///< V, level between half-waves
    double amplitude = 0.2;         ///< V, peak of an unmodulated half-wave
    double carrier_freq = 1e9;      ///< Hz of the sine the half-waves come from
    double envelope_freq = 1e8;     ///< Hz of the raised-cosine envelope
    double depth = 1.0;             ///< 0 no modulation, 1 full
    std::size_t cycles = 10;        ///< carrier periods generated
    std::size_t points_per_cycle = 64;
    int polarity = 1;               ///< +1 positive half-waves, -1 negative
};

/// Half-wave rectified carrier under the envelope
/// 1 - depth * (1 + cos(2 pi f_env t)) / 2, sampled into a PWL source.
[[nodiscard]] PwlSource modulated_half_sine(const HalfSineSpec& spec);

}  // namespace memsim
