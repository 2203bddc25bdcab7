#pragma once

// Behavioral device laws for the CMOS memristor emulator and the passive
// elements it is wired with. Everything here is a pure function of its
// arguments.

#include <cmath>
#include <limits>
#include <variant>
#include <vector>

namespace memsim {

/// Selects the M1 channel law.
enum class DeviceLevel : int {
    linear = 0,      ///< I = G(vg) * v_ab
    square_law = 1,  ///< triode with the -v_ab^2/2 channel-end term
};

/// Constants of one memristor emulator instance (130 nm, 1.2 V defaults).
struct MemristorParams {
    double kp = 300e-6;                ///< A/V^2
    double w_over_l = 3.0 / 0.42;      ///< M1 sizing 3um / 0.42um
    double vthn = 0.0;                 ///< ZVT device
    double vcm = 0.6;                  ///< source of M1 held here
    double vdd = 1.2;
    double cm = 100e-15;               ///< state capacitor
    double ibias = 100e-9;             ///< transconductor tail current
    double gm0 = 2e-6;                 ///< small-signal transconductance
    double g_leak = 10e-9;             ///< conductance floor
    double tau_leak = 1.0;             ///< hold-mode decay; may be +inf
    DeviceLevel level = DeviceLevel::linear;

    friend bool operator==(const MemristorParams&, const MemristorParams&) = default;
};

/// Throws InputError naming the first violated constraint.
void validate(const MemristorParams& p);

/// The hidden state: voltage on Cm driving the gate of M1.
struct MemristorState {
    double vg = 0.0;

    friend bool operator==(const MemristorState&, const MemristorState&) = default;
};

enum class SwitchPosition { off, on };

struct SwitchParams {
    double r_on = 5e3;
    double g_off = 1e-12;
    SwitchPosition position = SwitchPosition::off;

    friend bool operator==(const SwitchParams&, const SwitchParams&) = default;
};

void validate(const SwitchParams& p);

/// Conductance the switch presents in its current position.
[[nodiscard]] double switch_conductance(const SwitchParams& p) noexcept;

// --- independent voltage sources -------------------------------------------

struct DcSource {
    double value = 0.0;
    friend bool operator==(const DcSource&, const DcSource&) = default;
};

struct SineSource {
    double offset = 0.0;
    double amplitude = 0.0;
    double freq = 1.0;   ///< Hz
    double phase = 0.0;  ///< rad
    friend bool operator==(const SineSource&, const SineSource&) = default;
};

struct PulseSource {
    double v0 = 0.0;
    double v1 = 0.0;
    double delay = 0.0;
    double rise = 0.0;
    double fall = 0.0;
    double width = 0.0;
    double period = 1.0;
    friend bool operator==(const PulseSource&, const PulseSource&) = default;
};

struct PwlPoint {
    double t = 0.0;
    double v = 0.0;
    friend bool operator==(const PwlPoint&, const PwlPoint&) = default;
};

struct PwlSource {
    std::vector<PwlPoint> points;
    friend bool operator==(const PwlSource&, const PwlSource&) = default;
};

using SourceSpec = std::variant<DcSource, SineSource, PulseSource, PwlSource>;

void validate(const SourceSpec& spec);

/// Source voltage at time t (t >= 0).
[[nodiscard]] double source_value(const SourceSpec& spec, double t);

// --- memristor laws ----------------------------------------------------------

/// max(0, vg - vcm - vthn)
[[nodiscard]] double gate_overdrive(const MemristorState& state, const MemristorParams& p) noexcept;

/// G = max(g_leak, kp * W/L * (vg - vcm - vthn)).
[[nodiscard]] double memristor_conductance(const MemristorState& state,
                                           const MemristorParams& p) noexcept;

/// Terminal current for the selected device level. Odd in v_ab and zero
/// exactly at v_ab = 0 for both levels.
[[nodiscard]] double memristor_current(double v_ab, const MemristorState& state,
                                       const MemristorParams& p) noexcept;

/// Transconductor output: gm0 * v_ab clamped to +/- ibias.
[[nodiscard]] double gm_output_current(double v_ab, const MemristorParams& p) noexcept;

/// dvg/dt. With the strobe high the transconductor charges Cm; the outward
/// rate is zeroed at either rail. With the strobe low Cm is isolated and only
/// leaks toward ground with time constant tau_leak.
[[nodiscard]] double state_derivative(double v_ab, bool strobe, const MemristorState& state,
                                      const MemristorParams& p) noexcept;

/// Closed-form response to one rectangular spike of height v_spk and width
/// dt_pulse: dvg = Gm(v_spk) * v_spk * dt / Cm, clamped to the rails.
[[nodiscard]] MemristorState apply_pulse(const MemristorState& state, double v_spk,
                                         double dt_pulse, const MemristorParams& p);

[[nodiscard]] inline MemristorState clamp_state(MemristorState s, const MemristorParams& p) noexcept {
    s.vg = std::fmin(std::fmax(s.vg, 0.0), p.vdd);
    return s;
}

}  // namespace memsim
