#include "memsim/devices.hpp"

#include <algorithm>
#include <numbers>

#include <fmt/format.h>

#include "memsim/error.hpp"

namespace memsim {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw InputError(what);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void validate(const MemristorParams& p) {
    require(finite(p.kp) && p.kp > 0, "memristor kp must be positive");
    require(finite(p.w_over_l) && p.w_over_l > 0, "memristor wl must be positive");
    require(finite(p.cm) && p.cm > 0, "memristor cm must be positive");
    require(finite(p.ibias) && p.ibias > 0, "memristor ibias must be positive");
    require(finite(p.gm0) && p.gm0 > 0, "memristor gm0 must be positive");
    require(finite(p.vdd) && p.vdd > 0, "memristor vdd must be positive");
    require(finite(p.g_leak) && p.g_leak >= 0, "memristor gleak must be non-negative");
    require(!std::isnan(p.tau_leak) && p.tau_leak > 0, "memristor tauleak must be positive or inf");
    require(finite(p.vthn) && p.vthn >= 0, "memristor vthn must be non-negative");
    require(finite(p.vcm) && p.vcm >= 0 && p.vcm <= p.vdd, "memristor vcm must lie in [0, vdd]");
    require(p.level == DeviceLevel::linear || p.level == DeviceLevel::square_law,
            "memristor level must be 0 or 1");
}

void validate(const SwitchParams& p) {
    require(finite(p.r_on) && p.r_on > 0, "switch ron must be positive");
    require(finite(p.g_off) && p.g_off >= 0, "switch goff must be non-negative");
    require(p.g_off < 1.0 / p.r_on, "switch goff must be below 1/ron");
}

double switch_conductance(const SwitchParams& p) noexcept {
    return p.position == SwitchPosition::on ? 1.0 / p.r_on : p.g_off;
}

void validate(const SourceSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DcSource>) {
                require(finite(s.value), "dc value must be finite");
            } else if constexpr (std::is_same_v<T, SineSource>) {
                require(finite(s.offset) && finite(s.amplitude) && finite(s.phase),
                        "sin parameters must be finite");
                require(finite(s.freq) && s.freq > 0, "sin frequency must be positive");
            } else if constexpr (std::is_same_v<T, PulseSource>) {
                require(finite(s.v0) && finite(s.v1) && finite(s.delay),
                        "pulse parameters must be finite");
                require(finite(s.rise) && s.rise >= 0, "pulse rise must be non-negative");
                require(finite(s.fall) && s.fall >= 0, "pulse fall must be non-negative");
                require(finite(s.width) && s.width >= 0, "pulse width must be non-negative");
                require(finite(s.period) && s.period > 0, "pulse period must be positive");
            } else {
                require(!s.points.empty(), "pwl needs at least one point");
                for (std::size_t i = 0; i < s.points.size(); ++i) {
                    require(finite(s.points[i].t) && finite(s.points[i].v), "pwl values must be finite");
                    if (i > 0) {
                        require(s.points[i].t > s.points[i - 1].t,
                                "pwl times must be strictly increasing");
                    }
                }
            }
        },
        spec);
}

namespace {

double pulse_value(const PulseSource& s, double t) {
    // Grid times rarely land exactly on an edge after fmod; edges within tol
    // count as reached.
    const double tol = 1e-12 * std::max(s.period, std::fabs(t));
    if (t < s.delay - tol) return s.v0;
    double local = std::fmod(std::max(t - s.delay, 0.0), s.period);
    if (s.period - local <= tol) local = 0.0;

    const double top = s.rise + s.width;
    const double end = top + s.fall;
    if (local < s.rise - tol) return s.v0 + (s.v1 - s.v0) * local / s.rise;
    if (local < top - tol) return s.v1;
    if (local < end - tol) {
        const double x = std::clamp((local - top) / s.fall, 0.0, 1.0);
        return s.v1 + (s.v0 - s.v1) * x;
    }
    return s.v0;
}

double pwl_value(const PwlSource& s, double t) {
    const auto& pts = s.points;
    if (t <= pts.front().t) return pts.front().v;
    if (t >= pts.back().t) return pts.back().v;
    auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                               [](double x, const PwlPoint& p) { return x < p.t; });
    auto lo = hi - 1;
    const double x = (t - lo->t) / (hi->t - lo->t);
    return lo->v + (hi->v - lo->v) * x;
}

}  // namespace

double source_value(const SourceSpec& spec, double t) {
    return std::visit(
        [t](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DcSource>) {
                return s.value;
            } else if constexpr (std::is_same_v<T, SineSource>) {
                return s.offset + s.amplitude * std::sin(2.0 * std::numbers::pi * s.freq * t + s.phase);
            } else if constexpr (std::is_same_v<T, PulseSource>) {
                return pulse_value(s, t);
            } else {
                return pwl_value(s, t);
            }
        },
        spec);
}

double gate_overdrive(const MemristorState& state, const MemristorParams& p) noexcept {
    return std::max(0.0, state.vg - p.vcm - p.vthn);
}

double memristor_conductance(const MemristorState& state, const MemristorParams& p) noexcept {
    return std::max(p.g_leak, p.kp * p.w_over_l * (state.vg - p.vcm - p.vthn));
}

double memristor_current(double v_ab, const MemristorState& state,
                         const MemristorParams& p) noexcept {
    if (p.level == DeviceLevel::linear) return memristor_conductance(state, p) * v_ab;

    const double overdrive = gate_overdrive(state, p);
    const double a = std::fabs(v_ab);
    const double k = p.kp * p.w_over_l;
    // Beyond v_ab = overdrive the channel pinches off; hold the square-law peak.
    const double triode = a <= overdrive ? k * (overdrive * a - 0.5 * a * a)
                                         : 0.5 * k * overdrive * overdrive;
    const double magnitude = std::max(triode, p.g_leak * a);
    return std::copysign(magnitude, v_ab);
}

double gm_output_current(double v_ab, const MemristorParams& p) noexcept {
    return std::clamp(p.gm0 * v_ab, -p.ibias, p.ibias);
}

double state_derivative(double v_ab, bool strobe, const MemristorState& state,
                        const MemristorParams& p) noexcept {
    if (!strobe) {
        if (std::isinf(p.tau_leak)) return 0.0;
        return -state.vg / p.tau_leak;
    }
    const double rate = gm_output_current(v_ab, p) / p.cm;
    if (rate > 0 && state.vg >= p.vdd) return 0.0;
    if (rate < 0 && state.vg <= 0.0) return 0.0;
    return rate;
}

MemristorState apply_pulse(const MemristorState& state, double v_spk, double dt_pulse,
                           const MemristorParams& p) {
    if (!(dt_pulse >= 0)) {
        throw InputError(fmt::format("pulse width must be non-negative, got {}", dt_pulse));
    }
    MemristorState next{state.vg + gm_output_current(v_spk, p) * dt_pulse / p.cm};
    return clamp_state(next, p);
}

}  // namespace memsim
