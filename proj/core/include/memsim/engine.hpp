#pragma once

// Transient analysis. Each step solves the resistive network by modified
// nodal analysis with the memristor states frozen, then advances every state
// by one explicit Euler step of its transconductor ODE, gated by the strobe.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "memsim/circuit.hpp"
#include "memsim/linear_solver.hpp"
#include "memsim/waveform.hpp"

namespace memsim {

struct SimConfig {
    double dt = 1e-9;
    double tstop = 1e-6;
    /// Signal names: v(<node>), i(<device>), vg(<memristor>). Empty records
    /// everything (see all_signals).
    std::vector<std::string> record;
    StrobeSchedule strobe = StrobeHigh{};
};

/// .tran and .strobe of the circuit, recording every signal.
[[nodiscard]] SimConfig config_from_circuit(const Circuit& c);

/// Every recordable signal: node voltages, then per device its current and,
/// for memristors, its state.
[[nodiscard]] std::vector<std::string> all_signals(const Circuit& c);

/// Largest step for which no memristor of `c` moves more than 2% of vdd.
[[nodiscard]] double max_stable_dt(const Circuit& c);

/// Throws InputError when the step size guard or 0 < dt <= tstop fails.
void validate(const SimConfig& cfg, const Circuit& c);

/// MNA system at time t. `states` holds one vg per memristor in device order.
/// Square-law devices are stamped with their secant conductance about
/// `v_ab_prev` (one entry per memristor; empty means 0 everywhere).
///
/// Unknown ordering: nodes 1..n-1 map to rows 0..n-2, then one branch
/// current per voltage source in device order (current into the + terminal).
[[nodiscard]] LinearSystem stamp_system(const Circuit& c, std::span<const double> states, double t,
                                        std::span<const double> v_ab_prev = {});

/// Runs the transient from t = 0 to cfg.tstop. Sample 0 is the operating
/// point at t = 0 with the initial states.
[[nodiscard]] Waveform transient(const Circuit& c, const SimConfig& cfg);

struct SupplySummary {
    double static_bias = 0.0;   ///< sum of transconductor tail currents
    double peak_dynamic = 0.0;  ///< max over time of sum |i(source)|
};

/// Requires every source current to be in the waveform.
[[nodiscard]] SupplySummary supply_current(const Circuit& c, const Waveform& w);

}  // namespace memsim
