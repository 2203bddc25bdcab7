#include "memsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "memsim/error.hpp"

namespace memsim {

namespace {

constexpr double step_guard_fraction = 0.02;

struct MemristorSlot {
    std::size_t device = 0;
    NodeId a = ground_node;
    NodeId b = ground_node;
    const MemristorParams* params = nullptr;
};

struct SourceSlot {
    std::size_t device = 0;
    NodeId pos = ground_node;
    NodeId neg = ground_node;
    const SourceSpec* spec = nullptr;
};

struct FixedSlot {
    std::size_t device = 0;
    NodeId a = ground_node;
    NodeId b = ground_node;
    double g = 0.0;
};

// Index maps from a Circuit to its MNA unknowns.
struct Layout {
    explicit Layout(const Circuit& c) : circuit(c) {
        n_nodes = c.nodes().size() - 1;
        const auto& devices = c.devices();
        device_slot.assign(devices.size(), 0);
        for (std::size_t i = 0; i < devices.size(); ++i) {
            std::visit(
                [&](const auto& e) {
                    using T = std::decay_t<decltype(e)>;
                    if constexpr (std::is_same_v<T, MemristorElement>) {
                        const auto* p = c.find_model(e.model);
                        if (p == nullptr) throw InputError(fmt::format("unresolved model {}", e.model));
                        device_slot[i] = memristors.size();
                        memristors.push_back({i, e.a, e.b, p});
                    } else if constexpr (std::is_same_v<T, VoltageSourceElement>) {
                        device_slot[i] = sources.size();
                        sources.push_back({i, e.pos, e.neg, &e.spec});
                    } else if constexpr (std::is_same_v<T, SwitchElement>) {
                        device_slot[i] = fixed.size();
                        fixed.push_back({i, e.a, e.b, switch_conductance(e.params)});
                    } else {
                        device_slot[i] = fixed.size();
                        fixed.push_back({i, e.a, e.b, 1.0 / e.ohms});
                    }
                },
                devices[i].element);
        }
        dim = n_nodes + sources.size();
    }

    [[nodiscard]] std::string unknown_name(std::size_t k) const {
        if (k < n_nodes) return circuit.node_name(k + 1);
        return fmt::format("i({})", circuit.devices()[sources[k - n_nodes].device].id);
    }

    const Circuit& circuit;
    std::size_t n_nodes = 0;
    std::size_t dim = 0;
    std::vector<MemristorSlot> memristors;
    std::vector<SourceSlot> sources;
    std::vector<FixedSlot> fixed;
    std::vector<std::size_t> device_slot;
};

void stamp_conductance(DenseMatrix& m, NodeId a, NodeId b, double g) {
    if (a != ground_node) m(a - 1, a - 1) += g;
    if (b != ground_node) m(b - 1, b - 1) += g;
    if (a != ground_node && b != ground_node) {
        m(a - 1, b - 1) -= g;
        m(b - 1, a - 1) -= g;
    }
}

double stamped_conductance(const MemristorParams& p, double vg, double v_ab_prev) {
    const MemristorState s{vg};
    if (p.level == DeviceLevel::linear || v_ab_prev == 0.0) return memristor_conductance(s, p);
    return memristor_current(v_ab_prev, s, p) / v_ab_prev;
}

// Everything that does not depend on time or state.
LinearSystem base_system(const Layout& layout) {
    LinearSystem sys(layout.dim);
    for (const auto& f : layout.fixed) stamp_conductance(sys.matrix, f.a, f.b, f.g);
    for (std::size_t j = 0; j < layout.sources.size(); ++j) {
        const auto& s = layout.sources[j];
        const std::size_t r = layout.n_nodes + j;
        if (s.pos != ground_node) {
            sys.matrix(s.pos - 1, r) += 1.0;
            sys.matrix(r, s.pos - 1) += 1.0;
        }
        if (s.neg != ground_node) {
            sys.matrix(s.neg - 1, r) -= 1.0;
            sys.matrix(r, s.neg - 1) -= 1.0;
        }
    }
    return sys;
}

void stamp_dynamic(const Layout& layout, LinearSystem& sys, std::span<const double> states,
                   std::span<const double> v_prev, std::span<double> g_out, double t) {
    for (std::size_t m = 0; m < layout.memristors.size(); ++m) {
        const auto& slot = layout.memristors[m];
        const double g = stamped_conductance(*slot.params, states[m], v_prev.empty() ? 0.0 : v_prev[m]);
        if (!g_out.empty()) g_out[m] = g;
        stamp_conductance(sys.matrix, slot.a, slot.b, g);
    }
    for (std::size_t j = 0; j < layout.sources.size(); ++j) {
        sys.rhs[layout.n_nodes + j] = source_value(*layout.sources[j].spec, t);
    }
}

double node_voltage(std::span<const double> x, NodeId n) { return n == ground_node ? 0.0 : x[n - 1]; }

// Node sets with no conductive path to ground, for singular-system reports.
std::vector<std::string> floating_nodes(const Layout& layout, std::span<const double> g_mem) {
    const std::size_t count = layout.circuit.nodes().size();
    std::vector<std::size_t> parent(count);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };
    for (const auto& f : layout.fixed) {
        if (f.g > 0) unite(f.a, f.b);
    }
    for (std::size_t m = 0; m < layout.memristors.size(); ++m) {
        if (g_mem.empty() || g_mem[m] > 0) unite(layout.memristors[m].a, layout.memristors[m].b);
    }
    for (const auto& s : layout.sources) unite(s.pos, s.neg);

    std::vector<std::string> out;
    const std::size_t ground_root = find(ground_node);
    for (std::size_t n = 1; n < count; ++n) {
        if (find(n) != ground_root) out.push_back(layout.circuit.node_name(n));
    }
    return out;
}

enum class SignalKind { node_voltage, source_current, memristor_current, fixed_current, state };

struct SignalRef {
    SignalKind kind;
    std::size_t index;
};

SignalRef resolve_signal(const Layout& layout, const std::string& name) {
    auto inner = [&](std::string_view prefix) -> std::optional<std::string> {
        if (name.size() > prefix.size() + 2 && name.starts_with(prefix) && name[prefix.size()] == '(' &&
            name.back() == ')') {
            return name.substr(prefix.size() + 1, name.size() - prefix.size() - 2);
        }
        return std::nullopt;
    };
    const Circuit& c = layout.circuit;
    if (auto node = inner("v")) {
        if (auto id = c.find_node(*node)) return {SignalKind::node_voltage, *id};
        throw InputError(fmt::format("unknown node in signal {}", name));
    }
    if (auto id = inner("vg")) {
        if (const auto* d = c.find_device(*id); d != nullptr && d->kind() == DeviceKind::memristor) {
            return {SignalKind::state, layout.device_slot[static_cast<std::size_t>(d - c.devices().data())]};
        }
        throw InputError(fmt::format("signal {} needs a memristor", name));
    }
    if (auto id = inner("i")) {
        const auto* d = c.find_device(*id);
        if (d == nullptr) throw InputError(fmt::format("unknown device in signal {}", name));
        const std::size_t slot = layout.device_slot[static_cast<std::size_t>(d - c.devices().data())];
        switch (d->kind()) {
            case DeviceKind::vsource: return {SignalKind::source_current, slot};
            case DeviceKind::memristor: return {SignalKind::memristor_current, slot};
            default: return {SignalKind::fixed_current, slot};
        }
    }
    throw InputError(fmt::format("cannot parse signal name {}", name));
}

}  // namespace

std::vector<std::string> all_signals(const Circuit& c) {
    std::vector<std::string> out;
    for (std::size_t n = 1; n < c.nodes().size(); ++n) out.push_back(fmt::format("v({})", c.node_name(n)));
    for (const auto& d : c.devices()) {
        out.push_back(fmt::format("i({})", d.id));
        if (d.kind() == DeviceKind::memristor) out.push_back(fmt::format("vg({})", d.id));
    }
    return out;
}

SimConfig config_from_circuit(const Circuit& c) {
    c.check();
    SimConfig cfg;
    cfg.dt = c.tran()->dt;
    cfg.tstop = c.tran()->tstop;
    cfg.strobe = c.strobe();
    return cfg;
}

double max_stable_dt(const Circuit& c) {
    double dt = std::numeric_limits<double>::infinity();
    for (const auto& m : c.models()) {
        dt = std::min(dt, step_guard_fraction * m.params.vdd * m.params.cm / m.params.ibias);
    }
    return dt;
}

void validate(const SimConfig& cfg, const Circuit& c) {
    if (!(std::isfinite(cfg.dt) && std::isfinite(cfg.tstop) && cfg.dt > 0 && cfg.dt <= cfg.tstop)) {
        throw InputError(fmt::format("need 0 < dt <= tstop, got dt={} tstop={}", cfg.dt, cfg.tstop));
    }
    for (const auto& m : c.models()) {
        const auto& p = m.params;
        if (cfg.dt * p.ibias / p.cm > step_guard_fraction * p.vdd * (1 + 1e-12)) {
            throw InputError(fmt::format(
                "time step {} too large for model {}: dt*ibias/cm must stay within 2% of vdd (max dt {})",
                cfg.dt, m.name, step_guard_fraction * p.vdd * p.cm / p.ibias));
        }
    }
    validate(cfg.strobe);
}

LinearSystem stamp_system(const Circuit& c, std::span<const double> states, double t,
                          std::span<const double> v_ab_prev) {
    const Layout layout(c);
    if (states.size() != layout.memristors.size()) {
        throw InputError(fmt::format("expected {} memristor states, got {}", layout.memristors.size(),
                                     states.size()));
    }
    if (!v_ab_prev.empty() && v_ab_prev.size() != states.size()) {
        throw InputError("v_ab_prev must be empty or match the memristor count");
    }
    LinearSystem sys = base_system(layout);
    stamp_dynamic(layout, sys, states, v_ab_prev, {}, t);
    return sys;
}

Waveform transient(const Circuit& c, const SimConfig& cfg) {
    c.check();
    validate(cfg, c);
    const Layout layout(c);

    const auto names = cfg.record.empty() ? all_signals(c) : cfg.record;
    std::vector<SignalRef> refs;
    refs.reserve(names.size());
    for (const auto& n : names) refs.push_back(resolve_signal(layout, n));

    const auto steps = static_cast<std::size_t>(std::llround(cfg.tstop / cfg.dt));
    Waveform wave(cfg.dt, names, steps + 1);

    const std::size_t n_mem = layout.memristors.size();
    std::vector<double> states(n_mem), next(n_mem), v_ab(n_mem, 0.0), g_mem(n_mem, 0.0), row(refs.size());
    for (std::size_t m = 0; m < n_mem; ++m) {
        const auto& e = std::get<MemristorElement>(c.devices()[layout.memristors[m].device].element);
        states[m] = e.vg0;
    }

    const LinearSystem base = base_system(layout);
    LinearSystem sys = base;
    LuSolver solver;
    {
        // Structural pattern with every memristor present, whatever its
        // conductance, for a fill-reducing elimination order.
        LinearSystem pattern = base;
        for (const auto& slot : layout.memristors) stamp_conductance(pattern.matrix, slot.a, slot.b, 1.0);
        solver.set_ordering(minimum_degree_order(pattern.matrix));
    }
    std::vector<double> x;

    // Solves at time t with `states`; fills x, v_ab, g_mem.
    auto solve_at = [&](double t, std::size_t step) {
        sys.matrix = base.matrix;
        stamp_dynamic(layout, sys, states, v_ab, g_mem, t);
        try {
            solver.solve(sys, x);
        } catch (const SingularMatrixError& e) {
            auto nodes = floating_nodes(layout, g_mem);
            if (nodes.empty()) nodes.push_back(layout.unknown_name(e.pivot_index()));
            std::string list;
            for (const auto& n : nodes) list += (list.empty() ? "" : ", ") + n;
            throw SingularMatrixError(fmt::format("singular system at step {}: no path to ground for {{{}}}", step, list),
                                      e.pivot_index(), std::move(nodes));
        } catch (const NumericalError& e) {
            throw NumericalError(fmt::format("step {}: {}", step, e.what()));
        }
        for (double v : x) {
            if (!std::isfinite(v)) throw NumericalError(fmt::format("non-finite node voltage at step {}", step));
        }
        for (std::size_t m = 0; m < n_mem; ++m) {
            const auto& slot = layout.memristors[m];
            v_ab[m] = node_voltage(x, slot.a) - node_voltage(x, slot.b);
        }
    };

    auto record = [&]() {
        for (std::size_t s = 0; s < refs.size(); ++s) {
            const auto& ref = refs[s];
            switch (ref.kind) {
                case SignalKind::node_voltage: row[s] = node_voltage(x, ref.index); break;
                case SignalKind::source_current: row[s] = x[layout.n_nodes + ref.index]; break;
                case SignalKind::memristor_current: row[s] = g_mem[ref.index] * v_ab[ref.index]; break;
                case SignalKind::fixed_current: {
                    const auto& f = layout.fixed[ref.index];
                    row[s] = f.g * (node_voltage(x, f.a) - node_voltage(x, f.b));
                    break;
                }
                case SignalKind::state: row[s] = states[ref.index]; break;
            }
        }
        wave.append(row);
    };

    solve_at(0.0, 0);
    record();

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k + 1) * cfg.dt;
        solve_at(t, k + 1);
        const bool strobe = strobe_level(cfg.strobe, t);
        for (std::size_t m = 0; m < n_mem; ++m) {
            const auto& p = *layout.memristors[m].params;
            const double rate = state_derivative(v_ab[m], strobe, MemristorState{states[m]}, p);
            next[m] = std::clamp(states[m] + cfg.dt * rate, 0.0, p.vdd);
            if (!std::isfinite(next[m])) throw NumericalError(fmt::format("non-finite state at step {}", k + 1));
        }
        // Currents in this row belong to the states the network was solved with;
        // the recorded vg is the state after the update.
        states.swap(next);
        record();
    }
    return wave;
}

SupplySummary supply_current(const Circuit& c, const Waveform& w) {
    SupplySummary out;
    std::vector<std::span<const double>> currents;
    for (const auto& d : c.devices()) {
        if (const auto* m = std::get_if<MemristorElement>(&d.element)) {
            const auto* p = c.find_model(m->model);
            if (p == nullptr) throw InputError(fmt::format("unresolved model {}", m->model));
            out.static_bias += p->ibias;
        } else if (d.kind() == DeviceKind::vsource) {
            currents.push_back(w.series(fmt::format("i({})", d.id)));
        }
    }
    for (std::size_t k = 0; k < w.samples(); ++k) {
        double total = 0.0;
        for (const auto& s : currents) total += std::fabs(s[k]);
        out.peak_dynamic = std::max(out.peak_dynamic, total);
    }
    return out;
}

}  // namespace memsim
