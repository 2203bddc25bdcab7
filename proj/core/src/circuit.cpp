#include "memsim/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "memsim/error.hpp"

namespace memsim {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void validate(const StrobeSchedule& s) {
    if (const auto* w = std::get_if<StrobeWindow>(&s)) {
        if (!(std::isfinite(w->t_on) && std::isfinite(w->t_off) && w->t_on < w->t_off)) {
            throw InputError("strobe window needs t_on < t_off");
        }
    } else if (const auto* p = std::get_if<StrobePwl>(&s)) {
        if (p->points.empty()) throw InputError("strobe pwl needs at least one point");
        for (std::size_t i = 1; i < p->points.size(); ++i) {
            if (!(p->points[i].first > p->points[i - 1].first)) {
                throw InputError("strobe pwl times must be strictly increasing");
            }
        }
    }
}

bool strobe_level(const StrobeSchedule& s, double t) {
    return std::visit(
        [t](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, StrobeHigh>) {
                return true;
            } else if constexpr (std::is_same_v<T, StrobeLow>) {
                return false;
            } else if constexpr (std::is_same_v<T, StrobeWindow>) {
                return t >= v.t_on && t < v.t_off;
            } else {
                auto it = std::upper_bound(
                    v.points.begin(), v.points.end(), t,
                    [](double x, const std::pair<double, bool>& p) { return x < p.first; });
                if (it == v.points.begin()) return v.points.front().second;
                return std::prev(it)->second;
            }
        },
        s);
}

Circuit::Circuit() {
    nodes_.emplace_back("0");
    node_index_.emplace("0", ground_node);
}

NodeId Circuit::node(std::string_view name) {
    if (auto found = find_node(name)) return *found;
    if (name.empty() || std::any_of(name.begin(), name.end(), [](unsigned char c) {
            return std::isspace(c) || c == '(' || c == ')' || c == '=' || c == ',';
        })) {
        throw InputError(fmt::format("invalid node name '{}'", name));
    }
    const NodeId id = nodes_.size();
    nodes_.emplace_back(name);
    node_index_.emplace(std::string(name), id);
    return id;
}

std::optional<NodeId> Circuit::find_node(std::string_view name) const {
    auto it = node_index_.find(std::string(name));
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
}

void Circuit::add_model(std::string name, const MemristorParams& params) {
    validate(params);
    auto key = to_lower(name);
    if (key.empty()) throw InputError("model name must not be empty");
    if (model_index_.contains(key)) throw InputError(fmt::format("duplicate model {}", name));
    model_index_.emplace(std::move(key), models_.size());
    models_.push_back({std::move(name), params});
}

const MemristorParams* Circuit::find_model(std::string_view name) const {
    auto it = model_index_.find(to_lower(name));
    return it == model_index_.end() ? nullptr : &models_[it->second].params;
}

namespace {

char card_letter(DeviceKind kind) {
    switch (kind) {
        case DeviceKind::memristor: return 'x';
        case DeviceKind::switch_: return 's';
        case DeviceKind::resistor: return 'r';
        case DeviceKind::vsource: return 'v';
    }
    return '?';
}

}  // namespace

void Circuit::add_device(Device device) {
    auto key = to_lower(device.id);
    if (key.size() < 2 || key.front() != card_letter(device.kind())) {
        throw InputError(fmt::format("device id '{}' must start with '{}' and name the device",
                                     device.id, static_cast<char>(std::toupper(card_letter(device.kind())))));
    }
    if (device_index_.contains(key)) throw InputError(fmt::format("duplicate device id {}", device.id));

    auto check_node = [this](NodeId n) {
        if (n >= nodes_.size()) throw InputError(fmt::format("node index {} is not declared", n));
    };
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, VoltageSourceElement>) {
                check_node(e.pos);
                check_node(e.neg);
                validate(e.spec);
            } else {
                check_node(e.a);
                check_node(e.b);
                if constexpr (std::is_same_v<T, SwitchElement>) validate(e.params);
                if constexpr (std::is_same_v<T, ResistorElement>) {
                    if (!(std::isfinite(e.ohms) && e.ohms > 0)) {
                        throw InputError("resistance must be positive");
                    }
                }
                if constexpr (std::is_same_v<T, MemristorElement>) {
                    if (!std::isfinite(e.vg0) || e.vg0 < 0) {
                        throw InputError("memristor vg0 must be non-negative");
                    }
                }
            }
        },
        device.element);

    device_index_.emplace(std::move(key), devices_.size());
    devices_.push_back(std::move(device));
}

const Device* Circuit::find_device(std::string_view id) const {
    auto it = device_index_.find(to_lower(id));
    return it == device_index_.end() ? nullptr : &devices_[it->second];
}

void Circuit::set_source(std::string_view id, SourceSpec spec) {
    auto it = device_index_.find(to_lower(id));
    if (it == device_index_.end()) throw InputError(fmt::format("no device {}", id));
    auto* src = std::get_if<VoltageSourceElement>(&devices_[it->second].element);
    if (src == nullptr) throw InputError(fmt::format("{} is not a voltage source", id));
    validate(spec);
    src->spec = std::move(spec);
}

void Circuit::add_memristor(std::string id, std::string_view a, std::string_view b,
                            std::string model, double vg0) {
    MemristorElement e{node(a), node(b), std::move(model), vg0};
    add_device({std::move(id), std::move(e)});
}

void Circuit::add_switch(std::string id, std::string_view a, std::string_view b, SwitchParams params) {
    SwitchElement e{node(a), node(b), params};
    add_device({std::move(id), e});
}

void Circuit::add_resistor(std::string id, std::string_view a, std::string_view b, double ohms) {
    ResistorElement e{node(a), node(b), ohms};
    add_device({std::move(id), e});
}

void Circuit::add_vsource(std::string id, std::string_view pos, std::string_view neg, SourceSpec spec) {
    VoltageSourceElement e{node(pos), node(neg), std::move(spec)};
    add_device({std::move(id), std::move(e)});
}

void Circuit::set_tran(TranDirective tran) {
    if (!(std::isfinite(tran.dt) && std::isfinite(tran.tstop) && tran.dt > 0 && tran.dt <= tran.tstop)) {
        throw InputError(".tran needs 0 < dt <= tstop");
    }
    tran_ = tran;
}

void Circuit::set_strobe(StrobeSchedule strobe) {
    validate(strobe);
    strobe_ = std::move(strobe);
}

std::size_t Circuit::count(DeviceKind kind) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(devices_.begin(), devices_.end(), [kind](const Device& d) { return d.kind() == kind; }));
}

void Circuit::check() const {
    for (const auto& d : devices_) {
        const auto* m = std::get_if<MemristorElement>(&d.element);
        if (m == nullptr) continue;
        const auto* params = find_model(m->model);
        if (params == nullptr) throw InputError(fmt::format("unresolved model {}", m->model));
        if (m->vg0 > params->vdd) {
            throw InputError(fmt::format("vg0 of {} exceeds vdd of model {}", d.id, m->model));
        }
    }
    if (!tran_) throw InputError("missing .tran directive");
}

}  // namespace memsim
