#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "memsim/devices.hpp"

namespace memsim {

/// Index into Circuit::nodes(). Index 0 is always ground, named "0".
using NodeId = std::size_t;
inline constexpr NodeId ground_node = 0;

struct MemristorElement {
    NodeId a = ground_node;
    NodeId b = ground_node;
    std::string model;
    double vg0 = 0.0;
    friend bool operator==(const MemristorElement&, const MemristorElement&) = default;
};

struct SwitchElement {
    NodeId a = ground_node;
    NodeId b = ground_node;
    SwitchParams params;
    friend bool operator==(const SwitchElement&, const SwitchElement&) = default;
};

struct ResistorElement {
    NodeId a = ground_node;
    NodeId b = ground_node;
    double ohms = 1.0;
    friend bool operator==(const ResistorElement&, const ResistorElement&) = default;
};

struct VoltageSourceElement {
    NodeId pos = ground_node;
    NodeId neg = ground_node;
    SourceSpec spec = DcSource{};
    friend bool operator==(const VoltageSourceElement&, const VoltageSourceElement&) = default;
};

enum class DeviceKind { memristor, switch_, resistor, vsource };

struct Device {
    std::string id;
    std::variant<MemristorElement, SwitchElement, ResistorElement, VoltageSourceElement> element;

    [[nodiscard]] DeviceKind kind() const noexcept { return static_cast<DeviceKind>(element.index()); }
    friend bool operator==(const Device&, const Device&) = default;
};

struct NamedModel {
    std::string name;
    MemristorParams params;
    friend bool operator==(const NamedModel&, const NamedModel&) = default;
};

struct TranDirective {
    double dt = 1e-9;
    double tstop = 1e-6;
    friend bool operator==(const TranDirective&, const TranDirective&) = default;
};

// Strobe (phi1) schedules. High connects the transconductor to Cm.
struct StrobeHigh {
    friend bool operator==(const StrobeHigh&, const StrobeHigh&) = default;
};
struct StrobeLow {
    friend bool operator==(const StrobeLow&, const StrobeLow&) = default;
};
/// High for t_on <= t < t_off.
struct StrobeWindow {
    double t_on = 0.0;
    double t_off = 0.0;
    friend bool operator==(const StrobeWindow&, const StrobeWindow&) = default;
};
/// Step-wise: the level of the latest point at or before t; the first
/// point's level applies before it.
struct StrobePwl {
    std::vector<std::pair<double, bool>> points;
    friend bool operator==(const StrobePwl&, const StrobePwl&) = default;
};

using StrobeSchedule = std::variant<StrobeHigh, StrobeLow, StrobeWindow, StrobePwl>;

void validate(const StrobeSchedule& s);
[[nodiscard]] bool strobe_level(const StrobeSchedule& s, double t);

/// A parsed or programmatically built netlist.
///
/// Nodes are created on first reference. Device ids are unique ignoring case
/// and must begin with their card letter (V, R, S, X) so that any Circuit can
/// be written back as netlist text.
class Circuit {
public:
    Circuit();

    /// Returns the node called `name`, creating it if needed.
    NodeId node(std::string_view name);
    [[nodiscard]] std::optional<NodeId> find_node(std::string_view name) const;
    [[nodiscard]] const std::vector<std::string>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::string& node_name(NodeId id) const { return nodes_.at(id); }

    /// Adds a model; names are matched ignoring case and must be unique.
    void add_model(std::string name, const MemristorParams& params);
    [[nodiscard]] const MemristorParams* find_model(std::string_view name) const;
    [[nodiscard]] const std::vector<NamedModel>& models() const noexcept { return models_; }

    void add_device(Device device);
    [[nodiscard]] const std::vector<Device>& devices() const noexcept { return devices_; }
    [[nodiscard]] const Device* find_device(std::string_view id) const;
    /// Replaces the waveform of an existing voltage source.
    void set_source(std::string_view id, SourceSpec spec);

    void add_memristor(std::string id, std::string_view a, std::string_view b, std::string model,
                       double vg0 = 0.0);
    void add_switch(std::string id, std::string_view a, std::string_view b, SwitchParams params);
    void add_resistor(std::string id, std::string_view a, std::string_view b, double ohms);
    void add_vsource(std::string id, std::string_view pos, std::string_view neg, SourceSpec spec);

    [[nodiscard]] const std::optional<TranDirective>& tran() const noexcept { return tran_; }
    void set_tran(TranDirective tran);

    [[nodiscard]] const StrobeSchedule& strobe() const noexcept { return strobe_; }
    void set_strobe(StrobeSchedule strobe);

    [[nodiscard]] std::size_t count(DeviceKind kind) const noexcept;

    /// Checks the cross-references a builder cannot check eagerly: memristor
    /// models resolve, initial states lie within their rails, a .tran exists.
    void check() const;

    friend bool operator==(const Circuit& x, const Circuit& y) {
        return x.nodes_ == y.nodes_ && x.models_ == y.models_ && x.devices_ == y.devices_ &&
               x.tran_ == y.tran_ && x.strobe_ == y.strobe_;
    }

private:
    std::vector<std::string> nodes_;
    std::unordered_map<std::string, NodeId> node_index_;
    std::vector<NamedModel> models_;
    std::unordered_map<std::string, std::size_t> model_index_;
    std::vector<Device> devices_;
    std::unordered_map<std::string, std::size_t> device_index_;
    std::optional<TranDirective> tran_;
    StrobeSchedule strobe_ = StrobeHigh{};
};

/// ASCII lower-casing; netlist keywords and names compare this way.
[[nodiscard]] std::string to_lower(std::string_view s);

}  // namespace memsim
