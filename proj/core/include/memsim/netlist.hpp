#pragma once

// SPICE-flavoured netlist text <-> Circuit.
//
//   * comment
//   .model <name> memristor [kp=] [wl=] [vthn=] [vcm=] [vdd=] [cm=] [ibias=]
//                           [gm0=] [gleak=] [tauleak=] [level=]
//   V<id> <n+> <n-> dc <v> | sin(<off> <amp> <freq> [phase])
//                  | pulse(<v0> <v1> <delay> <rise> <fall> <width> <period>)
//                  | pwl(<t1> <v1> ...)
//   R<id> <nA> <nB> <ohms>
//   S<id> <nA> <nB> <on|off> [ron=<ohms>] [goff=<S>]
//   X<id> <nA> <nB> <model> [vg0=<volts>]
//   .tran <dt> <tstop>
//   .strobe high | low | window <t_on> <t_off> | pwl <t1> <l1> ...
//   .end
//
// One card per line, keywords case-insensitive, node "0" is ground.

#include <filesystem>
#include <string>
#include <string_view>

#include "memsim/circuit.hpp"

namespace memsim {

/// Decimal number with an optional magnitude suffix (f p n u m k meg g,
/// case-insensitive). Letters after the suffix are units and are ignored,
/// so "100fF" is 1e-13. Throws ParseError on anything else.
[[nodiscard]] double parse_value(std::string_view token);

/// Parses a whole netlist. The first problem found aborts with a ParseError
/// carrying its line number.
[[nodiscard]] Circuit parse_netlist(std::string_view text);

/// Canonical text form; parse_netlist(serialize_netlist(c)) == c.
[[nodiscard]] std::string serialize_netlist(const Circuit& c);

[[nodiscard]] Circuit read_netlist_file(const std::filesystem::path& path);

}  // namespace memsim
