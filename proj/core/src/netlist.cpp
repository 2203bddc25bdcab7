#include "memsim/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "memsim/error.hpp"
#include "memsim/number_format.hpp"

namespace memsim {

namespace {

struct Token {
    std::string text;
    std::size_t column = 0;  // 1-based
};

double parse_value_at(std::string_view token, std::size_t line, std::size_t column) {
    auto fail = [&](std::size_t offset) -> double {
        throw ParseError(fmt::format("malformed number '{}'", token), line, column + offset);
    };
    if (token.empty()) fail(0);

    std::size_t pos = 0;
    bool negative = false;
    if (token[0] == '+' || token[0] == '-') {
        negative = token[0] == '-';
        pos = 1;
    }
    // from_chars would also accept "inf" and "nan"; only plain decimals here.
    if (pos >= token.size() || !(std::isdigit(static_cast<unsigned char>(token[pos])) || token[pos] == '.')) {
        fail(pos);
    }
    double mantissa = 0.0;
    auto [end, ec] = std::from_chars(token.data() + pos, token.data() + token.size(), mantissa,
                                     std::chars_format::general);
    if (ec != std::errc{}) fail(pos);
    const std::string_view number = token.substr(pos, static_cast<std::size_t>(end - token.data()) - pos);
    pos = static_cast<std::size_t>(end - token.data());

    int shift = 0;
    const std::string rest = to_lower(token.substr(pos));
    std::size_t unit_start = 0;
    if (rest.starts_with("meg")) {
        shift = 6;
        unit_start = 3;
    } else if (!rest.empty()) {
        switch (rest[0]) {
            case 'f': shift = -15; unit_start = 1; break;
            case 'p': shift = -12; unit_start = 1; break;
            case 'n': shift = -9; unit_start = 1; break;
            case 'u': shift = -6; unit_start = 1; break;
            case 'm': shift = -3; unit_start = 1; break;
            case 'k': shift = 3; unit_start = 1; break;
            case 'g': shift = 9; unit_start = 1; break;
            default: break;
        }
    }
    for (std::size_t i = unit_start; i < rest.size(); ++i) {
        if (!std::isalpha(static_cast<unsigned char>(rest[i]))) fail(pos + i);
    }
    if (shift != 0) {
        // Re-read with the suffix folded into the decimal exponent so that
        // "100n" is the double nearest 1e-7, not 100 * 1e-9.
        std::string_view digits = number;
        long exponent = shift;
        if (auto e = number.find_first_of("eE"); e != std::string_view::npos) {
            digits = number.substr(0, e);
            std::string_view exp_text = number.substr(e + 1);
            if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
            long own = 0;
            auto [p, xec] = std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), own);
            if (xec != std::errc{} || p != exp_text.data() + exp_text.size()) fail(0);
            exponent += own;
        }
        const std::string scaled = fmt::format("{}e{}", digits, exponent);
        auto [p, sec] = std::from_chars(scaled.data(), scaled.data() + scaled.size(), mantissa);
        if (sec == std::errc::result_out_of_range) fail(0);
        if (sec != std::errc{} || p != scaled.data() + scaled.size()) fail(0);
    }
    const double value = negative ? -mantissa : mantissa;
    if (!std::isfinite(value)) fail(0);
    return value;
}

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> raw;
    std::size_t i = 0;
    auto is_sep = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',';
    };
    while (i < line.size()) {
        if (is_sep(line[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < line.size() && !is_sep(line[i])) ++i;
        raw.push_back({std::string(line.substr(start, i - start)), start + 1});
    }
    // Glue "key = value", "key= value" and "key =value" into one token.
    std::vector<Token> out;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        Token t = raw[k];
        if (t.text.front() == '=' && !out.empty()) {
            out.back().text += t.text;
            t = out.back();
            out.pop_back();
        }
        while (t.text.back() == '=' && k + 1 < raw.size()) t.text += raw[++k].text;
        out.push_back(std::move(t));
    }
    return out;
}

struct KeyValue {
    std::string key;
    std::string value;
};

std::optional<KeyValue> split_key_value(const Token& t) {
    auto eq = t.text.find('=');
    if (eq == std::string::npos) return std::nullopt;
    return KeyValue{to_lower(t.text.substr(0, eq)), t.text.substr(eq + 1)};
}

class Parser {
public:
    Circuit parse(std::string_view text) {
        std::size_t line_no = 0;
        std::size_t start = 0;
        while (start <= text.size()) {
            auto nl = text.find('\n', start);
            auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (handle_line(line, line_no)) break;
            if (nl == std::string_view::npos) break;
            start = nl + 1;
        }
        finish(line_no);
        return std::move(circuit_);
    }

private:
    // Returns true at .end
    bool handle_line(std::string_view line, std::size_t line_no) {
        line_ = line_no;
        auto first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos || line[first] == '*') return false;

        auto tokens = tokenize(line);
        const std::string head = to_lower(tokens.front().text);
        if (head.front() == '.') {
            if (head == ".end") return true;
            if (head == ".model") return model_card(tokens), false;
            if (head == ".tran") return tran_card(tokens), false;
            if (head == ".strobe") return strobe_card(tokens), false;
            error(fmt::format("unknown directive {}", tokens.front().text), tokens.front().column);
        }
        switch (head.front()) {
            case 'v': vsource_card(tokens); break;
            case 'r': resistor_card(tokens); break;
            case 's': switch_card(tokens); break;
            case 'x': memristor_card(tokens); break;
            default: error(fmt::format("unknown card {}", tokens.front().text), tokens.front().column);
        }
        return false;
    }

    [[noreturn]] void error(const std::string& reason, std::size_t column = 0) const {
        throw ParseError(reason, line_, column);
    }

    double value(const Token& t) const { return parse_value_at(t.text, line_, t.column); }
    double value(const Token& t, std::string_view text, std::size_t offset) const {
        return parse_value_at(text, line_, t.column + offset);
    }

    void arity(const std::vector<Token>& tokens, std::size_t min, std::size_t max, std::string_view what) const {
        if (tokens.size() < min || tokens.size() > max) {
            error(fmt::format("bad arity for {} card {}: got {} fields", what, tokens.front().text, tokens.size()));
        }
    }

    template <typename Fn>
    void guarded(Fn&& fn, std::size_t column = 0) const {
        try {
            fn();
        } catch (const ParseError&) {
            throw;
        } catch (const InputError& e) {
            error(e.what(), column);
        }
    }

    void add_device(Device d) {
        guarded([&] { circuit_.add_device(std::move(d)); });
        device_lines_.push_back(line_);
    }

    NodeId node(const Token& t) {
        NodeId id = 0;
        guarded([&] { id = circuit_.node(t.text); }, t.column);
        return id;
    }

    void model_card(const std::vector<Token>& tokens) {
        if (tokens.size() < 3) error("bad arity for .model card");
        if (to_lower(tokens[2].text) != "memristor") {
            error(fmt::format("unsupported model type {}", tokens[2].text), tokens[2].column);
        }
        MemristorParams p;
        for (std::size_t i = 3; i < tokens.size(); ++i) {
            const auto& t = tokens[i];
            auto kv = split_key_value(t);
            if (!kv) error(fmt::format("expected key=value, got {}", t.text), t.column);
            const std::size_t off = kv->key.size() + 1;
            auto num = [&] { return value(t, kv->value, off); };
            if (kv->key == "kp") p.kp = num();
            else if (kv->key == "wl") p.w_over_l = num();
            else if (kv->key == "vthn") p.vthn = num();
            else if (kv->key == "vcm") p.vcm = num();
            else if (kv->key == "vdd") p.vdd = num();
            else if (kv->key == "cm") p.cm = num();
            else if (kv->key == "ibias") p.ibias = num();
            else if (kv->key == "gm0") p.gm0 = num();
            else if (kv->key == "gleak") p.g_leak = num();
            else if (kv->key == "tauleak") {
                p.tau_leak = to_lower(kv->value) == "inf" ? std::numeric_limits<double>::infinity() : num();
            } else if (kv->key == "level") {
                const double lvl = num();
                if (lvl != 0.0 && lvl != 1.0) error("model level must be 0 or 1", t.column);
                p.level = lvl == 0.0 ? DeviceLevel::linear : DeviceLevel::square_law;
            } else {
                error(fmt::format("unknown model parameter {}", kv->key), t.column);
            }
        }
        guarded([&] { circuit_.add_model(tokens[1].text, p); }, tokens[1].column);
    }

    void tran_card(const std::vector<Token>& tokens) {
        arity(tokens, 3, 3, ".tran");
        if (circuit_.tran()) error("duplicate .tran directive");
        TranDirective tran{value(tokens[1]), value(tokens[2])};
        guarded([&] { circuit_.set_tran(tran); });
    }

    void strobe_card(const std::vector<Token>& tokens) {
        if (seen_strobe_) error("duplicate .strobe directive");
        seen_strobe_ = true;
        if (tokens.size() < 2) error("bad arity for .strobe card");
        const auto mode = to_lower(tokens[1].text);
        StrobeSchedule s;
        if (mode == "high") {
            arity(tokens, 2, 2, ".strobe high");
            s = StrobeHigh{};
        } else if (mode == "low") {
            arity(tokens, 2, 2, ".strobe low");
            s = StrobeLow{};
        } else if (mode == "window") {
            arity(tokens, 4, 4, ".strobe window");
            s = StrobeWindow{value(tokens[2]), value(tokens[3])};
        } else if (mode == "pwl") {
            if (tokens.size() < 4 || tokens.size() % 2 != 0) error("bad arity for .strobe pwl card");
            StrobePwl pwl;
            for (std::size_t i = 2; i < tokens.size(); i += 2) {
                const double level = value(tokens[i + 1]);
                if (level != 0.0 && level != 1.0) error("strobe level must be 0 or 1", tokens[i + 1].column);
                pwl.points.emplace_back(value(tokens[i]), level == 1.0);
            }
            s = std::move(pwl);
        } else {
            error(fmt::format("unknown strobe mode {}", tokens[1].text), tokens[1].column);
        }
        guarded([&] { circuit_.set_strobe(std::move(s)); });
    }

    void vsource_card(const std::vector<Token>& tokens) {
        if (tokens.size() < 4) error(fmt::format("bad arity for source card {}", tokens[0].text));
        VoltageSourceElement e;
        e.pos = node(tokens[1]);
        e.neg = node(tokens[2]);
        const auto kind = to_lower(tokens[3].text);
        auto nums = [&](std::size_t from) {
            std::vector<double> v;
            for (std::size_t i = from; i < tokens.size(); ++i) v.push_back(value(tokens[i]));
            return v;
        };
        auto need = [&](std::size_t lo, std::size_t hi) {
            const std::size_t n = tokens.size() - 4;
            if (n < lo || n > hi) {
                error(fmt::format("bad arity for {} source {}: got {} values", kind, tokens[0].text, n));
            }
        };
        if (kind == "dc") {
            need(1, 1);
            e.spec = DcSource{value(tokens[4])};
        } else if (kind == "sin") {
            need(3, 4);
            auto v = nums(4);
            e.spec = SineSource{v[0], v[1], v[2], v.size() > 3 ? v[3] : 0.0};
        } else if (kind == "pulse") {
            need(7, 7);
            auto v = nums(4);
            e.spec = PulseSource{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
        } else if (kind == "pwl") {
            const std::size_t n = tokens.size() - 4;
            if (n < 2 || n % 2 != 0) error(fmt::format("bad arity for pwl source {}", tokens[0].text));
            auto v = nums(4);
            PwlSource pwl;
            for (std::size_t i = 0; i < v.size(); i += 2) pwl.points.push_back({v[i], v[i + 1]});
            e.spec = std::move(pwl);
        } else if (tokens.size() == 4) {
            e.spec = DcSource{value(tokens[3])};
        } else {
            error(fmt::format("unknown source type {}", tokens[3].text), tokens[3].column);
        }
        add_device({tokens[0].text, std::move(e)});
    }

    void resistor_card(const std::vector<Token>& tokens) {
        arity(tokens, 4, 4, "resistor");
        ResistorElement e{node(tokens[1]), node(tokens[2]), value(tokens[3])};
        add_device({tokens[0].text, e});
    }

    void switch_card(const std::vector<Token>& tokens) {
        arity(tokens, 4, 6, "switch");
        SwitchElement e;
        e.a = node(tokens[1]);
        e.b = node(tokens[2]);
        const auto pos = to_lower(tokens[3].text);
        if (pos == "on") e.params.position = SwitchPosition::on;
        else if (pos == "off") e.params.position = SwitchPosition::off;
        else error(fmt::format("switch position must be on or off, got {}", tokens[3].text), tokens[3].column);
        for (std::size_t i = 4; i < tokens.size(); ++i) {
            auto kv = split_key_value(tokens[i]);
            if (!kv) error(fmt::format("expected key=value, got {}", tokens[i].text), tokens[i].column);
            const double v = value(tokens[i], kv->value, kv->key.size() + 1);
            if (kv->key == "ron") e.params.r_on = v;
            else if (kv->key == "goff") e.params.g_off = v;
            else error(fmt::format("unknown switch parameter {}", kv->key), tokens[i].column);
        }
        add_device({tokens[0].text, e});
    }

    void memristor_card(const std::vector<Token>& tokens) {
        arity(tokens, 4, 5, "memristor");
        MemristorElement e;
        e.a = node(tokens[1]);
        e.b = node(tokens[2]);
        e.model = tokens[3].text;
        if (tokens.size() == 5) {
            auto kv = split_key_value(tokens[4]);
            if (!kv || kv->key != "vg0") {
                error(fmt::format("expected vg0=<volts>, got {}", tokens[4].text), tokens[4].column);
            }
            e.vg0 = value(tokens[4], kv->value, 4);
        }
        add_device({tokens[0].text, std::move(e)});
    }

    void finish(std::size_t last_line) {
        const auto& devices = circuit_.devices();
        for (std::size_t i = 0; i < devices.size(); ++i) {
            const auto* m = std::get_if<MemristorElement>(&devices[i].element);
            if (m == nullptr) continue;
            line_ = device_lines_[i];
            const auto* p = circuit_.find_model(m->model);
            if (p == nullptr) error(fmt::format("unresolved model {}", m->model));
            if (m->vg0 > p->vdd) error(fmt::format("vg0 of {} exceeds vdd", devices[i].id));
        }
        line_ = last_line;
        if (!circuit_.tran()) error("missing .tran directive");
    }

    Circuit circuit_;
    std::vector<std::size_t> device_lines_;
    std::size_t line_ = 0;
    bool seen_strobe_ = false;
};

std::string source_text(const SourceSpec& spec) {
    const auto f = format_roundtrip;
    return std::visit(
        [&](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DcSource>) {
                return "dc " + f(s.value);
            } else if constexpr (std::is_same_v<T, SineSource>) {
                return fmt::format("sin({} {} {} {})", f(s.offset), f(s.amplitude), f(s.freq), f(s.phase));
            } else if constexpr (std::is_same_v<T, PulseSource>) {
                return fmt::format("pulse({} {} {} {} {} {} {})", f(s.v0), f(s.v1), f(s.delay), f(s.rise),
                                   f(s.fall), f(s.width), f(s.period));
            } else {
                std::string out = "pwl(";
                for (std::size_t i = 0; i < s.points.size(); ++i) {
                    if (i) out += ' ';
                    out += f(s.points[i].t) + ' ' + f(s.points[i].v);
                }
                return out + ")";
            }
        },
        spec);
}

}  // namespace

double parse_value(std::string_view token) { return parse_value_at(token, 1, 1); }

Circuit parse_netlist(std::string_view text) { return Parser{}.parse(text); }

std::string serialize_netlist(const Circuit& c) {
    const auto f = format_roundtrip;
    std::ostringstream out;
    out << "* memsim netlist\n";
    for (const auto& m : c.models()) {
        const auto& p = m.params;
        out << fmt::format(
            ".model {} memristor kp={} wl={} vthn={} vcm={} vdd={} cm={} ibias={} gm0={} gleak={} "
            "tauleak={} level={}\n",
            m.name, f(p.kp), f(p.w_over_l), f(p.vthn), f(p.vcm), f(p.vdd), f(p.cm), f(p.ibias), f(p.gm0),
            f(p.g_leak), f(p.tau_leak), static_cast<int>(p.level));
    }
    const auto& n = c.nodes();
    for (const auto& d : c.devices()) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, VoltageSourceElement>) {
                    out << fmt::format("{} {} {} {}\n", d.id, n[e.pos], n[e.neg], source_text(e.spec));
                } else if constexpr (std::is_same_v<T, ResistorElement>) {
                    out << fmt::format("{} {} {} {}\n", d.id, n[e.a], n[e.b], f(e.ohms));
                } else if constexpr (std::is_same_v<T, SwitchElement>) {
                    out << fmt::format("{} {} {} {} ron={} goff={}\n", d.id, n[e.a], n[e.b],
                                       e.params.position == SwitchPosition::on ? "on" : "off",
                                       f(e.params.r_on), f(e.params.g_off));
                } else {
                    out << fmt::format("{} {} {} {} vg0={}\n", d.id, n[e.a], n[e.b], e.model, f(e.vg0));
                }
            },
            d.element);
    }
    if (c.tran()) out << fmt::format(".tran {} {}\n", f(c.tran()->dt), f(c.tran()->tstop));
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, StrobeHigh>) {
                out << ".strobe high\n";
            } else if constexpr (std::is_same_v<T, StrobeLow>) {
                out << ".strobe low\n";
            } else if constexpr (std::is_same_v<T, StrobeWindow>) {
                out << fmt::format(".strobe window {} {}\n", f(s.t_on), f(s.t_off));
            } else {
                out << ".strobe pwl";
                for (const auto& [t, level] : s.points) out << ' ' << f(t) << ' ' << (level ? 1 : 0);
                out << '\n';
            }
        },
        c.strobe());
    out << ".end\n";
    return out.str();
}

Circuit read_netlist_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("cannot open netlist {}", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_netlist(buf.str());
}

}  // namespace memsim
