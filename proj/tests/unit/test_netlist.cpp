#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "memsim/error.hpp"
#include "memsim/maze.hpp"
#include "memsim/netlist.hpp"
#include "memsim/number_format.hpp"
#include "oracles.hpp"

using namespace memsim;

namespace {

const std::string minimal = "V1 1 0 dc 0.8\nX1 1 0 memr\n.model memr memristor\n.tran 1n 1u\n.end\n";

ParseError parse_error(const std::string& text) {
    try {
        (void)parse_netlist(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "no parse error for:\n" << text;
    return ParseError("none", 0);
}

}  // namespace

TEST(ParseValue, Suffixes) {
    EXPECT_DOUBLE_EQ(parse_value("100f"), 1e-13);
    EXPECT_DOUBLE_EQ(parse_value("1.2"), 1.2);
    EXPECT_DOUBLE_EQ(parse_value("2meg"), 2e6);
    EXPECT_DOUBLE_EQ(parse_value("2MEG"), 2e6);
    EXPECT_DOUBLE_EQ(parse_value("2m"), 2e-3);
    EXPECT_DOUBLE_EQ(parse_value("3p"), 3e-12);
    EXPECT_DOUBLE_EQ(parse_value("4n"), 4e-9);
    EXPECT_DOUBLE_EQ(parse_value("5u"), 5e-6);
    EXPECT_DOUBLE_EQ(parse_value("6k"), 6e3);
    EXPECT_DOUBLE_EQ(parse_value("7G"), 7e9);
    EXPECT_DOUBLE_EQ(parse_value("-1.5e-3"), -1.5e-3);
    EXPECT_DOUBLE_EQ(parse_value("+.5"), 0.5);
    EXPECT_DOUBLE_EQ(parse_value("1e3k"), 1e6);
}

TEST(ParseValue, SuffixScalingIsCorrectlyRounded) {
    EXPECT_EQ(parse_value("100n"), 100e-9);
    EXPECT_EQ(parse_value("100f"), 100e-15);
    EXPECT_EQ(parse_value("0.42u"), 0.42e-6);
    EXPECT_EQ(parse_value("2.5e-3meg"), 2.5e3);
    EXPECT_EQ(parse_value("-7.1E+2p"), -7.1e-10);
    EXPECT_EQ(parse_value("3"), 3.0);
}

TEST(ParseValue, LetterAfterNumberIsAUnit) {
    EXPECT_DOUBLE_EQ(parse_value("1x"), 1.0);
    EXPECT_DOUBLE_EQ(parse_value("1e"), 1.0);
}

TEST(ParseValue, TrailingUnitsIgnored) {
    EXPECT_DOUBLE_EQ(parse_value("100fF"), 1e-13);
    EXPECT_DOUBLE_EQ(parse_value("800mV"), 0.8);
    EXPECT_DOUBLE_EQ(parse_value("5kOhm"), 5e3);
    EXPECT_DOUBLE_EQ(parse_value("1.2V"), 1.2);
    EXPECT_DOUBLE_EQ(parse_value("3megHz"), 3e6);
}

TEST(ParseValue, RejectsMalformed) {
    for (const char* bad : {"", "abc", "1x2", "1.2.3", "--1", "inf", "nan", "k", "1k2", "1e999", "."}) {
        EXPECT_THROW((void)parse_value(bad), ParseError) << bad;
    }
}

TEST(ParseValue, RoundTripsShortestForm) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> mant(-10.0, 10.0);
    std::uniform_int_distribution<int> ex(-20, 20);
    for (int k = 0; k < 5000; ++k) {
        const double x = mant(rng) * std::pow(10.0, ex(rng));
        EXPECT_EQ(parse_value(format_roundtrip(x)), x);
    }
}

TEST(ParseNetlist, MinimalNetlist) {
    const Circuit c = parse_netlist(minimal);
    EXPECT_EQ(c.count(DeviceKind::vsource), 1u);
    EXPECT_EQ(c.count(DeviceKind::memristor), 1u);
    EXPECT_EQ(c.nodes().size(), 2u);
    ASSERT_TRUE(c.tran());
    EXPECT_DOUBLE_EQ(c.tran()->dt, 1e-9);
    EXPECT_DOUBLE_EQ(c.tran()->tstop, 1e-6);
    EXPECT_TRUE(std::holds_alternative<StrobeHigh>(c.strobe()));
}

TEST(ParseNetlist, ModelKeysAndDefaults) {
    const Circuit c = parse_netlist(
        ".MODEL m1 MEMRISTOR kp=200u wl=10 vthn=0.1 vcm=0.5 vdd=1.0 cm=1p ibias=1u gm0=20u gleak=1n tauleak=inf "
        "level=1\n.model m2 memristor cm = 200f\n.tran 1n 1u\n");
    const MemristorParams* a = c.find_model("M1");
    ASSERT_NE(a, nullptr);
    EXPECT_DOUBLE_EQ(a->kp, 200e-6);
    EXPECT_DOUBLE_EQ(a->w_over_l, 10);
    EXPECT_DOUBLE_EQ(a->vthn, 0.1);
    EXPECT_DOUBLE_EQ(a->vcm, 0.5);
    EXPECT_DOUBLE_EQ(a->vdd, 1.0);
    EXPECT_DOUBLE_EQ(a->cm, 1e-12);
    EXPECT_DOUBLE_EQ(a->ibias, 1e-6);
    EXPECT_DOUBLE_EQ(a->gm0, 20e-6);
    EXPECT_DOUBLE_EQ(a->g_leak, 1e-9);
    EXPECT_TRUE(std::isinf(a->tau_leak));
    EXPECT_EQ(a->level, DeviceLevel::square_law);
    const MemristorParams* b = c.find_model("m2");
    ASSERT_NE(b, nullptr);
    MemristorParams expected;
    expected.cm = 200e-15;
    EXPECT_EQ(*b, expected);
}

TEST(ParseNetlist, AllCardsAndSources) {
    const Circuit c = parse_netlist(
        "* every card\n"
        ".model memr memristor\n"
        "v1 a 0 DC 0.8\n"
        "V2 b 0 SIN(0.6 0.2 1meg 0.5)\n"
        "V3 c 0 pulse(0 1 10n 1n 1n 5n 100n)\n"
        "V4 d 0 pwl(0 0, 1u 1.2, 2u 0.4)\n"
        "R1 a b 1k\n"
        "S1 b c on ron=100 goff=1p\n"
        "S2 c d off\n"
        "X1 d 0 MEMR vg0=0.3\n"
        ".tran 1n 1u\n"
        ".strobe window 100n 200n\n"
        ".end\n");
    EXPECT_EQ(c.devices().size(), 8u);
    const auto* v2 = std::get_if<VoltageSourceElement>(&c.find_device("V2")->element);
    ASSERT_NE(v2, nullptr);
    EXPECT_EQ(std::get<SineSource>(v2->spec), (SineSource{0.6, 0.2, 1e6, 0.5}));
    const auto* v3 = std::get_if<VoltageSourceElement>(&c.find_device("v3")->element);
    EXPECT_EQ(std::get<PulseSource>(v3->spec), (PulseSource{0, 1, 10e-9, 1e-9, 1e-9, 5e-9, 100e-9}));
    const auto* v4 = std::get_if<VoltageSourceElement>(&c.find_device("V4")->element);
    EXPECT_EQ(std::get<PwlSource>(v4->spec).points.size(), 3u);
    const auto* s1 = std::get_if<SwitchElement>(&c.find_device("S1")->element);
    EXPECT_EQ(s1->params, (SwitchParams{100, 1e-12, SwitchPosition::on}));
    const auto* s2 = std::get_if<SwitchElement>(&c.find_device("S2")->element);
    EXPECT_EQ(s2->params.position, SwitchPosition::off);
    const auto* x1 = std::get_if<MemristorElement>(&c.find_device("X1")->element);
    EXPECT_DOUBLE_EQ(x1->vg0, 0.3);
    EXPECT_EQ(std::get<StrobeWindow>(c.strobe()), (StrobeWindow{100e-9, 200e-9}));
    EXPECT_EQ(c.devices()[0].id, "v1");
    EXPECT_EQ(c.devices()[7].id, "X1");
}

TEST(ParseNetlist, StrobeForms) {
    const std::string base = ".model memr memristor\n.tran 1n 1u\n";
    EXPECT_TRUE(std::holds_alternative<StrobeLow>(parse_netlist(base + ".strobe LOW\n").strobe()));
    EXPECT_TRUE(std::holds_alternative<StrobeHigh>(parse_netlist(base + ".strobe high\n").strobe()));
    const auto pwl = std::get<StrobePwl>(parse_netlist(base + ".strobe pwl 0 1 1u 0 2u 1\n").strobe());
    ASSERT_EQ(pwl.points.size(), 3u);
    EXPECT_FALSE(pwl.points[1].second);
}

TEST(ParseNetlist, MissingTran) {
    const auto e = parse_error(".model memr memristor\nR1 a 0 1k\n.end\n");
    EXPECT_EQ(e.reason(), "missing .tran directive");
    EXPECT_GT(e.line(), 0u);
}

TEST(ParseNetlist, UnresolvedModelNamesItsLine) {
    const auto e = parse_error("X1 1 0 nomodel\n.tran 1n 1u\n");
    EXPECT_STREQ(e.what(), "unresolved model nomodel at line 1");
}

TEST(ParseNetlist, ErrorsCarryLineNumbers) {
    const std::string m = ".model memr memristor\n";
    struct Case {
        std::string text;
        std::size_t line;
    };
    for (const auto& [text, line] : std::vector<Case>{
             {m + "Q1 a 0 1k\n.tran 1n 1u\n", 2},
             {m + ".tran 1n 1u\n.frobnicate\n", 3},
             {m + "R1 a 0\n.tran 1n 1u\n", 2},
             {m + "R1 a 0 1k 2k\n.tran 1n 1u\n", 2},
             {m + "V1 a 0 sin(0.6 0.2)\n.tran 1n 1u\n", 2},
             {m + "V1 a 0 pulse(0 1 0 0 0 1n)\n.tran 1n 1u\n", 2},
             {m + "V1 a 0 pwl(0 0 1n)\n.tran 1n 1u\n", 2},
             {m + "V1 a 0 square 1\n.tran 1n 1u\n", 2},
             {m + "S1 a 0 maybe\n.tran 1n 1u\n", 2},
             {m + "X1 a 0 memr vg=0.3\n.tran 1n 1u\n", 2},
             {m + "R1 a 0 1k\n* comment\nr1 b 0 1k\n.tran 1n 1u\n", 4},
             {m + "R1 a 0 1..2\n.tran 1n 1u\n", 2},
             {m + ".tran 1n\n", 2},
             {m + ".tran 1n 1u\n.tran 1n 2u\n", 3},
             {m + ".tran 1n 1u\n.strobe low\n.strobe high\n", 4},
             {m + ".tran 1n 1u\n.strobe window 2u 1u\n", 3},
             {m + ".tran 1u 1n\n", 2},
             {".model memr memristor cm=0\n.tran 1n 1u\n", 1},
             {".model memr resistor\n.tran 1n 1u\n", 1},
             {m + m + ".tran 1n 1u\n", 2},
             {m + "X1 a 0 memr vg0=2\n.tran 1n 1u\n", 2},
             {m + "R1 a 0 -5\n.tran 1n 1u\n", 2},
         }) {
        const auto e = parse_error(text);
        EXPECT_EQ(e.line(), line) << text << " -> " << e.what();
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
    }
}

TEST(ParseNetlist, ColumnOfBadNumber) {
    const auto e = parse_error(".model memr memristor\nR1 a 0 1..2\n.tran 1n 1u\n");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 10u);
}

TEST(ParseNetlist, BlankLinesCommentsAndEnd) {
    const Circuit c = parse_netlist("\n* header\n   \n" + minimal + "R9 stray 0 1k\n");
    EXPECT_EQ(c.find_device("R9"), nullptr);
}

TEST(Serialize, MinimalRoundTrip) {
    const Circuit c = parse_netlist(minimal);
    EXPECT_EQ(parse_netlist(serialize_netlist(c)), c);
}

TEST(Serialize, EmptyDeviceListWritesDirectivesOnly) {
    Circuit c;
    c.set_tran({1e-9, 1e-6});
    const std::string text = serialize_netlist(c);
    EXPECT_EQ(oracle::count_cards(text, 'X') + oracle::count_cards(text, 'V') + oracle::count_cards(text, 'R') +
                  oracle::count_cards(text, 'S'),
              0u);
    EXPECT_NE(text.find(".tran"), std::string::npos);
    EXPECT_EQ(parse_netlist(text), c);
}

TEST(Serialize, MazeCircuitRoundTrip) {
    const Circuit c = maze_to_circuit(random_tree_maze(8, 8, 4), 0.8, 0.4, MemristorParams{});
    const std::string text = serialize_netlist(c);
    EXPECT_EQ(oracle::count_cards(text, 'X'), 128u);
    EXPECT_EQ(parse_netlist(text), c);
}

TEST(Serialize, RandomCircuitsRoundTrip) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Circuit c;
        MemristorParams p;
        p.kp = 1e-4 * (1 + u(rng));
        p.cm = 1e-13 * (1 + u(rng));
        p.level = u(rng) < 0.5 ? DeviceLevel::linear : DeviceLevel::square_law;
        if (u(rng) < 0.3) p.tau_leak = std::numeric_limits<double>::infinity();
        c.add_model("mod" + std::to_string(trial), p);
        const int n = 1 + static_cast<int>(u(rng) * 8);
        for (int k = 0; k < n; ++k) {
            const std::string a = "n" + std::to_string(static_cast<int>(u(rng) * 5));
            const std::string b = u(rng) < 0.3 ? "0" : "n" + std::to_string(static_cast<int>(u(rng) * 5));
            switch (k % 4) {
                case 0: c.add_resistor("R" + std::to_string(k), a, b, 1 + u(rng) * 1e4); break;
                case 1:
                    c.add_switch("S" + std::to_string(k), a, b,
                                 {1 + u(rng) * 1e3, u(rng) * 1e-9, u(rng) < 0.5 ? SwitchPosition::on : SwitchPosition::off});
                    break;
                case 2: c.add_memristor("X" + std::to_string(k), a, b, "mod" + std::to_string(trial), u(rng)); break;
                default:
                    if (u(rng) < 0.5) {
                        c.add_vsource("V" + std::to_string(k), a, b, SineSource{u(rng), u(rng), 1e6 * (1 + u(rng)), u(rng)});
                    } else {
                        c.add_vsource("V" + std::to_string(k), a, b, PwlSource{{{0, u(rng)}, {1e-6 * (1 + u(rng)), u(rng)}}});
                    }
            }
        }
        c.set_tran({1e-9 * (1 + u(rng)), 1e-6});
        if (u(rng) < 0.5) c.set_strobe(StrobePwl{{{0.0, true}, {5e-7 * (1 + u(rng)), false}}});
        const std::string text = serialize_netlist(c);
        const Circuit back = parse_netlist(text);
        EXPECT_EQ(back, c) << text;
        EXPECT_EQ(serialize_netlist(back), text);
    }
}

TEST(Serialize, SampleNetlistsRoundTrip) {
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(MEMSIM_SAMPLES_DIR)) {
        if (entry.path().extension() != ".net") continue;
        ++seen;
        const Circuit c = read_netlist_file(entry.path());
        EXPECT_EQ(parse_netlist(serialize_netlist(c)), c) << entry.path();
    }
    EXPECT_GE(seen, 3);
}

TEST(Serialize, ParsingIsDeterministic) {
    EXPECT_EQ(serialize_netlist(parse_netlist(minimal)), serialize_netlist(parse_netlist(minimal)));
}

TEST(ReadNetlist, MissingFileIsInputError) {
    EXPECT_THROW((void)read_netlist_file("/nonexistent/file.net"), InputError);
}

TEST(NumberFormat, Forms) {
    EXPECT_EQ(format_compact(1.28e-5), "1.28e-5");
    EXPECT_EQ(format_compact(0.4), "0.4");
    EXPECT_EQ(format_compact(5e-6), "5e-6");
    EXPECT_EQ(format_sci9(1.0), "1.00000000e+00");
    EXPECT_EQ(format_roundtrip(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_roundtrip(0.1), "0.1");
}
