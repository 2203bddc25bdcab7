#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "memsim/analysis.hpp"
#include "memsim/engine.hpp"
#include "memsim/error.hpp"
#include "memsim/netlist.hpp"

using namespace memsim;

namespace {

Circuit sine_template() { return read_netlist_file(std::string(MEMSIM_SAMPLES_DIR) + "/sine1mhz.net"); }

Circuit pulsed(std::span<const PulseEvent> events, double height, double width, double vg0, double tstop) {
    const MemristorParams p;
    Circuit c;
    c.add_model("memr", p);
    c.add_vsource("V1", "A", "0", pulse_train(events, p.vcm, height, width, 1e-12));
    c.add_vsource("V2", "B", "0", DcSource{p.vcm});
    c.add_memristor("X1", "A", "B", "memr", vg0);
    c.set_tran({1e-9, tstop});
    return c;
}

Waveform run(const Circuit& c) { return transient(c, config_from_circuit(c)); }

struct Loop {
    std::vector<double> v;
    std::vector<double> i;
};

Loop circle(std::size_t n, double phase = 0.0) {
    Loop l;
    for (std::size_t k = 0; k < n; ++k) {
        const double th = phase + 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        l.v.push_back(std::cos(th));
        l.i.push_back(std::sin(th));
    }
    return l;
}

}  // namespace

TEST(PinchTest, ExactZerosCount) {
    const std::vector<double> v{1.0, 0.0, -1.0};
    const std::vector<double> i{2.0, 0.25, -2.0};
    EXPECT_DOUBLE_EQ(pinch_test(v, i), 0.25);
}

TEST(PinchTest, InterpolatesBetweenSamples) {
    const std::vector<double> v{1.0, -3.0};
    const std::vector<double> i{0.0, 4.0};
    EXPECT_DOUBLE_EQ(pinch_test(v, i), 1.0);
}

TEST(PinchTest, ConstantVoltageHasNoPinchPoints) {
    const std::vector<double> v(10, 0.3);
    const std::vector<double> i(10, 1e-6);
    try {
        (void)pinch_test(v, i);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_STREQ(e.what(), "no pinch points");
    }
}

TEST(PinchTest, LengthMismatchRejected) {
    EXPECT_THROW((void)pinch_test(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0}), InputError);
}

TEST(PinchTest, SineDriveIsPinched) {
    const Circuit c = sine_template();
    const double f = 1e6;
    const auto runs = frequency_sweep(c, std::span<const double>(&f, 1));
    EXPECT_LT(runs[0].metrics.pinch_deviation, 1e-9);
}

TEST(PinchTest, BoundedByCurrentSlopeTimesStep) {
    // A device current proportional to v is exactly zero at every crossing,
    // so anything the test reports comes from interpolation of i alone.
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double g = u(rng);
        const double f = u(rng);
        std::vector<double> v;
        std::vector<double> i;
        for (int k = 0; k < 500; ++k) {
            const double t = 0.01 * k;
            v.push_back(std::sin(2 * std::numbers::pi * f * t + 0.1));
            i.push_back(g * v.back());
        }
        EXPECT_LE(pinch_test(v, i), 1e-12);
    }
}

TEST(LoopArea, UnitCircle) {
    const Loop l = circle(3600);
    EXPECT_NEAR(loop_area(l.v, l.i), std::numbers::pi, 1e-3 * std::numbers::pi);
    EXPECT_EQ(lobe_count(l.v), 2u);
}

TEST(LoopArea, OppositelyWoundLobesAdd) {
    // Figure eight: v = sin(th), i = sin(2 th); each lobe has area 4/3.
    std::vector<double> v;
    std::vector<double> i;
    const int n = 4000;
    for (int k = 0; k < n; ++k) {
        const double th = 2 * std::numbers::pi * k / n;
        v.push_back(std::sin(th));
        i.push_back(std::sin(2 * th));
    }
    EXPECT_NEAR(loop_area(v, i), 8.0 / 3.0, 1e-4);
    EXPECT_EQ(lobe_count(v), 2u);
}

TEST(LoopArea, InvariantUnderCyclicShift) {
    const Loop a = circle(997);
    for (std::size_t shift : {1u, 13u, 500u}) {
        Loop b = a;
        std::rotate(b.v.begin(), b.v.begin() + static_cast<std::ptrdiff_t>(shift), b.v.end());
        std::rotate(b.i.begin(), b.i.begin() + static_cast<std::ptrdiff_t>(shift), b.i.end());
        EXPECT_NEAR(loop_area(b.v, b.i), loop_area(a.v, a.i), 1e-12);
    }
}

TEST(LoopArea, ScalesWithAxes) {
    Loop l = circle(720);
    const double base = loop_area(l.v, l.i);
    for (auto& x : l.v) x *= 0.2;
    for (auto& x : l.i) x *= 3e-5;
    EXPECT_NEAR(loop_area(l.v, l.i), base * 0.2 * 3e-5, 1e-12 * base * 6e-6);
}

TEST(LoopArea, LineHasNoArea) {
    std::vector<double> v;
    std::vector<double> i;
    for (int k = 0; k < 100; ++k) {
        v.push_back(std::sin(0.0628 * k));
        i.push_back(1e-4 * v.back());
    }
    EXPECT_LE(loop_area(v, i), 1e-18);
}

TEST(LoopArea, HeldStateIsALine) {
    // Strobe low with ideal hold: G is frozen, so the i-v trace is a line.
    const Circuit c = read_netlist_file(std::string(MEMSIM_SAMPLES_DIR) + "/hold.net");
    const double f = 1e6;
    SweepOptions opts;
    opts.parallel = false;
    const auto m = frequency_collapse(c, std::span<const double>(&f, 1), opts);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_LE(m[0].area, 1e-18);
}

TEST(LoopArea, NeedsThreeSamples) {
    EXPECT_THROW((void)loop_area(std::vector<double>{1, -1}, std::vector<double>{0, 0}), InputError);
}

TEST(LobeCount, NoCrossingIsOneLobe) {
    EXPECT_EQ(lobe_count(std::vector<double>{1, 2, 3}), 1u);
}

TEST(FrequencyCollapse, AreaShrinksWithFrequency) {
    const Circuit c = sine_template();
    const std::vector<double> freqs{1e6, 1e7, 1e8};
    const auto m = frequency_collapse(c, freqs);
    ASSERT_EQ(m.size(), 3u);
    EXPECT_GT(m[0].area, 0.0);
    EXPECT_GT(m[0].area, m[1].area);
    EXPECT_GT(m[1].area, m[2].area);
    EXPECT_LT(m[2].area / m[0].area, 0.1);
    for (std::size_t k = 0; k < m.size(); ++k) {
        EXPECT_EQ(m[k].frequency, freqs[k]);
        EXPECT_EQ(m[k].lobes, 2u);
        EXPECT_LT(m[k].pinch_deviation, 1e-9);
    }
}

TEST(FrequencyCollapse, NonIncreasingOverALogGrid) {
    const Circuit c = sine_template();
    std::vector<double> freqs;
    for (int k = 0; k <= 8; ++k) freqs.push_back(1e6 * std::pow(10.0, k / 4.0));
    const auto m = frequency_collapse(c, freqs);
    for (std::size_t k = 1; k < m.size(); ++k) EXPECT_LE(m[k].area, m[k - 1].area) << freqs[k];
}

TEST(FrequencyCollapse, ParallelMatchesSerial) {
    const Circuit c = sine_template();
    const std::vector<double> freqs{2e6, 5e6, 2e7};
    SweepOptions serial;
    serial.parallel = false;
    EXPECT_EQ(frequency_collapse(c, freqs), frequency_collapse(c, freqs, serial));
}

TEST(FrequencyCollapse, SweepWaveformHoldsTheAnalyzedDevice) {
    const Circuit c = sine_template();
    const double f = 4e6;
    const auto runs = frequency_sweep(c, std::span<const double>(&f, 1));
    const auto& w = runs[0].waveform;
    EXPECT_EQ(w.names(), (std::vector<std::string>{"v(A)", "v(B)", "i(X1)", "vg(X1)"}));
    EXPECT_NEAR(w.duration(), 2.0 / f, 1e-15);
    EXPECT_GE(w.samples(), 401u);
}

TEST(FrequencyCollapse, RejectsBadInput) {
    const Circuit c = sine_template();
    EXPECT_THROW((void)frequency_collapse(c, {}), InputError);
    EXPECT_THROW((void)frequency_collapse(c, std::vector<double>{1e6, -1}), InputError);
    EXPECT_THROW((void)frequency_collapse(c, std::vector<double>{1e7, 1e6}), InputError);
    EXPECT_THROW((void)frequency_collapse(c, std::vector<double>{1e6, 1e6}), InputError);
    SweepOptions one;
    one.periods = 1;
    EXPECT_THROW((void)frequency_collapse(c, std::vector<double>{1e6}, one), InputError);

    const Circuit dc = read_netlist_file(std::string(MEMSIM_SAMPLES_DIR) + "/ramp.net");
    EXPECT_THROW((void)frequency_collapse(dc, std::vector<double>{1e6}), InputError);

    Circuit two = c;
    two.add_vsource("V9", "z", "0", SineSource{0, 1, 1e6, 0});
    two.add_resistor("R9", "z", "0", 1e3);
    EXPECT_THROW((void)frequency_collapse(two, std::vector<double>{1e6}), InputError);

    Circuit bare;
    bare.add_vsource("V1", "a", "0", SineSource{0, 1, 1e6, 0});
    bare.add_resistor("R1", "a", "0", 1e3);
    bare.set_tran({1e-9, 1e-6});
    try {
        (void)frequency_collapse(bare, std::vector<double>{1e6});
        FAIL();
    } catch (const InputError& e) {
        EXPECT_STREQ(e.what(), "circuit has no memristor");
    }
}

TEST(MetricsCsv, HeaderAndRows) {
    std::ostringstream out;
    const std::vector<LoopMetrics> m{{1e6, 2.5e-5, 1e-20, 2}};
    write_metrics_csv(out, m);
    const std::string text = out.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "freq,area,pinch_dev,lobes");
    EXPECT_NE(text.find(",2\n"), std::string::npos);
}

TEST(PulseStaircase, TenEqualUpSteps) {
    std::vector<PulseEvent> events;
    for (int k = 0; k < 10; ++k) events.push_back({(k + 0.5) * 1e-6, 1});
    const Waveform w = run(pulsed(events, 0.1, 5e-9, 0.0, 10e-6));
    const auto verdict = pulse_staircase(w, "vg(X1)", events);
    EXPECT_TRUE(verdict.monotone_ok);
    ASSERT_EQ(verdict.step_sizes.size(), 10u);
    for (double s : verdict.step_sizes) EXPECT_NEAR(s, 5e-3, 5e-6);
}

TEST(PulseStaircase, AlternatingPulsesFollowTheClosedForm) {
    const MemristorParams p;
    std::vector<PulseEvent> events;
    for (int k = 0; k < 8; ++k) events.push_back({(k + 0.5) * 5e-7, k % 2 ? -1 : 1});
    const Waveform w = run(pulsed(events, 0.01, 20e-9, 0.7, 4e-6));
    const auto verdict = pulse_staircase(w, "vg(X1)", events);
    EXPECT_TRUE(verdict.monotone_ok);
    MemristorState s{0.7};
    for (std::size_t k = 0; k < events.size(); ++k) {
        const MemristorState next = apply_pulse(s, 0.01 * events[k].polarity, 20e-9, p);
        const double expected = next.vg - s.vg;
        EXPECT_NEAR(verdict.step_sizes[k], expected, 1e-3 * std::fabs(expected)) << k;
        s = next;
    }
}

TEST(PulseStaircase, RandomWidthsMatchClosedForm) {
    const MemristorParams p;
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> steps(10, 60);
    std::uniform_real_distribution<double> height(0.005, 0.2);
    for (int trial = 0; trial < 8; ++trial) {
        const double width = steps(rng) * 1e-9;
        const double h = height(rng);
        const int polarity = trial % 2 ? -1 : 1;
        const std::vector<PulseEvent> events{{200e-9, polarity}};
        const Waveform w = run(pulsed(events, h, width, 0.6, 400e-9));
        const double step = pulse_staircase(w, "vg(X1)", events).step_sizes[0];
        const double expected = apply_pulse({0.6}, polarity * h, width, p).vg - 0.6;
        EXPECT_NEAR(step, expected, 1e-3 * std::fabs(expected)) << width << ' ' << h;
    }
}

TEST(PulseStaircase, EmptyScheduleIsTrivial) {
    const Waveform w;
    const auto verdict = pulse_staircase(w, "vg(X1)", {});
    EXPECT_TRUE(verdict.monotone_ok);
    EXPECT_TRUE(verdict.step_sizes.empty());
}

TEST(PulseStaircase, DetectsAWrongWayStep) {
    Waveform w(1e-9, {"vg"});
    for (double v : {0.5, 0.5, 0.49, 0.49}) w.append(std::vector<double>{v});
    const std::vector<PulseEvent> events{{1e-9, 1}};
    const auto verdict = pulse_staircase(w, "vg", events);
    EXPECT_FALSE(verdict.monotone_ok);
    EXPECT_NEAR(verdict.step_sizes[0], -0.01, 1e-15);
}

TEST(PulseStaircase, RejectsBadSchedules) {
    Waveform w(1e-9, {"vg"});
    for (int k = 0; k < 10; ++k) w.append(std::vector<double>{0.5});
    EXPECT_THROW((void)pulse_staircase(w, "vg", std::vector<PulseEvent>{{1e-6, 1}}), InputError);
    EXPECT_THROW((void)pulse_staircase(w, "vg", std::vector<PulseEvent>{{-1e-9, 1}}), InputError);
    EXPECT_THROW((void)pulse_staircase(w, "vg", std::vector<PulseEvent>{{1e-9, 0}}), InputError);
    EXPECT_THROW((void)pulse_staircase(w, "vg", std::vector<PulseEvent>{{5e-9, 1}, {2e-9, 1}}), InputError);
    EXPECT_THROW((void)pulse_staircase(w, "nope", std::vector<PulseEvent>{{1e-9, 1}}), InputError);
}

TEST(PulseTrain, Shape) {
    const std::vector<PulseEvent> events{{1e-6, 1}, {2e-6, -1}};
    const SourceSpec s = pulse_train(events, 0.6, 0.1, 5e-9, 1e-12);
    EXPECT_DOUBLE_EQ(source_value(s, 0.5e-6), 0.6);
    EXPECT_DOUBLE_EQ(source_value(s, 1.002e-6), 0.7);
    EXPECT_DOUBLE_EQ(source_value(s, 1.5e-6), 0.6);
    EXPECT_DOUBLE_EQ(source_value(s, 2.002e-6), 0.5);
    EXPECT_NO_THROW(validate(s));
}

TEST(PulseTrain, RejectsOverlapAndBadEdges) {
    EXPECT_THROW((void)pulse_train(std::vector<PulseEvent>{{1e-6, 1}, {1.002e-6, 1}}, 0.6, 0.1, 5e-9, 1e-12),
                 InputError);
    EXPECT_THROW((void)pulse_train(std::vector<PulseEvent>{{1e-6, 1}}, 0.6, 0.1, 1e-12, 1e-12), InputError);
    EXPECT_THROW((void)pulse_train(std::vector<PulseEvent>{{1e-6, 1}}, 0.6, 0.1, 5e-9, 0.0), InputError);
}

TEST(ModulatedHalfSine, ShapeAndEnvelope) {
    HalfSineSpec spec;
    spec.depth = 0.0;
    spec.cycles = 4;
    const PwlSource flat = modulated_half_sine(spec);
    EXPECT_EQ(flat.points.size(), 4u * 64u + 1u);
    EXPECT_NEAR(source_value(flat, 0.25e-9), 0.8, 1e-12);
    EXPECT_NEAR(source_value(flat, 0.75e-9), 0.6, 1e-12);
    EXPECT_NO_THROW(validate(SourceSpec{flat}));

    spec.depth = 1.0;
    spec.envelope_freq = 1e8;
    const PwlSource full = modulated_half_sine(spec);
    EXPECT_NEAR(source_value(full, 0.25e-9), 0.6 + 0.2 * 0.5 * (1 - std::cos(std::numbers::pi / 20)), 1e-12);
    for (const auto& p : full.points) {
        EXPECT_GE(p.v, 0.6 - 1e-15);
        EXPECT_LE(p.v, 0.8 + 1e-15);
    }

    spec.polarity = -1;
    const double envelope = 0.5 * (1 - std::cos(0.45 * std::numbers::pi));
    EXPECT_NEAR(source_value(modulated_half_sine(spec), 2.25e-9), 0.6 - 0.2 * envelope, 1e-12);
}

TEST(ModulatedHalfSine, RejectsBadSpecs) {
    HalfSineSpec spec;
    spec.depth = 1.5;
    EXPECT_THROW((void)modulated_half_sine(spec), InputError);
    spec = {};
    spec.carrier_freq = 0;
    EXPECT_THROW((void)modulated_half_sine(spec), InputError);
    spec = {};
    spec.points_per_cycle = 2;
    EXPECT_THROW((void)modulated_half_sine(spec), InputError);
    spec = {};
    spec.polarity = 0;
    EXPECT_THROW((void)modulated_half_sine(spec), InputError);
}
