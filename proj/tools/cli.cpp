#include "memsim/cli.hpp"

#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "memsim/analysis.hpp"
#include "memsim/engine.hpp"
#include "memsim/error.hpp"
#include "memsim/maze.hpp"
#include "memsim/netlist.hpp"
#include "memsim/number_format.hpp"

namespace memsim {
namespace {

namespace fs = std::filesystem;

double number(const std::string& text, std::string_view flag) {
    try {
        return parse_value(text);
    } catch (const ParseError& e) {
        throw InputError(fmt::format("{} '{}': {}", flag, text, e.reason()));
    }
}

double positive(const std::string& text, std::string_view flag) {
    const double v = number(text, flag);
    if (!(v > 0)) throw InputError(fmt::format("{} must be positive, got {}", flag, text));
    return v;
}

std::size_t count_of(const std::string& text, std::string_view flag) {
    const double v = positive(text, flag);
    if (v != std::floor(v) || v > 1e9) throw InputError(fmt::format("{} must be a whole number, got {}", flag, text));
    return static_cast<std::size_t>(v);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

// CSV written next to `out`: report.txt -> report<suffix>.csv
fs::path sibling_csv(const fs::path& out, std::string_view suffix) {
    return out.parent_path() / (out.stem().string() + std::string(suffix) + ".csv");
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot write {}", path.string()));
    return f;
}

struct RunArgs {
    std::string netlist;
    std::string out = "wave.csv";
    std::string signals;
};

int run_transient(const RunArgs& a, std::ostream& out) {
    const Circuit c = read_netlist_file(a.netlist);
    SimConfig cfg = config_from_circuit(c);
    if (!a.signals.empty()) cfg.record = split_list(a.signals);
    const Waveform w = transient(c, cfg);
    w.write_csv(fs::path(a.out));
    fmt::print(out, "{}: {} samples, {} signals\n", a.out, w.samples(), w.names().size());
    return exit_ok;
}

struct FingerprintArgs {
    std::string netlist;
    std::string freqs;
    std::string out = "metrics.csv";
};

int run_fingerprint(const FingerprintArgs& a, std::ostream& out) {
    const Circuit c = read_netlist_file(a.netlist);
    std::vector<double> freqs;
    for (const auto& f : split_list(a.freqs)) freqs.push_back(positive(f, "--freqs"));
    if (freqs.empty()) throw InputError("--freqs needs at least one frequency");

    const auto runs = frequency_sweep(c, freqs);
    std::vector<LoopMetrics> metrics;
    const fs::path out_path(a.out);
    for (std::size_t k = 0; k < runs.size(); ++k) {
        metrics.push_back(runs[k].metrics);
        runs[k].waveform.write_csv(sibling_csv(out_path, fmt::format("_f{}", k)));
    }
    auto f = open_output(out_path);
    write_metrics_csv(f, metrics);
    for (const auto& m : metrics) {
        fmt::print(out, "f={} area={} pinch_dev={} lobes={}\n", format_compact(m.frequency),
                   format_compact(m.area), format_compact(m.pinch_deviation), m.lobes);
    }
    return exit_ok;
}

struct MazeArgs {
    std::string maze;
    std::string v1 = "0.8";
    std::string v2 = "0.4";
    std::string t_settle = "5u";
    std::string dt = "1n";
    std::string cm;
    std::string ibias;
    std::string gm0;
    std::string threshold;
    std::string out = "report.txt";
};

int run_maze(const MazeArgs& a, std::ostream& out) {
    const Maze m = read_maze_file(a.maze);
    SettleConfig cfg;
    cfg.v1 = number(a.v1, "--v1");
    cfg.v2 = number(a.v2, "--v2");
    cfg.t_settle = positive(a.t_settle, "--t-settle");
    cfg.dt = positive(a.dt, "--dt");
    if (!a.cm.empty()) cfg.model.cm = positive(a.cm, "--cm");
    if (!a.ibias.empty()) cfg.model.ibias = positive(a.ibias, "--ibias");
    if (!a.gm0.empty()) cfg.model.gm0 = positive(a.gm0, "--gm0");
    if (!a.threshold.empty()) cfg.threshold = FixedThreshold{positive(a.threshold, "--threshold")};

    const MazeSolution s = solve_maze(m, cfg);
    const fs::path out_path(a.out);
    std::ostringstream report;
    write_solution_report(report, m, s);
    {
        auto f = open_output(out_path);
        f << report.str();
    }
    if (s.solvable) s.trace.write_csv(sibling_csv(out_path, "_states"));
    out << report.str();
    return exit_ok;
}

struct PulseDemoArgs {
    std::string count = "10";
    std::string v_spk = "100m";
    std::string width = "5n";
    std::string period = "1u";
    std::string dt = "1n";
    std::string vg0 = "0.6";
    std::string pattern = "random";
    std::uint64_t seed = 1;
    std::string out = "staircase.csv";
};

std::vector<PulseEvent> pulse_schedule(std::size_t count, double period, std::string_view pattern,
                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<PulseEvent> events;
    for (std::size_t k = 0; k < count; ++k) {
        int polarity = 1;
        if (pattern == "alternate") {
            polarity = k % 2 == 0 ? 1 : -1;
        } else if (pattern == "random") {
            polarity = (rng() & 1U) != 0 ? 1 : -1;
        } else if (pattern != "up") {
            throw InputError(fmt::format("unknown pulse pattern '{}' (up, alternate, random)", pattern));
        }
        events.push_back({(static_cast<double>(k) + 0.5) * period, polarity});
    }
    return events;
}

int run_pulse_demo(const PulseDemoArgs& a, std::ostream& out) {
    const std::size_t count = count_of(a.count, "--count");
    const double v_spk = positive(a.v_spk, "--v-spk");
    const double width = positive(a.width, "--width");
    const double period = positive(a.period, "--period");
    const double dt = positive(a.dt, "--dt");
    const double vg0 = number(a.vg0, "--vg0");
    const auto events = pulse_schedule(count, period, a.pattern, a.seed);

    const MemristorParams model;
    Circuit c;
    c.add_model("memr", model);
    c.add_vsource("V1", "A", "0", pulse_train(events, model.vcm, v_spk, width, dt * 1e-3));
    c.add_vsource("V2", "B", "0", DcSource{model.vcm});
    c.add_memristor("X1", "A", "B", "memr", vg0);
    c.set_tran({dt, static_cast<double>(count) * period});
    c.check();

    SimConfig cfg = config_from_circuit(c);
    cfg.record = {"v(A)", "i(X1)", "vg(X1)"};
    const Waveform w = transient(c, cfg);
    const StaircaseVerdict verdict = pulse_staircase(w, "vg(X1)", events);

    const fs::path out_path(a.out);
    w.write_csv(sibling_csv(out_path, "_wave"));
    auto f = open_output(out_path);
    f << "pulse,t,polarity,dvg,closed_form\n";
    MemristorState closed{vg0};
    for (std::size_t k = 0; k < events.size(); ++k) {
        const MemristorState next = apply_pulse(closed, events[k].polarity * v_spk, width, model);
        fmt::print(f, "{},{},{},{},{}\n", k, format_sci9(events[k].t), events[k].polarity,
                   format_sci9(verdict.step_sizes[k]), format_sci9(next.vg - closed.vg));
        closed = next;
    }
    fmt::print(out, "{} pulses, monotone_ok={}, final vg={}\n", count, verdict.monotone_ok,
               format_compact(w.series("vg(X1)").back()));
    return exit_ok;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Behavioral simulator for CMOS memristor emulator networks", "memsim"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Transient simulation of a netlist to a waveform CSV");
    run_cmd->add_option("netlist", run.netlist, "Netlist file")->required();
    run_cmd->add_option("--out", run.out, "Waveform CSV");
    run_cmd->add_option("--signals", run.signals, "Comma-separated signals, e.g. v(A),vg(X1); default all");

    FingerprintArgs fp;
    auto* fp_cmd = app.add_subcommand("fingerprint", "Loop area and pinch deviation over a frequency sweep");
    fp_cmd->add_option("netlist", fp.netlist, "Netlist with exactly one SIN source")->required();
    fp_cmd->add_option("--freqs", fp.freqs, "Comma-separated frequencies in Hz")->required();
    fp_cmd->add_option("--out", fp.out, "Metrics CSV; waveforms go next to it as <stem>_f<k>");

    MazeArgs mz;
    auto* maze_cmd = app.add_subcommand("maze", "Solve a maze with a memristor network");
    maze_cmd->add_option("maze", mz.maze, "Maze file ('#' wall, '.' open, S, E)")->required();
    maze_cmd->add_option("--v1", mz.v1, "Entrance voltage");
    maze_cmd->add_option("--v2", mz.v2, "Exit voltage");
    maze_cmd->add_option("--t-settle", mz.t_settle, "Settling time");
    maze_cmd->add_option("--dt", mz.dt, "Time step");
    maze_cmd->add_option("--cm", mz.cm, "State capacitance");
    maze_cmd->add_option("--ibias", mz.ibias, "Transconductor bias current");
    maze_cmd->add_option("--gm0", mz.gm0, "Transconductance");
    maze_cmd->add_option("--threshold", mz.threshold, "Fixed readout threshold; default widest gap");
    maze_cmd->add_option("--out", mz.out, "Report file; states go next to it as <stem>_states");

    PulseDemoArgs pd;
    auto* pulse_cmd = app.add_subcommand("pulse-demo", "Pulsed state programming staircase");
    pulse_cmd->add_option("--count", pd.count, "Number of pulses");
    pulse_cmd->add_option("--v-spk", pd.v_spk, "Pulse height");
    pulse_cmd->add_option("--width", pd.width, "Pulse width");
    pulse_cmd->add_option("--period", pd.period, "Pulse spacing");
    pulse_cmd->add_option("--dt", pd.dt, "Time step");
    pulse_cmd->add_option("--vg0", pd.vg0, "Initial state");
    pulse_cmd->add_option("--pattern", pd.pattern, "up, alternate or random");
    pulse_cmd->add_option("--seed", pd.seed, "Seed for the random pattern");
    pulse_cmd->add_option("--out", pd.out, "Staircase CSV; waveform goes next to it as <stem>_wave");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input_error;
    }

    try {
        if (*run_cmd) return run_transient(run, out);
        if (*fp_cmd) return run_fingerprint(fp, out);
        if (*maze_cmd) return run_maze(mz, out);
        if (*pulse_cmd) return run_pulse_demo(pd, out);
    } catch (const InputError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_input_error;
    } catch (const NumericalError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_numerical_error;
    } catch (const std::ios_base::failure& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_input_error;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_input_error;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_numerical_error;
    }
    return exit_input_error;
}

}  // namespace memsim
