#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "memsim/devices.hpp"
#include "memsim/engine.hpp"
#include "memsim/linear_solver.hpp"
#include "memsim/maze.hpp"
#include "memsim/netlist.hpp"

using namespace memsim;

namespace {

const std::string samples = MEMSIM_SAMPLES_DIR;

LinearSystem maze_matrix() {
    const Maze m = read_maze_file(samples + "/m8x8.txt");
    const Circuit c = maze_to_circuit(m, 0.8, 0.4, {});
    const std::vector<double> states(c.count(DeviceKind::memristor), 0.9);
    return stamp_system(c, states, 0.0);
}

void lu_maze(benchmark::State& state) {
    const LinearSystem sys = maze_matrix();
    LuSolver solver;
    if (state.range(0) != 0) solver.set_ordering(minimum_degree_order(sys.matrix));
    std::vector<double> x;
    for (auto _ : state) {
        solver.solve(sys, x);
        benchmark::DoNotOptimize(x.data());
    }
    state.SetLabel(state.range(0) != 0 ? "minimum degree" : "natural order");
}
BENCHMARK(lu_maze)->Arg(0)->Arg(1);

void maze_settle(benchmark::State& state) {
    const Maze m = read_maze_file(samples + "/m8x8.txt");
    SettleConfig cfg;
    cfg.t_settle = static_cast<double>(state.range(0)) * 1e-9;
    cfg.threshold = FixedThreshold{0.6};
    for (auto _ : state) {
        try {
            benchmark::DoNotOptimize(solve_maze(m, cfg));
        } catch (const UnresolvedMazeError&) {
        }
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(maze_settle)->Arg(200)->Unit(benchmark::kMillisecond);

void sine_transient(benchmark::State& state) {
    const Circuit c = read_netlist_file(samples + "/sine1mhz.net");
    const SimConfig cfg = config_from_circuit(c);
    for (auto _ : state) benchmark::DoNotOptimize(transient(c, cfg));
}
BENCHMARK(sine_transient)->Unit(benchmark::kMicrosecond);

void device_laws(benchmark::State& state) {
    MemristorParams p;
    p.level = state.range(0) != 0 ? DeviceLevel::square_law : DeviceLevel::linear;
    double v = -0.3;
    double acc = 0.0;
    for (auto _ : state) {
        acc += memristor_current(v, {0.9}, p) + state_derivative(v, true, {0.9}, p);
        v = v > 0.3 ? -0.3 : v + 1e-4;
    }
    benchmark::DoNotOptimize(acc);
    state.SetLabel(state.range(0) != 0 ? "level 1" : "level 0");
}
BENCHMARK(device_laws)->Arg(0)->Arg(1);

void parse_values(benchmark::State& state) {
    const std::vector<std::string> tokens{"100f", "1.2", "2meg", "0.42u", "-7.1E+2p", "5kOhm"};
    for (auto _ : state) {
        for (const auto& t : tokens) benchmark::DoNotOptimize(parse_value(t));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(tokens.size()));
}
BENCHMARK(parse_values);

void parse_maze_netlist(benchmark::State& state) {
    const Maze m = read_maze_file(samples + "/m8x8.txt");
    const std::string text = serialize_netlist(maze_to_circuit(m, 0.8, 0.4, {}));
    for (auto _ : state) benchmark::DoNotOptimize(parse_netlist(text));
    state.SetBytesProcessed(state.iterations() * static_cast<long>(text.size()));
}
BENCHMARK(parse_maze_netlist)->Unit(benchmark::kMicrosecond);

}  // namespace
