#include "memsim/maze.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "memsim/number_format.hpp"

namespace memsim {

namespace {

constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();

// N, E, S, W
constexpr Cell directions[4] = {{-1, 0}, {0, 1}, {1, 0}, {0, -1}};

Cell step(Cell c, Cell d) { return {c.row + d.row, c.col + d.col}; }

std::vector<std::size_t> bfs_distances(const Maze& m) {
    std::vector<std::size_t> dist(static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols()),
                                  unreachable);
    std::deque<Cell> queue{m.entrance()};
    dist[m.index(m.entrance())] = 0;
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (Cell n : m.open_neighbors(c)) {
            if (dist[m.index(n)] != unreachable) continue;
            dist[m.index(n)] = dist[m.index(c)] + 1;
            queue.push_back(n);
        }
    }
    return dist;
}

}  // namespace

Maze::Maze(int rows, int cols, std::vector<CellKind> cells, Cell entrance, Cell exit)
    : rows_(rows), cols_(cols), cells_(std::move(cells)), entrance_(entrance), exit_(exit) {
    if (rows_ < 1 || cols_ < 1) throw InputError("maze needs at least one row and column");
    if (cells_.size() != static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_)) {
        throw InputError("maze cell count does not match its dimensions");
    }
    if (!is_open(entrance_) || !is_open(exit_)) throw InputError("maze entrance and exit must be open cells");
    if (entrance_ == exit_) throw InputError("maze entrance and exit must differ");
}

std::size_t Maze::open_count() const noexcept {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), CellKind::open));
}

std::vector<Cell> Maze::open_neighbors(Cell c) const {
    std::vector<Cell> out;
    for (Cell d : directions) {
        const Cell n = step(c, d);
        if (is_open(n)) out.push_back(n);
    }
    return out;
}

Maze parse_maze(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError("empty maze", 1);

    const std::size_t cols = lines.front().size();
    std::vector<CellKind> cells;
    std::optional<Cell> entrance, exit;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].size() != cols) {
            throw ParseError(fmt::format("ragged maze row: expected {} columns, got {}", cols, lines[r].size()),
                             r + 1);
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const Cell here{static_cast<int>(r), static_cast<int>(c)};
            switch (lines[r][c]) {
                case '#': cells.push_back(CellKind::wall); break;
                case '.': cells.push_back(CellKind::open); break;
                case 'S':
                    if (entrance) throw ParseError("multiple entrances 'S'", r + 1, c + 1);
                    entrance = here;
                    cells.push_back(CellKind::open);
                    break;
                case 'E':
                    if (exit) throw ParseError("multiple exits 'E'", r + 1, c + 1);
                    exit = here;
                    cells.push_back(CellKind::open);
                    break;
                default:
                    throw ParseError(fmt::format("unknown maze character '{}'", lines[r][c]), r + 1, c + 1);
            }
        }
    }
    if (cols == 0) throw ParseError("empty maze row", 1);
    if (!entrance) throw ParseError("maze has no entrance 'S'", lines.size());
    if (!exit) throw ParseError("maze has no exit 'E'", lines.size());
    return Maze(static_cast<int>(lines.size()), static_cast<int>(cols), std::move(cells), *entrance, *exit);
}

Maze read_maze_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("cannot open maze {}", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_maze(buf.str());
}

std::string format_maze(const Maze& m) {
    std::string out;
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            const Cell here{r, c};
            if (here == m.entrance()) out += 'S';
            else if (here == m.exit()) out += 'E';
            else out += m.is_open(here) ? '.' : '#';
        }
        out += '\n';
    }
    return out;
}

std::optional<ShortestPath> bfs_shortest_path(const Maze& m) {
    const auto dist = bfs_distances(m);
    if (dist[m.index(m.exit())] == unreachable) return std::nullopt;

    // Number of shortest paths to each cell, saturated at 2.
    std::vector<Cell> order;
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (dist[m.index({r, c})] != unreachable) order.push_back({r, c});
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](Cell x, Cell y) { return dist[m.index(x)] < dist[m.index(y)]; });
    std::vector<int> ways(dist.size(), 0);
    ways[m.index(m.entrance())] = 1;
    for (Cell c : order) {
        for (Cell n : m.open_neighbors(c)) {
            if (dist[m.index(n)] == dist[m.index(c)] + 1) {
                ways[m.index(n)] = std::min(2, ways[m.index(n)] + ways[m.index(c)]);
            }
        }
    }

    ShortestPath out;
    out.length = dist[m.index(m.exit())];
    out.unique = ways[m.index(m.exit())] == 1;
    std::vector<bool> on_path(dist.size(), false);
    std::deque<Cell> back{m.exit()};
    on_path[m.index(m.exit())] = true;
    while (!back.empty()) {
        const Cell c = back.front();
        back.pop_front();
        for (Cell n : m.open_neighbors(c)) {
            if (dist[m.index(n)] + 1 != dist[m.index(c)]) continue;
            out.edges.insert(Edge{n, c});
            if (!on_path[m.index(n)]) {
                on_path[m.index(n)] = true;
                back.push_back(n);
            }
        }
    }
    return out;
}

Maze random_tree_maze(int rows, int cols, std::uint64_t seed) {
    if (rows < 1 || cols < 1 || rows * cols < 2) throw InputError("random maze needs at least two cells");
    std::mt19937_64 rng(seed);
    const auto at = [cols](Cell c) {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c.col);
    };
    const auto inside = [&](Cell c) { return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols; };
    std::vector<CellKind> cells(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), CellKind::wall);
    std::vector<Cell> frontier;
    auto open_cell = [&](Cell c) {
        cells[at(c)] = CellKind::open;
        for (Cell d : directions) {
            const Cell n = step(c, d);
            if (inside(n) && cells[at(n)] == CellKind::wall) frontier.push_back(n);
        }
    };
    auto open_degree = [&](Cell c) {
        int k = 0;
        for (Cell d : directions) {
            const Cell n = step(c, d);
            if (inside(n) && cells[at(n)] == CellKind::open) ++k;
        }
        return k;
    };

    // Growing tree: a wall joins only while it touches exactly one open cell,
    // which keeps the open region acyclic.
    open_cell({0, 0});
    while (!frontier.empty()) {
        const std::size_t pick = static_cast<std::size_t>(rng() % frontier.size());
        const Cell c = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        if (cells[at(c)] == CellKind::wall && open_degree(c) == 1) open_cell(c);
    }

    Cell exit{0, 0};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (cells[at({r, c})] == CellKind::open && r + c >= exit.row + exit.col) exit = {r, c};
        }
    }
    return Maze(rows, cols, std::move(cells), {0, 0}, exit);
}

std::string cell_node(Cell c) { return fmt::format("n{}_{}", c.row, c.col); }

std::vector<TileDevice> tile_devices(const Maze& m) {
    const auto dist = bfs_distances(m);
    auto distance = [&](std::optional<Cell> c) {
        if (!c || !m.is_open(*c)) return unreachable;
        return dist[m.index(*c)];
    };
    std::vector<TileDevice> out;
    out.reserve(static_cast<std::size_t>(2 * m.rows() * m.cols()));
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            const Cell here{r, c};
            for (TileSide side : {TileSide::east, TileSide::south}) {
                TileDevice d;
                d.cell = here;
                d.side = side;
                const Cell other = side == TileSide::east ? Cell{r, c + 1} : Cell{r + 1, c};
                if (m.in_bounds(other)) d.neighbor = other;
                d.closed = d.neighbor && m.is_open(here) && m.is_open(other);
                d.a_at_cell = distance(here) <= distance(d.neighbor);
                const char tag = side == TileSide::east ? 'E' : 'S';
                d.memristor_id = fmt::format("X{}{}_{}", tag, r, c);
                d.switch_id = fmt::format("S{}{}_{}", tag, r, c);
                out.push_back(std::move(d));
            }
        }
    }
    return out;
}

Circuit maze_to_circuit(const Maze& m, double v1, double v2, const MemristorParams& model,
                        const NetworkOptions& opts) {
    Circuit c;
    c.add_model(std::string(maze_model_name), model);
    for (const auto& d : tile_devices(m)) {
        const std::string here = cell_node(d.cell);
        const std::string there = d.neighbor ? cell_node(*d.neighbor) : std::string(dangling_node);
        const std::string mid = fmt::format("m{}_{}{}", d.cell.row, d.cell.col, d.side == TileSide::east ? 'e' : 's');
        const std::string& a = d.a_at_cell ? here : there;
        const std::string& b = d.a_at_cell ? there : here;
        c.add_memristor(d.memristor_id, a, mid, std::string(maze_model_name), 0.0);
        SwitchParams sw{opts.r_on, opts.g_off, d.closed ? SwitchPosition::on : SwitchPosition::off};
        c.add_switch(d.switch_id, mid, b, sw);
    }
    c.add_vsource("V1", cell_node(m.entrance()), "0", DcSource{v1});
    c.add_vsource("V2", cell_node(m.exit()), "0", DcSource{v2});
    c.set_tran({opts.dt, opts.t_settle});
    c.set_strobe(StrobeHigh{});
    return c;
}

std::set<Edge> readout(const std::map<Edge, double>& states, const std::set<Edge>& closed, double threshold) {
    if (!(std::isfinite(threshold) && threshold > 0)) throw InputError("readout threshold must be positive");
    std::set<Edge> on;
    for (const auto& [edge, vg] : states) {
        if (vg > threshold && closed.contains(edge)) on.insert(edge);
    }
    return on;
}

GapThreshold largest_gap_threshold(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    GapThreshold best;
    if (sorted.empty()) return best;
    best.threshold = sorted.front();
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        const double gap = sorted[k] - sorted[k - 1];
        if (gap > best.gap) {
            best.gap = gap;
            best.threshold = 0.5 * (sorted[k] + sorted[k - 1]);
        }
    }
    return best;
}

MazeSolution solve_maze(const Maze& m, const SettleConfig& cfg) {
    MazeSolution sol;
    sol.oracle = bfs_shortest_path(m);
    sol.settle_time = cfg.t_settle;
    if (!sol.oracle) return sol;
    sol.solvable = true;

    const NetworkOptions net{cfg.r_on, cfg.g_off, cfg.dt, cfg.t_settle};
    const Circuit circuit = maze_to_circuit(m, cfg.v1, cfg.v2, cfg.model, net);
    const auto devices = tile_devices(m);

    SimConfig sim = config_from_circuit(circuit);
    for (const auto& d : devices) sim.record.push_back(fmt::format("vg({})", d.memristor_id));
    sim.record.emplace_back("i(V1)");
    sim.record.emplace_back("i(V2)");
    sol.trace = transient(circuit, sim);
    sol.supply = supply_current(circuit, sol.trace);

    std::vector<double> finals;
    std::map<Edge, double> states;
    std::set<Edge> closed;
    const std::size_t last = sol.trace.samples() - 1;
    for (std::size_t k = 0; k < devices.size(); ++k) {
        const double vg = sol.trace.series(k)[last];
        finals.push_back(vg);
        sol.readings.push_back({devices[k], vg, false});
        if (auto e = devices[k].edge()) {
            states.emplace(*e, vg);
            if (devices[k].closed) closed.insert(*e);
        }
    }

    if (const auto* fixed = std::get_if<FixedThreshold>(&cfg.threshold)) {
        if (!(fixed->value > 0 && fixed->value < cfg.model.vdd)) {
            throw InputError("fixed threshold must lie in (0, vdd)");
        }
        sol.threshold = fixed->value;
    } else {
        const auto gap = largest_gap_threshold(finals);
        if (!(gap.gap > 0)) throw UnresolvedMazeError();
        sol.threshold = gap.threshold;
    }

    sol.on_edges = readout(states, closed, sol.threshold);
    double min_on = std::numeric_limits<double>::infinity();
    double max_off = -std::numeric_limits<double>::infinity();
    for (auto& r : sol.readings) {
        const auto e = r.device.edge();
        r.on = e && sol.on_edges.contains(*e);
        if (r.on) min_on = std::min(min_on, r.vg);
        else max_off = std::max(max_off, r.vg);
    }
    if (sol.on_edges.empty() || !std::isfinite(max_off)) throw UnresolvedMazeError();
    sol.margin = min_on - max_off;
    if (!(sol.margin > 0)) throw UnresolvedMazeError();
    return sol;
}

void write_solution_report(std::ostream& out, const Maze& m, const MazeSolution& s) {
    const auto f = format_compact;
    out << "# maze solution\n";
    out << "status=" << (s.solvable ? "solved" : "unsolvable") << '\n';
    out << "rows=" << m.rows() << "\ncols=" << m.cols() << '\n';
    out << fmt::format("entrance={},{}\nexit={},{}\n", m.entrance().row, m.entrance().col, m.exit().row,
                       m.exit().col);
    out << "settle_time=" << f(s.settle_time) << '\n';
    out << "threshold=" << f(s.threshold) << '\n';
    out << "margin=" << f(s.margin) << '\n';
    out << "static_bias=" << f(s.supply.static_bias) << '\n';
    out << "peak_dynamic=" << f(s.supply.peak_dynamic) << '\n';
    out << "on_edges=" << s.on_edges.size() << '\n';
    if (s.oracle) {
        out << "bfs_length=" << s.oracle->length << '\n';
        out << "bfs_unique=" << (s.oracle->unique ? "true" : "false") << '\n';
        out << "matches_bfs=" << (s.on_edges == s.oracle->edges ? "true" : "false") << '\n';
    }
    out << "device,row1,col1,row2,col2,closed,vg,on\n";
    for (const auto& r : s.readings) {
        const auto& d = r.device;
        if (d.neighbor) {
            out << fmt::format("{},{},{},{},{},{},{},{}\n", d.memristor_id, d.cell.row, d.cell.col, d.neighbor->row,
                               d.neighbor->col, d.closed ? 1 : 0, format_sci9(r.vg), r.on ? 1 : 0);
        } else {
            out << fmt::format("{},{},{},,,{},{},{}\n", d.memristor_id, d.cell.row, d.cell.col, d.closed ? 1 : 0,
                               format_sci9(r.vg), r.on ? 1 : 0);
        }
    }
}

}  // namespace memsim
