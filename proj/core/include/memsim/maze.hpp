#pragma once

// Maze solving by a memristor network. Every grid tile carries two
// memristor + switch series pairs (its east and south edges). Switches are
// closed only between two open cells; DC sources hold the entrance and the
// exit at V1 and V2, and the memristors along the current-carrying route
// charge up faster than the rest. Thresholding the final states reads out
// the path, which is checked against breadth-first search.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "memsim/circuit.hpp"
#include "memsim/devices.hpp"
#include "memsim/engine.hpp"
#include "memsim/error.hpp"
#include "memsim/waveform.hpp"

namespace memsim {

struct Cell {
    int row = 0;
    int col = 0;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class CellKind : char { wall = '#', open = '.' };

class Maze {
public:
    /// Throws InputError unless both endpoints are distinct open cells.
    Maze(int rows, int cols, std::vector<CellKind> cells, Cell entrance, Cell exit);

    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] Cell entrance() const noexcept { return entrance_; }
    [[nodiscard]] Cell exit() const noexcept { return exit_; }
    [[nodiscard]] bool in_bounds(Cell c) const noexcept {
        return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_;
    }
    [[nodiscard]] bool is_open(Cell c) const noexcept {
        return in_bounds(c) && cells_[index(c)] == CellKind::open;
    }
    [[nodiscard]] std::size_t index(Cell c) const noexcept {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c.col);
    }
    [[nodiscard]] std::size_t open_count() const noexcept;

    /// Open 4-neighbors in N, E, S, W order.
    [[nodiscard]] std::vector<Cell> open_neighbors(Cell c) const;

    friend bool operator==(const Maze&, const Maze&) = default;

private:
    int rows_;
    int cols_;
    std::vector<CellKind> cells_;
    Cell entrance_;
    Cell exit_;
};

/// '#' wall, '.' open, 'S' entrance, 'E' exit; one row per line.
[[nodiscard]] Maze parse_maze(std::string_view text);
[[nodiscard]] Maze read_maze_file(const std::filesystem::path& path);
[[nodiscard]] std::string format_maze(const Maze& m);

/// Undirected edge between 4-adjacent cells, stored with a < b.
struct Edge {
    Cell a;
    Cell b;
    Edge() = default;
    Edge(Cell x, Cell y) : a(x < y ? x : y), b(x < y ? y : x) {}
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct ShortestPath {
    std::set<Edge> edges;  ///< the path, or the union of all shortest paths
    bool unique = true;
    std::size_t length = 0;  ///< edges on a shortest path
};

/// BFS from the entrance (neighbor order N, E, S, W); nullopt when the exit
/// is unreachable.
[[nodiscard]] std::optional<ShortestPath> bfs_shortest_path(const Maze& m);

/// Random maze whose open cells form a tree, so every path between two
/// cells is unique. Entrance at (0, 0); exit at the open cell furthest
/// toward the opposite corner.
[[nodiscard]] Maze random_tree_maze(int rows, int cols, std::uint64_t seed);

enum class TileSide { east, south };

/// One memristor + switch pair of the network.
struct TileDevice {
    Cell cell;
    TileSide side = TileSide::east;
    std::optional<Cell> neighbor;  ///< empty when the edge leaves the grid
    bool closed = false;           ///< switch on
    bool a_at_cell = true;         ///< memristor A terminal faces `cell`
    std::string memristor_id;
    std::string switch_id;

    [[nodiscard]] std::optional<Edge> edge() const {
        if (!neighbor) return std::nullopt;
        return Edge{cell, *neighbor};
    }
};

/// Device plan in tile order (row-major, east before south). The memristor
/// A terminal faces the endpoint with the smaller BFS distance from the
/// entrance, the tile's own cell on ties.
[[nodiscard]] std::vector<TileDevice> tile_devices(const Maze& m);

struct NetworkOptions {
    double r_on = 5e3;
    double g_off = 1e-12;
    double dt = 1e-9;
    double t_settle = 5e-6;
};

inline constexpr std::string_view maze_model_name = "memr";
inline constexpr std::string_view dangling_node = "dangle";

[[nodiscard]] std::string cell_node(Cell c);

/// Builds the network: cell nodes, a memristor (A side) in series with a
/// switch per tile edge, boundary edges tied to one dangling node, states at
/// 0 V, V1 at the entrance and V2 at the exit against ground, strobe high.
[[nodiscard]] Circuit maze_to_circuit(const Maze& m, double v1, double v2, const MemristorParams& model,
                                      const NetworkOptions& opts = {});

/// Edges whose memristor state exceeds the threshold; only closed edges
/// qualify.
[[nodiscard]] std::set<Edge> readout(const std::map<Edge, double>& states, const std::set<Edge>& closed,
                                     double threshold);

struct GapThreshold {
    double threshold = 0.0;  ///< midpoint of the widest gap
    double gap = 0.0;
};

/// Widest gap between consecutive sorted values. gap is 0 with fewer than
/// two distinct values.
[[nodiscard]] GapThreshold largest_gap_threshold(std::span<const double> values);

struct AutoThreshold {};
struct FixedThreshold {
    double value = 0.6;
};
using ThresholdPolicy = std::variant<AutoThreshold, FixedThreshold>;

struct SettleConfig {
    double v1 = 0.8;
    double v2 = 0.4;
    MemristorParams model;
    double dt = 1e-9;
    double t_settle = 5e-6;
    ThresholdPolicy threshold = AutoThreshold{};
    double r_on = 5e3;
    double g_off = 1e-12;
};

class UnresolvedMazeError : public NumericalError {
public:
    UnresolvedMazeError() : NumericalError("unresolved maze: increase t_settle or adjust threshold") {}
};

struct MemristorReading {
    TileDevice device;
    double vg = 0.0;
    bool on = false;
};

struct MazeSolution {
    bool solvable = false;
    std::set<Edge> on_edges;
    std::vector<MemristorReading> readings;  ///< tile order
    double threshold = 0.0;
    double margin = 0.0;  ///< min on-state minus max off-state
    double settle_time = 0.0;
    SupplySummary supply;
    std::optional<ShortestPath> oracle;
    Waveform trace;  ///< vg of every memristor and both source currents
};

/// Settles the network and reads out the path. An unreachable exit gives an
/// unsolvable solution without simulating; a non-positive margin throws
/// UnresolvedMazeError.
[[nodiscard]] MazeSolution solve_maze(const Maze& m, const SettleConfig& cfg);

/// key=value summary lines followed by a per-edge CSV block.
void write_solution_report(std::ostream& out, const Maze& m, const MazeSolution& s);

}  // namespace memsim
