#include "memsim/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "memsim/error.hpp"

namespace memsim {

namespace {
constexpr double pivot_tolerance = 1e-14;
constexpr double residual_tolerance = 1e-9;
}  // namespace

double DenseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) {
        const double a = std::fabs(v);
        if (std::isnan(a)) return a;
        m = std::max(m, a);
    }
    return m;
}

double residual_inf(const LinearSystem& sys, std::span<const double> x) {
    double worst = 0.0;
    for (std::size_t r = 0; r < sys.size(); ++r) {
        const auto row = sys.matrix.row(r);
        double acc = -sys.rhs[r];
        for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
        if (std::isnan(acc)) return acc;
        worst = std::max(worst, std::fabs(acc));
    }
    return worst;
}

void LuSolver::solve(const LinearSystem& sys, std::vector<double>& x) {
    const std::size_t n = sys.size();
    if (sys.matrix.size() != n) throw NumericalError("matrix and right-hand side sizes differ");

    if (order_.empty()) {
        lu_ = sys.matrix;
        rhs_ = sys.rhs;
    } else {
        if (order_.size() != n) throw NumericalError("elimination order does not match the system size");
        if (lu_.size() != n) lu_ = DenseMatrix(n);
        rhs_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto src = sys.matrix.row(order_[i]);
            auto dst = lu_.row(i);
            for (std::size_t j = 0; j < n; ++j) dst[j] = src[order_[j]];
            rhs_[i] = sys.rhs[order_[i]];
        }
    }
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    const double scale = lu_.max_abs();
    const double threshold = pivot_tolerance * scale;
    if (!std::isfinite(scale)) throw NumericalError("matrix has non-finite entries");

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::fabs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::fabs(lu_(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best < threshold || best == 0.0) {
            const std::size_t original = order_.empty() ? k : order_[k];
            throw SingularMatrixError(fmt::format("singular matrix: pivot {:.3e} in column {}", best, original),
                                      original);
        }
        if (p != k) {
            std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
            std::swap(perm_[k], perm_[p]);
        }

        const auto pivot_row = lu_.row(k);
        nonzero_.clear();
        for (std::size_t j = k + 1; j < n; ++j) {
            if (pivot_row[j] != 0.0) nonzero_.push_back(j);
        }
        const double pivot = pivot_row[k];
        for (std::size_t i = k + 1; i < n; ++i) {
            auto row = lu_.row(i);
            if (row[k] == 0.0) continue;
            const double l = row[k] / pivot;
            row[k] = l;
            for (std::size_t j : nonzero_) row[j] -= l * pivot_row[j];
        }
    }

    y_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = lu_.row(i);
        double acc = rhs_[perm_[i]];
        for (std::size_t j = 0; j < i; ++j) acc -= row[j] * y_[j];
        y_[i] = acc;
    }
    for (std::size_t i = n; i-- > 0;) {
        const auto row = lu_.row(i);
        double acc = y_[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= row[j] * y_[j];
        y_[i] = acc / row[i];
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[order_.empty() ? i : order_[i]] = y_[i];

    double b_norm = 0.0;
    for (double v : sys.rhs) b_norm = std::max(b_norm, std::fabs(v));
    const double r = residual_inf(sys, x);
    if (!(r <= residual_tolerance * std::max(1.0, b_norm))) {
        throw NumericalError(fmt::format("linear solve residual {:.3e} exceeds tolerance", r));
    }
}

void LuSolver::set_ordering(std::vector<std::size_t> order) {
    std::vector<bool> seen(order.size(), false);
    for (std::size_t k : order) {
        if (k >= order.size() || seen[k]) throw NumericalError("elimination order is not a permutation");
        seen[k] = true;
    }
    order_ = std::move(order);
}

std::vector<std::size_t> minimum_degree_order(const DenseMatrix& m) {
    const std::size_t n = m.size();
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && m(i, j) != 0.0) adj[i][j] = adj[j][i] = true;
        }
    }
    std::vector<bool> done(n, false);
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<std::size_t> nbrs;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t best = n;
        std::size_t best_degree = n + 1;
        for (std::size_t v = 0; v < n; ++v) {
            if (done[v]) continue;
            std::size_t d = 0;
            for (std::size_t u = 0; u < n; ++u) d += (!done[u] && adj[v][u]) ? 1 : 0;
            if (d < best_degree) {
                best_degree = d;
                best = v;
            }
        }
        nbrs.clear();
        for (std::size_t u = 0; u < n; ++u) {
            if (!done[u] && adj[best][u]) nbrs.push_back(u);
        }
        // Eliminating `best` joins its remaining neighbours into a clique.
        for (std::size_t a : nbrs) {
            for (std::size_t b : nbrs) {
                if (a != b) adj[a][b] = true;
            }
        }
        done[best] = true;
        order.push_back(best);
    }
    return order;
}

std::vector<double> solve_linear(const LinearSystem& sys) {
    LuSolver solver;
    std::vector<double> x;
    solver.solve(sys, x);
    return x;
}

}  // namespace memsim
