#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace memsim {

/// Row-major square matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * n_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * n_ + c]; }
    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * n_, n_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * n_, n_};
    }
    void fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }
    [[nodiscard]] double max_abs() const noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// One MNA step: node-conductance block and source incidence in `matrix`,
/// injected currents and source voltages in `rhs`.
struct LinearSystem {
    DenseMatrix matrix;
    std::vector<double> rhs;

    LinearSystem() = default;
    explicit LinearSystem(std::size_t n) : matrix(n), rhs(n, 0.0) {}
    [[nodiscard]] std::size_t size() const noexcept { return rhs.size(); }
};

/// max_i |(A x - b)_i|
[[nodiscard]] double residual_inf(const LinearSystem& sys, std::span<const double> x);

/// Dense LU with partial pivoting that keeps its buffers between solves.
///
/// Rows are stored densely but elimination only touches the nonzero columns
/// of each pivot row, so a fill-reducing ordering pays off on MNA matrices.
class LuSolver {
public:
    /// Factors and solves. Throws SingularMatrixError when a pivot falls
    /// below 1e-14 * max|A|, NumericalError when the residual bound
    /// ||Ax - b|| <= 1e-9 * max(1, ||b||) fails.
    void solve(const LinearSystem& sys, std::vector<double>& x);

    /// Eliminate unknowns in this order (order[k] = original index of the
    /// k-th unknown). Empty restores the natural order.
    void set_ordering(std::vector<std::size_t> order);

private:
    std::vector<std::size_t> order_;
    std::vector<double> rhs_;
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
    std::vector<std::size_t> nonzero_;
    std::vector<double> y_;
};

[[nodiscard]] std::vector<double> solve_linear(const LinearSystem& sys);

/// Greedy minimum-degree elimination order for the symmetrized nonzero
/// pattern of `m`. Ties go to the lowest index.
[[nodiscard]] std::vector<std::size_t> minimum_degree_order(const DenseMatrix& m);

}  // namespace memsim
