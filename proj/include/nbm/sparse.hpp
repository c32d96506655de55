#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace nbm {

/// Square matrix in compressed sparse row form. Column indices are strictly
/// increasing within a row.
class SparseMatrix {
public:
    SparseMatrix() = default;

    std::size_t size() const { return n_; }
    std::size_t nonzeros() const { return values_.size(); }

    const std::vector<std::size_t>& row_offsets() const { return offsets_; }
    const std::vector<std::size_t>& columns() const { return columns_; }
    const std::vector<double>& values() const { return values_; }

    /// Entry (i, j), zero when not stored.
    double at(std::size_t i, std::size_t j) const;
    std::vector<double> diagonal() const;

    void multiply(std::span<const double> x, std::span<double> y) const;

    /// Same sparsity, every value multiplied by `s`.
    SparseMatrix scaled(double s) const;

private:
    friend class SparseBuilder;
    std::size_t n_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> columns_;
    std::vector<double> values_;
};

/// Accumulates (i, j, v) triplets; duplicates are summed by `finalize`.
class SparseBuilder {
public:
    explicit SparseBuilder(std::size_t n) : n_(n) {}

    /// Throws InputError when i or j is out of range.
    void add(std::size_t i, std::size_t j, double v);
    void reserve(std::size_t entries) { triplets_.reserve(entries); }

    /// Explicit zeros that result from summation are kept so the sparsity
    /// pattern does not depend on cancellation.
    SparseMatrix finalize() const;

private:
    std::size_t n_;
    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets_;
};

/// Sum of two matrices of equal size.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b);
/// A + diag(d).
SparseMatrix add_diagonal(const SparseMatrix& a, std::span<const double> d);

std::vector<double> matvec(const SparseMatrix& a, std::span<const double> x);

struct SolveReport {
    std::size_t iterations = 0;
    double residual = 0.0;  ///< final ||b - Ax|| / ||b|| (0 when b = 0)
    bool converged = false;
    std::size_t restarts = 0;
    bool stagnated = false;  ///< true residual stopped decreasing before reaching tol

    std::string to_json() const;
};

struct SolverOptions {
    double tol = 1e-10;          ///< relative residual
    std::size_t maxit = 0;       ///< 0 means 10 * n
    bool jacobi = false;         ///< diagonal preconditioning (split for CG, right for BiCGSTAB)
    std::size_t max_restarts = 3;  ///< BiCGSTAB breakdown restarts
    /// BiCGSTAB only: a stagnated solve still counts as converged when its
    /// relative residual is at most this (0 disables).
    double accept_tol = 0.0;
    /// Called with (iteration, current iterate) after every iteration.
    std::function<void(std::size_t, std::span<const double>)> monitor;
};

/// Conjugate gradients for symmetric positive definite A. `x` holds the
/// initial guess on entry (resized to zero if empty).
SolveReport solve_cg(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                     const SolverOptions& opts = {});

/// BiCGSTAB for general nonsingular A. On breakdown the iteration restarts
/// from the current iterate, at most `opts.max_restarts` times. A pass that
/// ends above tol without halving the true residual stops the solve as
/// stagnated.
SolveReport solve_bicgstab(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                           const SolverOptions& opts = {});

}  // namespace nbm
