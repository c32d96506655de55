#include "nbm/sparse.hpp"

#include "nbm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nbm {

double SparseMatrix::at(std::size_t i, std::size_t j) const
{
    const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - columns_.begin())];
}

std::vector<double> SparseMatrix::diagonal() const
{
    std::vector<double> d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
    return d;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    if (x.size() != n_ || y.size() != n_) {
        throw InputError("matvec: dimension mismatch (matrix " + std::to_string(n_) + ", vector " +
                         std::to_string(x.size()) + ")");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) s += values_[p] * x[columns_[p]];
        y[i] = s;
    }
}

SparseMatrix SparseMatrix::scaled(double s) const
{
    SparseMatrix out = *this;
    for (auto& v : out.values_) v *= s;
    return out;
}

void SparseBuilder::add(std::size_t i, std::size_t j, double v)
{
    if (i >= n_ || j >= n_) {
        throw InputError("sparse builder: index (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") out of range for n = " + std::to_string(n_));
    }
    triplets_.emplace_back(i, j, v);
}

SparseMatrix SparseBuilder::finalize() const
{
    // Counting sort by row, then a stable sort of each row by column keeps
    // the summation order (and thus the result) independent of the platform.
    SparseMatrix m;
    m.n_ = n_;
    std::vector<std::size_t> count(n_ + 1, 0);
    for (const auto& [i, j, v] : triplets_) ++count[i + 1];
    for (std::size_t i = 0; i < n_; ++i) count[i + 1] += count[i];
    std::vector<std::pair<std::size_t, double>> entries(triplets_.size());
    std::vector<std::size_t> next(count.begin(), count.end() - 1);
    for (const auto& [i, j, v] : triplets_) entries[next[i]++] = {j, v};

    m.offsets_.assign(n_ + 1, 0);
    m.columns_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (std::size_t i = 0; i < n_; ++i) {
        auto first = entries.begin() + static_cast<std::ptrdiff_t>(count[i]);
        auto last = entries.begin() + static_cast<std::ptrdiff_t>(count[i + 1]);
        std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto it = first; it != last; ++it) {
            if (!m.columns_.empty() && m.columns_.size() > m.offsets_[i] && m.columns_.back() == it->first) {
                m.values_.back() += it->second;
            } else {
                m.columns_.push_back(it->first);
                m.values_.push_back(it->second);
            }
        }
        m.offsets_[i + 1] = m.columns_.size();
    }
    return m;
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b)
{
    if (a.size() != b.size()) throw InputError("sparse add: dimension mismatch");
    SparseBuilder builder(a.size());
    builder.reserve(a.nonzeros() + b.nonzeros());
    for (const SparseMatrix* m : {&a, &b}) {
        for (std::size_t i = 0; i < m->size(); ++i) {
            for (std::size_t p = m->row_offsets()[i]; p < m->row_offsets()[i + 1]; ++p) {
                builder.add(i, m->columns()[p], m->values()[p]);
            }
        }
    }
    return builder.finalize();
}

SparseMatrix add_diagonal(const SparseMatrix& a, std::span<const double> d)
{
    if (d.size() != a.size()) throw InputError("add_diagonal: dimension mismatch");
    SparseBuilder builder(a.size());
    builder.reserve(a.nonzeros() + d.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) {
            builder.add(i, a.columns()[p], a.values()[p]);
        }
        builder.add(i, i, d[i]);
    }
    return builder.finalize();
}

std::vector<double> matvec(const SparseMatrix& a, std::span<const double> x)
{
    std::vector<double> y(a.size());
    a.multiply(x, y);
    return y;
}

std::string SolveReport::to_json() const
{
    std::ostringstream os;
    os.precision(17);
    os << "{\"iterations\": " << iterations << ", \"residual\": " << residual
       << ", \"converged\": " << (converged ? "true" : "false") << ", \"restarts\": " << restarts
       << ", \"stagnated\": " << (stagnated ? "true" : "false") << '}';
    return os.str();
}

namespace {

double dotp(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a)
{
    return std::sqrt(dotp(a, a));
}

std::vector<double> inverse_diagonal(const SparseMatrix& a, bool enabled)
{
    std::vector<double> inv(a.size(), 1.0);
    if (!enabled) return inv;
    const auto d = a.diagonal();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0) throw InputError("Jacobi scaling: zero diagonal entry at row " + std::to_string(i));
        inv[i] = 1.0 / d[i];
    }
    return inv;
}

// r = b - A x, returns ||r||.
double residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x, std::vector<double>& r)
{
    a.multiply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return norm2(r);
}

void prepare(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x)
{
    if (b.size() != a.size()) throw InputError("solve: right-hand side has wrong length");
    if (x.empty()) x.assign(a.size(), 0.0);
    if (x.size() != a.size()) throw InputError("solve: initial guess has wrong length");
}

}  // namespace

SolveReport solve_cg(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                     const SolverOptions& opts)
{
    prepare(a, b, x);
    const std::size_t n = a.size();
    const std::size_t maxit = opts.maxit ? opts.maxit : 10 * n;
    SolveReport rep;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        rep.converged = true;
        return rep;
    }
    const auto minv = inverse_diagonal(a, opts.jacobi);

    std::vector<double> r(n), z(n), p(n), q(n);
    double rnorm = residual(a, b, x, r);
    for (std::size_t i = 0; i < n; ++i) z[i] = minv[i] * r[i];
    p = z;
    double rz = dotp(r, z);

    while (rnorm > opts.tol * bnorm && rep.iterations < maxit) {
        a.multiply(p, q);
        const double pq = dotp(p, q);
        if (!(pq > 0.0)) break;  // not SPD along p
        const double step = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += step * p[i];
            r[i] -= step * q[i];
        }
        ++rep.iterations;
        rnorm = norm2(r);
        if (opts.monitor) opts.monitor(rep.iterations, x);
        if (rnorm <= opts.tol * bnorm) {
            // Guard against drift of the recursive residual.
            rnorm = residual(a, b, x, r);
            if (rnorm <= opts.tol * bnorm) break;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = minv[i] * r[i];
        const double rz_new = dotp(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rnorm = residual(a, b, x, r);
    rep.residual = rnorm / bnorm;
    rep.converged = rep.residual <= opts.tol;
    return rep;
}

SolveReport solve_bicgstab(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                           const SolverOptions& opts)
{
    prepare(a, b, x);
    const std::size_t n = a.size();
    const std::size_t maxit = opts.maxit ? opts.maxit : 10 * n;
    SolveReport rep;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        rep.converged = true;
        return rep;
    }
    const auto minv = inverse_diagonal(a, opts.jacobi);
    const double tiny = std::numeric_limits<double>::min();

    std::vector<double> r(n), rhat(n), p(n), v(n), phat(n), s(n), shat(n), t(n);
    double rnorm = residual(a, b, x, r);
    double rnorm_pass = rnorm;

    // Each pass of the outer loop is one (re)start from the current iterate.
    while (rnorm > opts.tol * bnorm && rep.iterations < maxit) {
        rhat = r;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        double rho = 1.0, alpha = 1.0, omega = 1.0;
        bool breakdown = false;

        while (rep.iterations < maxit) {
            const double rho_new = dotp(rhat, r);
            if (std::abs(rho_new) <= 1e-30 * norm2(rhat) * rnorm || std::abs(rho_new) < tiny) {
                breakdown = true;
                break;
            }
            const double beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
            for (std::size_t i = 0; i < n; ++i) phat[i] = minv[i] * p[i];
            a.multiply(phat, v);
            const double rv = dotp(rhat, v);
            if (std::abs(rv) < tiny) {
                breakdown = true;
                break;
            }
            alpha = rho / rv;
            for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
            ++rep.iterations;
            const double snorm = norm2(s);
            if (snorm <= opts.tol * bnorm) {
                for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
                r = s;
                rnorm = snorm;
                if (opts.monitor) opts.monitor(rep.iterations, x);
                break;
            }
            for (std::size_t i = 0; i < n; ++i) shat[i] = minv[i] * s[i];
            a.multiply(shat, t);
            const double tt = dotp(t, t);
            omega = tt > 0.0 ? dotp(t, s) / tt : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * phat[i] + omega * shat[i];
                r[i] = s[i] - omega * t[i];
            }
            rnorm = norm2(r);
            if (opts.monitor) opts.monitor(rep.iterations, x);
            if (rnorm <= opts.tol * bnorm) break;
            if (omega == 0.0) {
                breakdown = true;
                break;
            }
        }

        // Confirm with the true residual; a drifted recursive residual also
        // triggers a restart, unless the previous pass made no progress.
        const double before = rnorm_pass;
        rnorm = residual(a, b, x, r);
        rnorm_pass = rnorm;
        if (rnorm <= opts.tol * bnorm) break;
        if (breakdown) {
            if (rep.restarts >= opts.max_restarts) break;
            ++rep.restarts;
        } else if (rnorm > 0.5 * before) {
            rep.stagnated = true;
            break;
        }
    }
    rnorm = residual(a, b, x, r);
    rep.residual = rnorm / bnorm;
    rep.converged = rep.residual <= std::max(opts.tol, rep.stagnated ? opts.accept_tol : 0.0);
    return rep;
}

}  // namespace nbm
