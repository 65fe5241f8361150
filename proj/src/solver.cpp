#include "dgife/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dgife {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::vector<double> residual(const CsrMatrix& a, std::span<const double> rhs,
                             std::span<const double> x) {
    std::vector<double> r(a.n);
    a.multiply(x, r);
    for (int i = 0; i < a.n; ++i) r[i] = rhs[i] - r[i];
    return r;
}

// preconditioner: identity, inverse diagonal, or inverted aligned diagonal
// blocks
struct Precond {
    int block = 1;
    std::vector<double> inv;   // diagonal entries, or per-block row-major inverses

    void apply(std::span<const double> r, std::span<double> z) const {
        const int n = static_cast<int>(r.size());
        if (block == 1) {
            for (int i = 0; i < n; ++i) z[i] = inv[i] * r[i];
            return;
        }
        for (int b = 0; b < n / block; ++b) {
            const double* m = inv.data() + static_cast<std::size_t>(b) * block * block;
            for (int i = 0; i < block; ++i) {
                double s = 0.0;
                for (int j = 0; j < block; ++j) s += m[i * block + j] * r[b * block + j];
                z[b * block + i] = s;
            }
        }
    }
};

Precond make_precond(const CsrMatrix& a, const SolverConfig& cfg) {
    Precond pre;
    if (cfg.preconditioner == Preconditioner::None ||
        (cfg.preconditioner == Preconditioner::ElementBlock && a.n % cfg.block_size != 0)) {
        pre.inv.assign(a.n, 1.0);
        return pre;
    }
    if (cfg.preconditioner == Preconditioner::Diagonal) {
        pre.inv.assign(a.n, 1.0);
        const std::vector<double> d = a.diagonal();
        for (int i = 0; i < a.n; ++i)
            if (d[i] != 0.0) pre.inv[i] = 1.0 / d[i];
        return pre;
    }
    const int bs = cfg.block_size;
    pre.block = bs;
    const int nb = a.n / bs;
    pre.inv.assign(static_cast<std::size_t>(nb) * bs * bs, 0.0);
    std::vector<double> work(static_cast<std::size_t>(bs) * 2 * bs);
    for (int b = 0; b < nb; ++b) {
        // gather the block and invert by Gauss-Jordan with pivoting;
        // singular blocks fall back to diagonal scaling
        std::fill(work.begin(), work.end(), 0.0);
        for (int i = 0; i < bs; ++i) {
            const int row = b * bs + i;
            for (int k = a.row_ptr[row]; k < a.row_ptr[row + 1]; ++k) {
                const int c = a.col[k] - b * bs;
                if (c >= 0 && c < bs) work[i * 2 * bs + c] = a.val[k];
            }
            work[i * 2 * bs + bs + i] = 1.0;
        }
        bool singular = false;
        for (int k = 0; k < bs && !singular; ++k) {
            int piv = k;
            for (int i = k + 1; i < bs; ++i)
                if (std::abs(work[i * 2 * bs + k]) > std::abs(work[piv * 2 * bs + k])) piv = i;
            if (work[piv * 2 * bs + k] == 0.0) {
                singular = true;
                break;
            }
            for (int j = 0; j < 2 * bs; ++j) std::swap(work[k * 2 * bs + j], work[piv * 2 * bs + j]);
            const double d = work[k * 2 * bs + k];
            for (int j = 0; j < 2 * bs; ++j) work[k * 2 * bs + j] /= d;
            for (int i = 0; i < bs; ++i) {
                if (i == k) continue;
                const double f = work[i * 2 * bs + k];
                if (f == 0.0) continue;
                for (int j = 0; j < 2 * bs; ++j) work[i * 2 * bs + j] -= f * work[k * 2 * bs + j];
            }
        }
        double* m = pre.inv.data() + static_cast<std::size_t>(b) * bs * bs;
        if (singular) {
            for (int i = 0; i < bs; ++i) {
                const double d = a.entry(b * bs + i, b * bs + i);
                m[i * bs + i] = d != 0.0 ? 1.0 / d : 1.0;
            }
        } else {
            for (int i = 0; i < bs; ++i)
                for (int j = 0; j < bs; ++j) m[i * bs + j] = work[i * 2 * bs + bs + j];
        }
    }
    return pre;
}

// attainable-residual floor: rounding limits ||b - A x|| to about
// eps * ||A|| * ||x|| no matter how many iterations run
double residual_floor(const CsrMatrix& a, std::span<const double> x) {
    double nx = 0.0;
    for (double v : x) nx += v * v;
    return a.n * std::numeric_limits<double>::epsilon() * a.max_abs() * std::sqrt(nx);
}

SolveResult solve_dense(const CsrMatrix& a, std::span<const double> rhs) {
    const int n = a.n;
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            m[static_cast<std::size_t>(i) * n + a.col[k]] = a.val[k];

    std::vector<double> x(rhs.begin(), rhs.end());
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m[static_cast<std::size_t>(i) * n + k]) >
                std::abs(m[static_cast<std::size_t>(p) * n + k]))
                p = i;
        if (m[static_cast<std::size_t>(p) * n + k] == 0.0)
            throw SolverFailure("dense solve: singular matrix", {});
        if (p != k) {
            for (int j = 0; j < n; ++j)
                std::swap(m[static_cast<std::size_t>(k) * n + j],
                          m[static_cast<std::size_t>(p) * n + j]);
            std::swap(x[k], x[p]);
        }
        const double pivot = m[static_cast<std::size_t>(k) * n + k];
        for (int i = k + 1; i < n; ++i) {
            const double f = m[static_cast<std::size_t>(i) * n + k] / pivot;
            if (f == 0.0) continue;
            for (int j = k; j < n; ++j)
                m[static_cast<std::size_t>(i) * n + j] -= f * m[static_cast<std::size_t>(k) * n + j];
            x[i] -= f * x[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= m[static_cast<std::size_t>(i) * n + j] * x[j];
        x[i] /= m[static_cast<std::size_t>(i) * n + i];
    }

    SolveResult result{std::move(x), {}};
    result.report.method = SolverMethod::Dense;
    const double rn = norm2(rhs);
    result.report.relative_residual =
        rn > 0.0 ? norm2(residual(a, rhs, result.x)) / rn : 0.0;
    return result;
}

SolveResult solve_cg(const CsrMatrix& a, std::span<const double> rhs, const SolverConfig& cfg,
                     std::span<const double> x0) {
    const int n = a.n;
    const int max_it = cfg.max_iterations > 0 ? cfg.max_iterations : 10 * n;
    const Precond pre = make_precond(a, cfg);
    const double norm_b = norm2(rhs);
    std::vector<double> x(n, 0.0);
    if (!x0.empty()) x.assign(x0.begin(), x0.end());
    if (norm_b == 0.0)
        return {std::vector<double>(n, 0.0), {0, 0.0, SolverMethod::ConjugateGradient}};

    const double tol = cfg.rel_tol * norm_b;
    std::vector<double> history;
    std::vector<double> r(n), z(n), p(n), ap(n);
    int it = 0;
    double rnorm = 0.0;
    // restart loop: the recurrence residual can drift from the true one, so
    // re-seed from b - A x and continue until the true residual passes
    for (int attempt = 0; attempt < 3 && it < max_it; ++attempt) {
        r = residual(a, rhs, x);
        pre.apply(r, z);
        p = z;
        double rz = dot(r, z);
        rnorm = norm2(r);
        history.push_back(rnorm);
        while (rnorm > tol && it < max_it) {
            a.multiply(p, ap);
            const double pap = dot(p, ap);
            if (pap == 0.0) break;
            const double alpha = rz / pap;
            for (int i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            pre.apply(r, z);
            const double rz_next = dot(r, z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
            rnorm = norm2(r);
            history.push_back(rnorm);
            ++it;
        }
        rnorm = norm2(residual(a, rhs, x));
        if (rnorm <= std::max(tol, residual_floor(a, x)))
            return {std::move(x), {it, rnorm / norm_b, SolverMethod::ConjugateGradient}};
    }
    throw SolverFailure("conjugate gradient did not converge: residual " +
                            std::to_string(rnorm / norm_b) + " after " + std::to_string(it) +
                            " iterations",
                        std::move(history));
}

SolveResult solve_bicgstab(const CsrMatrix& a, std::span<const double> rhs,
                           const SolverConfig& cfg, std::span<const double> x0) {
    const int n = a.n;
    const int max_it = cfg.max_iterations > 0 ? cfg.max_iterations : 10 * n;
    const Precond pre = make_precond(a, cfg);
    const double norm_b = norm2(rhs);
    std::vector<double> x(n, 0.0);
    if (!x0.empty()) x.assign(x0.begin(), x0.end());
    if (norm_b == 0.0) return {std::vector<double>(n, 0.0), {0, 0.0, SolverMethod::BiCgStab}};

    const double tol = cfg.rel_tol * norm_b;
    std::vector<double> history;
    std::vector<double> r(n), rt(n), p(n), v(n), y(n), z(n), s(n), t(n);
    std::vector<double> best_x = x;
    double best_rnorm = std::numeric_limits<double>::infinity();
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    double rnorm = 0.0;
    int it = 0;
    bool restart = true;
    while (it < max_it) {
        if (restart) {
            // (re)seed from the best iterate seen so far
            x = best_x;
            r = residual(a, rhs, x);
            rt = r;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            rho = alpha = omega = 1.0;
            rnorm = norm2(r);
            history.push_back(rnorm);
            if (std::isfinite(rnorm) && rnorm < best_rnorm) best_rnorm = rnorm;
            if (rnorm <= std::max(tol, residual_floor(a, x))) break;
            restart = false;
        }
        const double rho_next = dot(rt, r);
        const double beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        pre.apply(p, y);
        a.multiply(y, v);
        const double rtv = dot(rt, v);
        // near-breakdown of the biorthogonality scalars: restart
        if (!std::isfinite(beta) || !std::isfinite(rtv) ||
            std::abs(rtv) <= 1e-290 * std::max(1.0, std::abs(rho))) {
            ++it;
            restart = true;
            continue;
        }
        alpha = rho / rtv;
        for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        const double snorm = norm2(s);
        if (snorm <= tol) {
            // recurrence converged at the half step: verify the true residual
            for (int i = 0; i < n; ++i) x[i] += alpha * y[i];
            history.push_back(snorm);
            ++it;
            rnorm = norm2(residual(a, rhs, x));
            if (std::isfinite(rnorm) && rnorm < best_rnorm) {
                best_rnorm = rnorm;
                best_x = x;
            }
            if (rnorm <= std::max(tol, residual_floor(a, x))) break;
            restart = true;
            continue;
        }
        pre.apply(s, z);
        a.multiply(z, t);
        const double tt = dot(t, t);
        omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = norm2(r);
        history.push_back(rnorm);
        ++it;
        if (!std::isfinite(rnorm) || omega == 0.0) {
            restart = true;
            continue;
        }
        if (rnorm < best_rnorm) {
            best_rnorm = rnorm;
            best_x = x;
        }
        if (rnorm <= tol) {
            // verify against the true residual before accepting
            rnorm = norm2(residual(a, rhs, x));
            if (std::isfinite(rnorm) && rnorm < best_rnorm) {
                best_rnorm = rnorm;
                best_x = x;
            }
            if (rnorm <= std::max(tol, residual_floor(a, x))) break;
            restart = true;
        }
    }
    if (!std::isfinite(norm2(x))) x = best_x;
    rnorm = norm2(residual(a, rhs, x));
    {
        const double best_true = norm2(residual(a, rhs, best_x));
        if (!(rnorm <= best_true)) {
            x = best_x;
            rnorm = best_true;
        }
    }
    if (!(rnorm <= std::max(tol, residual_floor(a, x))))
        throw SolverFailure("BiCGStab did not converge: residual " +
                                std::to_string(rnorm / norm_b) + " after " + std::to_string(it) +
                                " iterations",
                            std::move(history));
    return {std::move(x), {it, rnorm / norm_b, SolverMethod::BiCgStab}};
}

}  // namespace

SolveResult solve(const CsrMatrix& a, std::span<const double> rhs, const SolverConfig& config,
                  std::span<const double> initial_guess) {
    config.validate();
    if (a.n != static_cast<int>(rhs.size()))
        throw std::invalid_argument("solve: dimension mismatch");
    if (!initial_guess.empty() && initial_guess.size() != rhs.size())
        throw std::invalid_argument("solve: initial guess dimension mismatch");

    switch (config.method) {
        case SolverMethod::Dense:
            return solve_dense(a, rhs);
        case SolverMethod::ConjugateGradient: {
            const double scale = a.max_abs();
            if (scale > 0.0 && a.symmetry_defect() > 1e-8 * scale)
                throw std::invalid_argument(
                    "solve: conjugate gradient configured for a nonsymmetric matrix");
            return solve_cg(a, rhs, config, initial_guess);
        }
        case SolverMethod::BiCgStab:
            return solve_bicgstab(a, rhs, config, initial_guess);
        case SolverMethod::BandedDirect: {
            const BandedFactorization lu(a);
            SolveResult result{lu.solve(rhs), {}};
            result.report.method = SolverMethod::BandedDirect;
            const double nb = norm2(rhs);
            result.report.relative_residual =
                nb > 0.0 ? norm2(residual(a, rhs, result.x)) / nb : 0.0;
            return result;
        }
    }
    throw std::invalid_argument("solve: unknown method");
}

BandedFactorization::BandedFactorization(const CsrMatrix& a) {
    n_ = a.n;
    int band = 0;
    for (int i = 0; i < a.n; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            band = std::max(band, std::abs(i - a.col[k]));
    kl_ = ku_ = band;
    ldab_ = 2 * kl_ + ku_ + 1;
    ab_.assign(static_cast<std::size_t>(ldab_) * n_, 0.0);
    piv_.resize(n_);

    // A(i,j) lives at ab[j*ldab + kl + ku + i - j]
    const auto at = [&](int i, int j) -> double& {
        return ab_[static_cast<std::size_t>(j) * ldab_ + kl_ + ku_ + i - j];
    };
    for (int i = 0; i < n_; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) at(i, a.col[k]) = a.val[k];

    for (int j = 0; j < n_; ++j) {
        const int last_row = std::min(j + kl_, n_ - 1);
        int p = j;
        for (int i = j + 1; i <= last_row; ++i)
            if (std::abs(at(i, j)) > std::abs(at(p, j))) p = i;
        piv_[j] = p;
        if (at(p, j) == 0.0)
            throw SolverFailure("banded factorization: singular matrix at column " +
                                    std::to_string(j),
                                {});
        const int last_col = std::min(j + kl_ + ku_, n_ - 1);
        if (p != j)
            for (int c = j; c <= last_col; ++c) std::swap(at(j, c), at(p, c));
        const double pivot = at(j, j);
        const double inv_pivot = 1.0 / pivot;
        double* mult = &at(j + 1, j);   // multiplier column, contiguous in i
        const int nrows = last_row - j;
        for (int i = 0; i < nrows; ++i) mult[i] *= inv_pivot;
        // rank-one update, column by column so the row runs are contiguous
        for (int c = j + 1; c <= last_col; ++c) {
            const double ujc = at(j, c);
            if (ujc == 0.0) continue;
            double* col = &at(j + 1, c);
            for (int i = 0; i < nrows; ++i) col[i] -= mult[i] * ujc;
        }
    }
}

std::vector<double> BandedFactorization::solve(std::span<const double> rhs) const {
    if (static_cast<int>(rhs.size()) != n_)
        throw std::invalid_argument("BandedFactorization::solve: dimension mismatch");
    std::vector<double> x(rhs.begin(), rhs.end());
    const auto at = [&](int i, int j) -> double {
        return ab_[static_cast<std::size_t>(j) * ldab_ + kl_ + ku_ + i - j];
    };
    for (int j = 0; j < n_; ++j) {
        if (piv_[j] != j) std::swap(x[j], x[piv_[j]]);
        const int last_row = std::min(j + kl_, n_ - 1);
        const double xj = x[j];
        if (xj == 0.0) continue;
        for (int i = j + 1; i <= last_row; ++i) x[i] -= at(i, j) * xj;
    }
    // back substitution column-wise: row runs of U are contiguous
    for (int j = n_ - 1; j >= 0; --j) {
        x[j] /= at(j, j);
        const double xj = x[j];
        if (xj == 0.0) continue;
        const int first_row = std::max(0, j - kl_ - ku_);
        for (int i = first_row; i < j; ++i) x[i] -= at(i, j) * xj;
    }
    return x;
}

}  // namespace dgife
