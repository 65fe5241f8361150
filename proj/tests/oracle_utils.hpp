// Test-only reference implementations, kept independent of the library code
// paths they check: a Gauss-Jordan dense solver, a Jacobi eigenvalue sweep,
// exact polygon moments via the divergence theorem, and a Monte Carlo area
// estimator.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "dgife/geometry.hpp"

namespace oracle {

// Gauss-Jordan elimination with partial pivoting; a is row-major n x n.
inline std::vector<double> gauss_jordan_solve(std::vector<double> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (a[piv * n + k] == 0.0) throw std::runtime_error("gauss_jordan_solve: singular");
        for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
        std::swap(b[k], b[piv]);
        const double d = a[k * n + k];
        for (int j = 0; j < n; ++j) a[k * n + j] /= d;
        b[k] /= d;
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            const double f = a[i * n + k];
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
            b[i] -= f * b[k];
        }
    }
    return b;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = a[i * n + i];
    return eig;
}

// Coefficients of (a + b t)^n.
inline std::vector<double> linear_power(double a, double b, int n) {
    std::vector<double> c{1.0};
    for (int k = 0; k < n; ++k) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i] * a;
            next[i + 1] += c[i] * b;
        }
        c = std::move(next);
    }
    return c;
}

// Exact integral of x^p y^q over a counterclockwise polygon:
// int x^p y^q dA = (1/(p+1)) oint x^(p+1) y^q dy, each edge integrated in
// closed form through the monomial antiderivatives of t.
inline double polygon_moment(const dgife::Polygon& poly, int p, int q) {
    double total = 0.0;
    const int n = static_cast<int>(poly.v.size());
    for (int e = 0; e < n; ++e) {
        const dgife::Vec2 a = poly.v[e];
        const dgife::Vec2 b = poly.v[(e + 1) % n];
        const std::vector<double> xs = linear_power(a.x, b.x - a.x, p + 1);
        const std::vector<double> ys = linear_power(a.y, b.y - a.y, q);
        std::vector<double> prod(xs.size() + ys.size() - 1, 0.0);
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < ys.size(); ++j) prod[i + j] += xs[i] * ys[j];
        double edge = 0.0;
        for (std::size_t k = 0; k < prod.size(); ++k) edge += prod[k] / (k + 1.0);
        total += edge * (b.y - a.y);
    }
    return total / (p + 1.0);
}

// Monte Carlo estimate of the area where the level set is negative inside an
// axis-aligned box.
inline double monte_carlo_minus_area(const dgife::InterfaceCurve& curve, dgife::Vec2 lo,
                                     dgife::Vec2 hi, int samples, unsigned seed = 42) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
    long hits = 0;
    for (int i = 0; i < samples; ++i)
        if (curve({ux(rng), uy(rng)}) < 0.0) ++hits;
    return (hi.x - lo.x) * (hi.y - lo.y) * static_cast<double>(hits) / samples;
}

}  // namespace oracle
