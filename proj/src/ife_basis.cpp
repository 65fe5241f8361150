#include "dgife/ife_basis.hpp"

#include <algorithm>
#include <cmath>

#include "dgife/quadrature.hpp"

namespace dgife {

namespace {

constexpr double kConditionLimit = 1e12;

// Dense LU with partial pivoting for the tiny local systems (n <= 8).
// Factorizes in place; solves multiple right-hand sides.
struct SmallLu {
    static constexpr int kMax = 8;
    int n = 0;
    std::array<std::array<double, kMax>, kMax> a{};
    std::array<int, kMax> perm{};
    bool singular = false;

    void factorize() {
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int k = 0; k < n; ++k) {
            int piv = k;
            for (int i = k + 1; i < n; ++i)
                if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
            if (a[piv][k] == 0.0) {
                singular = true;
                return;
            }
            std::swap(a[k], a[piv]);
            std::swap(perm[k], perm[piv]);
            for (int i = k + 1; i < n; ++i) {
                a[i][k] /= a[k][k];
                for (int j = k + 1; j < n; ++j) a[i][j] -= a[i][k] * a[k][j];
            }
        }
    }

    void solve(const std::array<double, kMax>& b, std::array<double, kMax>& x) const {
        std::array<double, kMax> y{};
        for (int i = 0; i < n; ++i) {
            y[i] = b[perm[i]];
            for (int j = 0; j < i; ++j) y[i] -= a[i][j] * y[j];
        }
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) y[i] -= a[i][j] * x[j];
            x[i] = y[i] / a[i][i];
        }
    }

    // 1-norm condition estimate via the explicit inverse (n is tiny).
    double condition(const std::array<std::array<double, kMax>, kMax>& orig) const {
        double norm_a = 0.0, norm_inv = 0.0;
        for (int j = 0; j < n; ++j) {
            double col = 0.0;
            for (int i = 0; i < n; ++i) col += std::abs(orig[i][j]);
            norm_a = std::max(norm_a, col);
        }
        for (int j = 0; j < n; ++j) {
            std::array<double, kMax> e{}, x{};
            e[j] = 1.0;
            solve(e, x);
            double col = 0.0;
            for (int i = 0; i < n; ++i) col += std::abs(x[i]);
            norm_inv = std::max(norm_inv, col);
        }
        return norm_a * norm_inv;
    }
};

std::array<Vec2, 4> local_nodes(const Element& el) {
    std::array<Vec2, 4> q{};
    for (int i = 0; i < el.n_nodes; ++i) q[i] = el.to_local(el.nodes[i]);
    return q;
}

}  // namespace

LocalBasis build_standard_basis(const Element& el) {
    LocalBasis basis;
    basis.n_funcs = el.n_nodes;
    basis.interface = false;

    const auto q = local_nodes(el);
    const int n = el.n_nodes;

    // Nodal Vandermonde solve in local coordinates; one right-hand side per
    // basis function.
    SmallLu lu;
    lu.n = n;
    for (int i = 0; i < n; ++i) {
        lu.a[i][0] = 1.0;
        lu.a[i][1] = q[i].x;
        lu.a[i][2] = q[i].y;
        if (n == 4) lu.a[i][3] = q[i].x * q[i].y;
    }
    lu.factorize();
    for (int i = 0; i < n; ++i) {
        std::array<double, SmallLu::kMax> rhs{}, sol{};
        rhs[i] = 1.0;
        lu.solve(rhs, sol);
        LocalBasis::Piece piece;
        for (int k = 0; k < n; ++k) piece.c[k] = sol[k];
        basis.minus[i] = piece;
        basis.plus[i] = piece;
    }
    return basis;
}

LocalBasis build_ife_basis(const Element& el, const CutGeometry& cut, double beta_minus,
                           double beta_plus) {
    if (!(beta_minus > 0.0) || !(beta_plus > 0.0))
        throw std::invalid_argument("build_ife_basis: coefficients must be positive");

    LocalBasis basis;
    basis.n_funcs = el.n_nodes;
    basis.interface = true;

    const Vec2 Dl = el.to_local(cut.D);
    const Vec2 El = el.to_local(cut.E);
    basis.chord_point_loc = Dl;
    // The chord normal transforms covariantly under the anisotropic local
    // map; recompute it from the local chord direction and orient it with
    // the global one.
    Vec2 nl = (El - Dl).perp().normalized();
    if ((nl.x * cut.chord_normal.x) * el.hx + (nl.y * cut.chord_normal.y) * el.hy < 0.0)
        nl = nl * -1.0;
    basis.chord_normal_loc = nl;

    const int d = el.n_nodes;          // 3 or 4
    const int m = 2 * d;               // local unknowns: minus piece then plus piece
    const bool rect = d == 4;

    const auto q = local_nodes(el);

    SmallLu lu;
    lu.n = m;
    std::array<std::array<double, SmallLu::kMax>, SmallLu::kMax> rows{};
    int r = 0;

    // Nodal conditions, applied to the piece containing each node.
    for (int i = 0; i < d; ++i) {
        const bool plus_side = basis.side_at_local(q[i]) == Side::Plus;
        const int off = plus_side ? d : 0;
        rows[r][off + 0] = 1.0;
        rows[r][off + 1] = q[i].x;
        rows[r][off + 2] = q[i].y;
        if (rect) rows[r][off + 3] = q[i].x * q[i].y;
        ++r;
    }
    // Value continuity at the chord endpoints.
    for (const Vec2& p : {Dl, El}) {
        rows[r][0] = 1.0;
        rows[r][1] = p.x;
        rows[r][2] = p.y;
        if (rect) rows[r][3] = p.x * p.y;
        rows[r][d + 0] = -1.0;
        rows[r][d + 1] = -p.x;
        rows[r][d + 2] = -p.y;
        if (rect) rows[r][d + 3] = -p.x * p.y;
        ++r;
    }
    if (rect) {
        // Matching bilinear coefficient across the chord.
        rows[r][3] = 1.0;
        rows[r][d + 3] = -1.0;
        ++r;
    }
    // Flux matching along the chord: integral mean of beta * grad(phi) . n.
    // The integrand is linear along the chord, so two Gauss points are exact;
    // for triangles the gradients are constant and the condition is pointwise.
    {
        const SegmentRule seg = gauss_segment(2);
        const Vec2 n = cut.chord_normal;
        for (std::size_t g = 0; g < seg.x.size(); ++g) {
            const Vec2 p = Dl + seg.x[g] * (El - Dl);
            const double w = seg.w[g];
            // global gradient of the local monomials: d/dx = (1/hx) d/dxi, etc.
            rows[r][1] += beta_minus * w * n.x / el.hx;
            rows[r][2] += beta_minus * w * n.y / el.hy;
            if (rect) rows[r][3] += beta_minus * w * (n.x * p.y / el.hx + n.y * p.x / el.hy);
            rows[r][d + 1] -= beta_plus * w * n.x / el.hx;
            rows[r][d + 2] -= beta_plus * w * n.y / el.hy;
            if (rect) rows[r][d + 3] -= beta_plus * w * (n.x * p.y / el.hx + n.y * p.x / el.hy);
        }
        ++r;
    }

    lu.a = rows;
    lu.factorize();
    if (lu.singular)
        throw IfeConstructionFailure(
            "build_ife_basis: singular local system on element " + std::to_string(el.id) +
                " (chord " + std::to_string(cut.chord_length) + ")",
            el.id);
    const double cond = lu.condition(rows);
    if (!(cond < kConditionLimit))
        throw IfeConstructionFailure(
            "build_ife_basis: ill-conditioned local system on element " + std::to_string(el.id) +
                " (cond ~ " + std::to_string(cond) + ", chord " +
                std::to_string(cut.chord_length) + ")",
            el.id);

    for (int i = 0; i < d; ++i) {
        std::array<double, SmallLu::kMax> rhs{}, sol{};
        rhs[i] = 1.0;
        lu.solve(rhs, sol);
        for (int k = 0; k < d; ++k) {
            basis.minus[i].c[k] = sol[k];
            basis.plus[i].c[k] = sol[d + k];
        }
    }
    return basis;
}

void eval_basis(const LocalBasis& basis, const Element& el, Vec2 p, std::optional<Side> side_hint,
                std::span<double> values, std::span<Vec2> gradients) {
    const Vec2 q = el.to_local(p);
    const double slack = 1e-12;
    if (q.x < -slack || q.x > 1.0 + slack || q.y < -slack || q.y > 1.0 + slack)
        throw std::invalid_argument("eval_basis: point outside the element bounding box");

    Side side = basis.side_at_local(q);
    if (side_hint && basis.interface && std::abs(basis.chord_distance_local(q)) <= 1e-12)
        side = *side_hint;

    for (int i = 0; i < basis.n_funcs; ++i) {
        const LocalBasis::Piece& piece = basis.piece(i, side);
        values[i] = piece.value(q);
        const Vec2 g = piece.grad_local(q);
        gradients[i] = {g.x / el.hx, g.y / el.hy};
    }
}

BasisTable BasisTable::build(const CartesianMesh& mesh, const Classification& cls,
                             double beta_minus, double beta_plus) {
    BasisTable table;
    table.items_.reserve(mesh.n_elements());
    for (const Element& el : mesh.elements) {
        if (cls.is_interface(el.id)) {
            table.items_.push_back(build_ife_basis(el, cls.cut(el.id), beta_minus, beta_plus));
        } else {
            LocalBasis b = build_standard_basis(el);
            b.fixed_side = cls.noninterface_side(el.id);
            table.items_.push_back(std::move(b));
        }
    }
    return table;
}

void BasisTable::eval(const Element& el, Vec2 p, Side side, std::span<double> values,
                      std::span<Vec2> gradients) const {
    const LocalBasis& basis = items_[el.id];
    const Vec2 q = el.to_local(p);
    for (int i = 0; i < basis.n_funcs; ++i) {
        const LocalBasis::Piece& piece = basis.piece(i, side);
        values[i] = piece.value(q);
        const Vec2 g = piece.grad_local(q);
        gradients[i] = {g.x / el.hx, g.y / el.hy};
    }
}

double BasisTable::value(const Element& el, Vec2 p, Side side,
                         std::span<const double> coeffs) const {
    const LocalBasis& basis = items_[el.id];
    const Vec2 q = el.to_local(p);
    double u = 0.0;
    for (int i = 0; i < basis.n_funcs; ++i) u += coeffs[i] * basis.piece(i, side).value(q);
    return u;
}

}  // namespace dgife
