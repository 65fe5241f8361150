#include <doctest.h>

#include <random>

#include "dgife/ife_basis.hpp"
#include "dgife/problems.hpp"
#include "dgife/quadrature.hpp"
#include "oracle_utils.hpp"

using namespace dgife;

namespace {

Element unit_square_element() {
    Element el;
    el.id = 0;
    el.n_nodes = 4;
    el.nodes = {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
    el.origin = {0, 0};
    el.hx = el.hy = 1.0;
    return el;
}

// Chord cut of an element through two boundary points, with a linear level
// set negative on the side of `minus_probe`.
CutGeometry make_cut(const Element& el, Vec2 D, Vec2 E, Vec2 minus_probe) {
    Vec2 n = (E - D).perp().normalized();
    if (n.dot(minus_probe - D) > 0.0) n = n * -1.0;
    const InterfaceCurve line([D, n](Vec2 p) { return (p - D).dot(n); }, 1.0);
    CutGeometry cut;
    cut.element = el.id;
    cut.D = D;
    cut.E = E;
    std::tie(cut.minus_poly, cut.plus_poly) = subpolygons(el, D, E, line);
    cut.area_minus = cut.minus_poly.area();
    cut.area_plus = cut.plus_poly.area();
    cut.chord_length = (E - D).norm();
    cut.chord_normal = n;
    return cut;
}

double weak_flux_defect(const Element& el, const LocalBasis& basis, const CutGeometry& cut,
                        double bm, double bp, int i) {
    // 2-point Gauss along the chord; the integrand is linear there
    const SegmentRule seg = gauss_segment(2);
    double acc = 0.0;
    for (std::size_t g = 0; g < seg.x.size(); ++g) {
        const Vec2 p = cut.D + seg.x[g] * (cut.E - cut.D);
        const Vec2 q = el.to_local(p);
        const Vec2 gm = basis.piece(i, Side::Minus).grad_local(q);
        const Vec2 gp = basis.piece(i, Side::Plus).grad_local(q);
        const Vec2 gmg{gm.x / el.hx, gm.y / el.hy};
        const Vec2 gpg{gp.x / el.hx, gp.y / el.hy};
        acc += seg.w[g] * cut.chord_length * (bp * gpg - bm * gmg).dot(cut.chord_normal);
    }
    return std::abs(acc);
}

void check_basis_invariants(const Element& el, const LocalBasis& basis, const CutGeometry& cut,
                            double bm, double bp) {
    // Lagrange property
    for (int i = 0; i < el.n_nodes; ++i)
        for (int j = 0; j < el.n_nodes; ++j) {
            const Vec2 q = el.to_local(el.nodes[j]);
            const double v = basis.piece(i, basis.side_at_local(q)).value(q);
            CHECK(v == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
        }
    // continuity at chord endpoints
    for (const Vec2 p : {cut.D, cut.E}) {
        const Vec2 q = el.to_local(p);
        for (int i = 0; i < el.n_nodes; ++i)
            CHECK(basis.piece(i, Side::Minus).value(q) ==
                  doctest::Approx(basis.piece(i, Side::Plus).value(q)).epsilon(1e-10));
    }
    // partition of unity on both pieces
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int s = 0; s < 25; ++s) {
        Vec2 q{unif(rng), unif(rng)};
        if (el.is_triangle() && q.x + q.y > 1.0) q = {1.0 - q.x, 1.0 - q.y};
        for (const Side side : {Side::Minus, Side::Plus}) {
            double sum = 0.0;
            for (int i = 0; i < el.n_nodes; ++i) sum += basis.piece(i, side).value(q);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    // weak flux condition
    for (int i = 0; i < el.n_nodes; ++i)
        CHECK(weak_flux_defect(el, basis, cut, bm, bp, i) <= 1e-10);
    if (el.n_nodes == 4)
        for (int i = 0; i < 4; ++i)
            CHECK(basis.minus[i].c[3] == doctest::Approx(basis.plus[i].c[3]).epsilon(1e-12));
}

}  // namespace

TEST_CASE("standard bilinear basis on the unit square") {
    const Element el = unit_square_element();
    const LocalBasis basis = build_standard_basis(el);

    std::array<double, 4> val{};
    std::array<Vec2, 4> grad{};
    eval_basis(basis, el, {0.0, 0.0}, std::nullopt, val, grad);
    CHECK(val[0] == doctest::Approx(1.0).epsilon(1e-14));
    eval_basis(basis, el, {1.0, 1.0}, std::nullopt, val, grad);
    CHECK(val[0] == doctest::Approx(0.0).epsilon(1e-14));

    eval_basis(basis, el, {0.5, 0.5}, std::nullopt, val, grad);
    CHECK(grad[0].x == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(grad[0].y == doctest::Approx(-0.5).epsilon(1e-14));

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int s = 0; s < 25; ++s) {
        eval_basis(basis, el, {unif(rng), unif(rng)}, std::nullopt, val, grad);
        CHECK(val[0] + val[1] + val[2] + val[3] == doctest::Approx(1.0).epsilon(1e-14));
    }

    CHECK_THROWS_AS(eval_basis(basis, el, {2.0, 0.0}, std::nullopt, val, grad),
                    std::invalid_argument);
}

TEST_CASE("corner-cut immersed basis matches the dense oracle") {
    const Element el = unit_square_element();
    const CutGeometry cut = make_cut(el, {0.5, 0.0}, {0.0, 0.5}, {0.0, 0.0});
    const double bm = 1.0, bp = 10.0;
    const LocalBasis basis = build_ife_basis(el, cut, bm, bp);

    // independently assembled 8x8 system, Gauss-Jordan solve; the flux
    // condition uses the (equivalent) chord midpoint form
    std::vector<double> A(64, 0.0);
    const auto row = [&](int r, std::initializer_list<double> vals) {
        int j = 0;
        for (double v : vals) A[r * 8 + j++] = v;
    };
    row(0, {1, 0, 0, 0, 0, 0, 0, 0});
    row(1, {0, 0, 0, 0, 1, 1, 0, 0});
    row(2, {0, 0, 0, 0, 1, 1, 1, 1});
    row(3, {0, 0, 0, 0, 1, 0, 1, 0});
    row(4, {1, 0.5, 0, 0, -1, -0.5, 0, 0});
    row(5, {1, 0, 0.5, 0, -1, 0, -0.5, 0});
    row(6, {0, 0, 0, 1, 0, 0, 0, -1});
    row(7, {0, bm, bm, bm * 0.5, 0, -bp, -bp, -bp * 0.5});

    for (int i = 0; i < 4; ++i) {
        std::vector<double> rhs(8, 0.0);
        rhs[i] = 1.0;
        const std::vector<double> x = oracle::gauss_jordan_solve(A, rhs);
        for (int k = 0; k < 4; ++k) {
            CHECK(basis.minus[i].c[k] == doctest::Approx(x[k]).epsilon(1e-10));
            CHECK(basis.plus[i].c[k] == doctest::Approx(x[4 + k]).epsilon(1e-10));
        }
    }
    check_basis_invariants(el, basis, cut, bm, bp);

    // frozen regression value from the oracle solve
    CHECK(basis.piece(0, Side::Minus).value({0.25, 0.25}) ==
          doctest::Approx(0.128571428571429).epsilon(1e-12));

    // on-chord evaluation: values agree across the side hint, the
    // tangential gradient component is continuous, the normal one jumps
    const Vec2 mid{0.25, 0.25};
    std::array<double, 4> vm{}, vp{};
    std::array<Vec2, 4> gm{}, gp{};
    eval_basis(basis, el, mid, Side::Minus, vm, gm);
    eval_basis(basis, el, mid, Side::Plus, vp, gp);
    const Vec2 tangent = (cut.E - cut.D).normalized();
    for (int i = 0; i < 4; ++i) {
        CHECK(vm[i] == doctest::Approx(vp[i]).epsilon(1e-10));
        CHECK((gm[i] - gp[i]).dot(tangent) == doctest::Approx(0.0).epsilon(1e-10));
    }
    CHECK(std::abs((gm[0] - gp[0]).dot(cut.chord_normal)) > 1e-3);
}

TEST_CASE("immersed basis degenerates to the standard one for equal coefficients") {
    const Element el = unit_square_element();
    const CutGeometry cut = make_cut(el, {0.5, 0.0}, {0.0, 0.5}, {0.0, 0.0});
    const LocalBasis ife = build_ife_basis(el, cut, 3.5, 3.5);
    const LocalBasis std_basis = build_standard_basis(el);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            CHECK(ife.minus[i].c[k] == doctest::Approx(std_basis.minus[i].c[k]).epsilon(1e-10));
            CHECK(ife.plus[i].c[k] == doctest::Approx(std_basis.minus[i].c[k]).epsilon(1e-10));
        }
}

TEST_CASE("immersed basis is scale covariant") {
    const Element ref = unit_square_element();
    const CutGeometry ref_cut = make_cut(ref, {0.5, 0.0}, {0.0, 0.5}, {0.0, 0.0});
    const LocalBasis ref_basis = build_ife_basis(ref, ref_cut, 1.0, 10.0);

    const double h = 0.01;
    Element el;
    el.id = 0;
    el.n_nodes = 4;
    el.nodes = {Vec2{0, 0}, Vec2{h, 0}, Vec2{h, h}, Vec2{0, h}};
    el.origin = {0, 0};
    el.hx = el.hy = h;
    const CutGeometry cut = make_cut(el, {0.5 * h, 0.0}, {0.0, 0.5 * h}, {0.0, 0.0});
    const LocalBasis basis = build_ife_basis(el, cut, 1.0, 10.0);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::array<double, 4> v_ref{}, v{};
    std::array<Vec2, 4> g_ref{}, g{};
    for (int s = 0; s < 20; ++s) {
        const Vec2 q{unif(rng), unif(rng)};
        eval_basis(ref_basis, ref, q, std::nullopt, v_ref, g_ref);
        eval_basis(basis, el, {q.x * h, q.y * h}, std::nullopt, v, g);
        for (int i = 0; i < 4; ++i) {
            CHECK(v[i] == doctest::Approx(v_ref[i]).epsilon(1e-11));
            CHECK(g[i].x == doctest::Approx(g_ref[i].x / h).epsilon(1e-10));
            CHECK(g[i].y == doctest::Approx(g_ref[i].y / h).epsilon(1e-10));
        }
    }
}

TEST_CASE("random cut configurations satisfy all basis invariants") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    std::uniform_int_distribution<int> edge_pick(0, 3);
    std::uniform_real_distribution<double> log_beta(-2.0, 2.0);
    const Element el = unit_square_element();

    const auto edge_point = [&](int edge, double t) -> Vec2 {
        const Vec2 a = el.nodes[edge];
        const Vec2 b = el.nodes[(edge + 1) % 4];
        return a + t * (b - a);
    };

    for (int trial = 0; trial < 60; ++trial) {
        int e1 = edge_pick(rng), e2 = edge_pick(rng);
        while (e2 == e1) e2 = edge_pick(rng);
        const Vec2 D = edge_point(e1, unif(rng));
        const Vec2 E = edge_point(e2, unif(rng));
        const CutGeometry cut = make_cut(el, D, E, 0.5 * (D + E) + 0.1 * (E - D).perp());
        const double bm = std::pow(10.0, log_beta(rng));
        const double bp = std::pow(10.0, log_beta(rng));
        const LocalBasis basis = build_ife_basis(el, cut, bm, bp);
        check_basis_invariants(el, basis, cut, bm, bp);
    }
}

TEST_CASE("triangle immersed basis satisfies the pointwise flux condition") {
    Element el;
    el.id = 0;
    el.n_nodes = 3;
    el.nodes = {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{}};
    el.origin = {0, 0};
    el.hx = el.hy = 1.0;

    const CutGeometry cut = make_cut(el, {0.5, 0.0}, {1.0, 0.5}, {1.0, 0.25});
    const double bm = 5.0, bp = 1.0;
    const LocalBasis basis = build_ife_basis(el, cut, bm, bp);
    check_basis_invariants(el, basis, cut, bm, bp);
    // constant gradients: the flux matches pointwise
    for (int i = 0; i < 3; ++i) {
        const Vec2 gm = basis.piece(i, Side::Minus).grad_local({0.3, 0.1});
        const Vec2 gp = basis.piece(i, Side::Plus).grad_local({0.9, 0.5});
        CHECK((bm * gm - bp * gp).dot(cut.chord_normal) == doctest::Approx(0.0).epsilon(1e-10));
    }
}

TEST_CASE("degenerate chord raises a construction failure") {
    const Element el = unit_square_element();
    CutGeometry cut = make_cut(el, {0.5, 0.0}, {0.0, 0.5}, {0.0, 0.0});
    cut.E = cut.D;   // identical continuity rows make the system singular
    CHECK_THROWS_AS(build_ife_basis(el, cut, 1.0, 10.0), IfeConstructionFailure);
}

TEST_CASE("basis table covers the benchmark mesh with Lagrange bases") {
    const ProblemSpec problem = make_example("1");
    const CartesianMesh mesh = build_mesh(Domain::unit_square(), 10);
    const Classification cls = classify_elements(mesh, problem.curve());
    const BasisTable bases =
        BasisTable::build(mesh, cls, problem.beta().minus, problem.beta().plus);

    const DofMap dofs = bases.dof_map();
    CHECK(dofs.total() == 400);
    CHECK(dofs.global(3, 2) == 14);
    CHECK(dofs.element_of(14) == 3);
    CHECK(dofs.local_of(14) == 2);

    std::array<double, 4> val{};
    std::array<Vec2, 4> grad{};
    for (const Element& el : mesh.elements)
        for (int j = 0; j < el.n_nodes; ++j) {
            bases.eval(el, el.nodes[j], bases.side_at(el, el.nodes[j]), val, grad);
            for (int i = 0; i < el.n_nodes; ++i)
                CHECK(val[i] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
        }

    // weak flux defect on every interface element of the mesh
    for (const Element& el : mesh.elements) {
        if (!cls.is_interface(el.id)) continue;
        const CutGeometry& cut = cls.cut(el.id);
        for (int i = 0; i < el.n_nodes; ++i)
            CHECK(weak_flux_defect(el, bases[el.id], cut, problem.beta().minus,
                                   problem.beta().plus, i) <= 1e-10);
    }
}
