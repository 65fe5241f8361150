#include "dgife/geometry.hpp"

#include <algorithm>
#include <cassert>

namespace dgife {

namespace {

constexpr double kDegenerateChordFactor = 1e-10;   // |DE| threshold, relative to h
constexpr double kDegenerateAreaFactor = 1e-12;    // sub-area threshold, relative to h^2
constexpr int kEdgeSampleIntervals = 16;           // sign-sampling resolution per edge

}  // namespace

CartesianMesh build_mesh(const Domain& domain, int ns, MeshKind kind) {
    if (ns < 2) throw std::invalid_argument("build_mesh: ns must be >= 2");

    CartesianMesh mesh{domain, ns, kind, domain.width() / ns, domain.height() / ns, 0.0, {}, {}};
    mesh.h = mesh.hx;

    const auto vx = [&](int i) { return domain.xmin + i * mesh.hx; };
    const auto vy = [&](int j) { return domain.ymin + j * mesh.hy; };
    const auto cell = [&](int i, int j) { return j * ns + i; };

    // Edge numbering: vertical edges first (column i in [0,ns], row j in
    // [0,ns-1]), then horizontal edges, then (simplex mode) cell diagonals.
    const int n_vert = (ns + 1) * ns;
    const auto vedge = [&](int i, int j) { return i * ns + j; };
    const auto hedge = [&](int i, int j) { return n_vert + j * ns + i; };
    const auto dedge = [&](int i, int j) { return 2 * n_vert + j * ns + i; };

    const bool simplex = kind == MeshKind::Simplex;
    const int elems_per_cell = simplex ? 2 : 1;
    const auto lower = [&](int i, int j) { return elems_per_cell * cell(i, j); };
    const auto upper = [&](int i, int j) { return elems_per_cell * cell(i, j) + 1; };

    mesh.edges.resize(simplex ? 2 * n_vert + ns * ns : 2 * n_vert);

    for (int i = 0; i <= ns; ++i) {
        for (int j = 0; j < ns; ++j) {
            Edge e;
            e.a = {vx(i), vy(j)};
            e.b = {vx(i), vy(j + 1)};
            e.length = mesh.hy;
            if (i == 0) {
                e.elem1 = simplex ? upper(0, j) : cell(0, j);
                e.normal = {-1.0, 0.0};
            } else if (i == ns) {
                e.elem1 = simplex ? lower(ns - 1, j) : cell(ns - 1, j);
                e.normal = {1.0, 0.0};
            } else {
                e.elem1 = simplex ? lower(i - 1, j) : cell(i - 1, j);
                e.elem2 = simplex ? upper(i, j) : cell(i, j);
                e.normal = {1.0, 0.0};
            }
            mesh.edges[vedge(i, j)] = e;
        }
    }
    for (int j = 0; j <= ns; ++j) {
        for (int i = 0; i < ns; ++i) {
            Edge e;
            e.a = {vx(i), vy(j)};
            e.b = {vx(i + 1), vy(j)};
            e.length = mesh.hx;
            if (j == 0) {
                e.elem1 = simplex ? lower(i, 0) : cell(i, 0);
                e.normal = {0.0, -1.0};
            } else if (j == ns) {
                e.elem1 = simplex ? upper(i, ns - 1) : cell(i, ns - 1);
                e.normal = {0.0, 1.0};
            } else {
                e.elem1 = simplex ? upper(i, j - 1) : cell(i, j - 1);
                e.elem2 = simplex ? lower(i, j) : cell(i, j);
                e.normal = {0.0, 1.0};
            }
            mesh.edges[hedge(i, j)] = e;
        }
    }

    mesh.elements.resize(elems_per_cell * ns * ns);
    for (int j = 0; j < ns; ++j) {
        for (int i = 0; i < ns; ++i) {
            const Vec2 bl{vx(i), vy(j)}, br{vx(i + 1), vy(j)};
            const Vec2 tr{vx(i + 1), vy(j + 1)}, tl{vx(i), vy(j + 1)};
            if (!simplex) {
                Element& el = mesh.elements[cell(i, j)];
                el.id = cell(i, j);
                el.n_nodes = 4;
                el.nodes = {bl, br, tr, tl};
                el.edge_ids = {hedge(i, j), vedge(i + 1, j), hedge(i, j + 1), vedge(i, j)};
                el.origin = bl;
                el.hx = mesh.hx;
                el.hy = mesh.hy;
            } else {
                // Each cell is split along the bl -> tr diagonal.
                Edge d;
                d.a = bl;
                d.b = tr;
                d.length = std::hypot(mesh.hx, mesh.hy);
                d.elem1 = lower(i, j);
                d.elem2 = upper(i, j);
                // perp of the diagonal points up-left, from lower into upper
                d.normal = (tr - bl).perp().normalized();
                mesh.edges[dedge(i, j)] = d;

                Element& lo = mesh.elements[lower(i, j)];
                lo.id = lower(i, j);
                lo.n_nodes = 3;
                lo.nodes = {bl, br, tr, Vec2{}};
                lo.edge_ids = {hedge(i, j), vedge(i + 1, j), dedge(i, j), -1};
                lo.origin = bl;
                lo.hx = mesh.hx;
                lo.hy = mesh.hy;

                Element& up = mesh.elements[upper(i, j)];
                up.id = upper(i, j);
                up.n_nodes = 3;
                up.nodes = {bl, tr, tl, Vec2{}};
                up.edge_ids = {dedge(i, j), hedge(i, j + 1), vedge(i, j), -1};
                up.origin = bl;
                up.hx = mesh.hx;
                up.hy = mesh.hy;
            }
        }
    }
    return mesh;
}

Vec2 edge_intersection(Vec2 p0, Vec2 p1, const InterfaceCurve& curve) {
    double f0 = curve(p0);
    double f1 = curve(p1);
    if (!(f0 * f1 < 0.0))
        throw std::invalid_argument("edge_intersection: level set does not change sign");

    const double tol = curve.snap_tolerance();
    const auto at = [&](double t) { return p0 + t * (p1 - p0); };

    // Safeguarded secant/bisection on t in [0,1]: keep a sign-changing
    // bracket, try the secant step, fall back to bisection when it leaves the
    // bracket or stalls.
    double ta = 0.0, tb = 1.0;
    for (int it = 0; it < 200; ++it) {
        double ts = ta - f0 * (tb - ta) / (f1 - f0);
        const double margin = 0.01 * (tb - ta);
        if (!(ts > ta + margin && ts < tb - margin)) ts = 0.5 * (ta + tb);
        const double fs = curve(at(ts));
        if (std::abs(fs) <= tol || tb - ta < 1e-15) return at(ts);
        if (f0 * fs < 0.0) {
            tb = ts;
            f1 = fs;
        } else {
            ta = ts;
            f0 = fs;
        }
    }
    return at(0.5 * (ta + tb));
}

namespace {

// Ordered boundary chain of an element with the chord endpoints inserted on
// their edges. Returns the chain and the indices of D and E in it.
struct BoundaryChain {
    std::vector<Vec2> pts;
    int iD = -1, iE = -1;
};

BoundaryChain boundary_chain(const Element& el, Vec2 D, Vec2 E) {
    BoundaryChain chain;
    const double weld = 1e-13 * std::max(el.hx, el.hy);

    const auto push = [&](Vec2 p, int which) {
        if (!chain.pts.empty() && (p - chain.pts.back()).norm() <= weld) {
            // coincides with the previous chain point; merge
            if (which == 0) chain.iD = static_cast<int>(chain.pts.size()) - 1;
            if (which == 1) chain.iE = static_cast<int>(chain.pts.size()) - 1;
            return;
        }
        if (which == 0) chain.iD = static_cast<int>(chain.pts.size());
        if (which == 1) chain.iE = static_cast<int>(chain.pts.size());
        chain.pts.push_back(p);
    };

    for (int k = 0; k < el.n_nodes; ++k) {
        const Vec2 a = el.nodes[k];
        const Vec2 b = el.nodes[(k + 1) % el.n_nodes];
        push(a, -1);
        const Vec2 dir = b - a;
        const double len2 = dir.dot(dir);
        // insert whichever of D, E lies on this directed edge, ordered by the
        // parameter along it
        struct Hit {
            double t;
            int which;
        };
        std::vector<Hit> hits;
        for (int w = 0; w < 2; ++w) {
            const Vec2 p = w == 0 ? D : E;
            const double t = (p - a).dot(dir) / len2;
            const double off = std::abs((p - a).cross(dir)) / std::sqrt(len2);
            if (t > -1e-12 && t < 1.0 + 1e-12 && off <= 1e-10 * std::sqrt(len2))
                hits.push_back({t, w});
        }
        std::sort(hits.begin(), hits.end(), [](const Hit& u, const Hit& v) { return u.t < v.t; });
        for (const Hit& hit : hits) push(hit.which == 0 ? D : E, hit.which);
    }
    // close the cycle: last point may weld with the first
    if (chain.pts.size() > 1 && (chain.pts.back() - chain.pts.front()).norm() <= weld) {
        if (chain.iD == static_cast<int>(chain.pts.size()) - 1) chain.iD = 0;
        if (chain.iE == static_cast<int>(chain.pts.size()) - 1) chain.iE = 0;
        chain.pts.pop_back();
    }
    return chain;
}

}  // namespace

std::pair<Polygon, Polygon> subpolygons(const Element& el, Vec2 D, Vec2 E,
                                        const InterfaceCurve& curve) {
    const double hmax = std::max(el.hx, el.hy);
    if ((E - D).norm() < kDegenerateChordFactor * hmax)
        throw DegenerateCut("subpolygons: chord endpoints nearly coincide");

    BoundaryChain chain = boundary_chain(el, D, E);
    if (chain.iD < 0 || chain.iE < 0)
        throw std::invalid_argument("subpolygons: D or E does not lie on the element boundary");

    const int n = static_cast<int>(chain.pts.size());
    const auto walk = [&](int from, int to) {
        Polygon poly;
        for (int i = from; ; i = (i + 1) % n) {
            poly.v.push_back(chain.pts[i]);
            if (i == to) break;
        }
        return poly;
    };
    Polygon first = walk(chain.iD, chain.iE);   // D ... E, counterclockwise
    Polygon second = walk(chain.iE, chain.iD);  // E ... D, counterclockwise

    // Decide which piece is on the minus side from the element vertices it
    // contains (majority of snapped level-set signs).
    const double snap = curve.snap_tolerance();
    const auto minus_votes = [&](const Polygon& poly) {
        int votes = 0, total = 0;
        for (const Vec2& p : poly.v) {
            if ((p - D).norm() <= 1e-12 * hmax || (p - E).norm() <= 1e-12 * hmax) continue;
            ++total;
            if (snapped_side(curve(p), snap) == Side::Minus) ++votes;
        }
        return total > 0 ? (2 * votes > total ? 1 : (2 * votes < total ? -1 : 0)) : 0;
    };
    int vote = minus_votes(first);
    if (vote == 0) vote = -minus_votes(second);
    bool first_is_minus = vote > 0;
    if (vote == 0)  // all vertices ambiguous; fall back to the centroid sign
        first_is_minus = snapped_side(curve(first.centroid()), snap) == Side::Minus;

    if (first_is_minus) return {first, second};
    return {second, first};
}

namespace {

// Number of interface crossings on a segment, located by sign sampling; the
// level set is assumed to cross each sampled subinterval at most once.
struct EdgeCrossings {
    int count = 0;
    double t = -1.0;   // parameter of the single crossing, when count == 1
};

EdgeCrossings scan_edge(const Edge& e, const InterfaceCurve& curve) {
    const double snap = curve.snap_tolerance();
    EdgeCrossings out;
    double t_prev = 0.0;
    Side s_prev = snapped_side(curve(e.a), snap);
    for (int k = 1; k <= kEdgeSampleIntervals; ++k) {
        const double t = static_cast<double>(k) / kEdgeSampleIntervals;
        const Side s = snapped_side(curve(e.point_at(t)), snap);
        if (s != s_prev) {
            ++out.count;
            if (out.count == 1) {
                const Vec2 a = e.point_at(t_prev);
                const Vec2 b = e.point_at(t);
                const double fa = curve(a);
                const double fb = curve(b);
                Vec2 p;
                if (std::abs(fa) <= snap) {
                    p = a;
                } else if (std::abs(fb) <= snap) {
                    p = b;
                } else {
                    p = edge_intersection(a, b, curve);
                }
                const Vec2 d = e.b - e.a;
                out.t = (p - e.a).dot(d) / d.dot(d);
            }
        }
        s_prev = s;
        t_prev = t;
    }
    return out;
}

ElementTag majority_tag(const Element& el, const InterfaceCurve& curve) {
    const double snap = curve.snap_tolerance();
    int minus = 0;
    for (int k = 0; k < el.n_nodes; ++k)
        if (snapped_side(curve(el.nodes[k]), snap) == Side::Minus) ++minus;
    if (2 * minus == el.n_nodes)
        return snapped_side(curve(el.centroid()), snap) == Side::Minus
                   ? ElementTag::NonInterfaceMinus
                   : ElementTag::NonInterfacePlus;
    return 2 * minus > el.n_nodes ? ElementTag::NonInterfaceMinus : ElementTag::NonInterfacePlus;
}

}  // namespace

Classification classify_elements(const CartesianMesh& mesh, const InterfaceCurve& curve) {
    Classification cls;
    cls.tags.assign(mesh.n_elements(), ElementTag::NonInterfaceMinus);
    cls.cut_of_element.assign(mesh.n_elements(), -1);
    cls.edge_crossing.assign(mesh.n_edges(), -1.0);

    for (int e = 0; e < mesh.n_edges(); ++e) {
        const EdgeCrossings cr = scan_edge(mesh.edges[e], curve);
        if (cr.count >= 2)
            throw HypothesisViolation(
                "classify_elements: edge " + std::to_string(e) +
                " meets the interface at " + std::to_string(cr.count) +
                " points, violating hypotheses (H1)/(H2) (the interface enters and leaves "
                "through the same edge); refine the mesh");
        if (cr.count == 1) cls.edge_crossing[e] = cr.t;
    }

    const double snap = curve.snap_tolerance();
    for (const Element& el : mesh.elements) {
        struct Crossing {
            Vec2 p;
            int edge;
        };
        std::vector<Crossing> crossings;
        for (int k = 0; k < el.n_nodes; ++k) {
            const int e = el.edge_ids[k];
            if (cls.edge_crossing[e] >= 0.0)
                crossings.push_back({mesh.edges[e].point_at(cls.edge_crossing[e]), e});
        }

        if (crossings.empty()) {
            cls.tags[el.id] = snapped_side(curve(el.nodes[0]), snap) == Side::Minus
                                  ? ElementTag::NonInterfaceMinus
                                  : ElementTag::NonInterfacePlus;
            continue;
        }
        if (crossings.size() != 2)
            throw HypothesisViolation(
                "classify_elements: element " + std::to_string(el.id) + " boundary is crossed at " +
                std::to_string(crossings.size()) +
                " points, violating hypothesis (H2); refine the mesh");

        const Vec2 D = crossings[0].p;
        const Vec2 E = crossings[1].p;
        const double hmax = std::max(el.hx, el.hy);
        if ((E - D).norm() < kDegenerateChordFactor * hmax) {
            // Degenerate cut: treat as noninterface with the majority-side
            // coefficient.
            cls.tags[el.id] = majority_tag(el, curve);
            continue;
        }

        auto [pm, pp] = subpolygons(el, D, E, curve);
        const double am = pm.area();
        const double ap = pp.area();
        if (std::min(am, ap) < kDegenerateAreaFactor * el.hx * el.hy) {
            cls.tags[el.id] = majority_tag(el, curve);
            continue;
        }

        CutGeometry cut;
        cut.element = el.id;
        cut.D = D;
        cut.E = E;
        cut.edge_D = crossings[0].edge;
        cut.edge_E = crossings[1].edge;
        cut.minus_poly = std::move(pm);
        cut.plus_poly = std::move(pp);
        cut.area_minus = am;
        cut.area_plus = ap;
        cut.chord_length = (E - D).norm();
        Vec2 n = (E - D).perp().normalized();
        const Vec2 mid = 0.5 * (D + E);
        if (n.dot(cut.plus_poly.centroid() - mid) < 0.0) n = n * -1.0;
        cut.chord_normal = n;

        cls.tags[el.id] = ElementTag::Interface;
        cls.cut_of_element[el.id] = static_cast<int>(cls.cuts.size());
        cls.cuts.push_back(std::move(cut));
    }
    return cls;
}

}  // namespace dgife
