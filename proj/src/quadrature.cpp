#include "dgife/quadrature.hpp"

#include <cmath>

namespace dgife {

namespace {

void check_order(int order) {
    if (order < 1 || order > 10)
        throw std::invalid_argument("quadrature: order must be in 1..10");
}

// Gauss-Legendre nodes on [-1,1] by Newton iteration on P_n.
void legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        const double wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
}

}  // namespace

SegmentRule gauss_segment(int order) {
    check_order(order);
    std::vector<double> x, w;
    legendre_nodes(order, x, w);
    SegmentRule rule;
    rule.degree = 2 * order - 1;
    rule.x.resize(order);
    rule.w.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.x[i] = 0.5 * (x[i] + 1.0);
        rule.w[i] = 0.5 * w[i];
    }
    return rule;
}

QuadRule gauss_rect(int order) {
    const SegmentRule seg = gauss_segment(order);
    QuadRule rule;
    rule.degree = seg.degree;
    rule.points.reserve(order * order);
    for (int j = 0; j < order; ++j)
        for (int i = 0; i < order; ++i)
            rule.points.push_back({{seg.x[i], seg.x[j]}, seg.w[i] * seg.w[j]});
    return rule;
}

QuadRule gauss_tri(int order) {
    check_order(order);
    // Duffy (collapsed square) rule: n Gauss points per axis give exactness
    // 2n-2 on the triangle, with all weights positive. n = order+1 matches
    // the 1D convention of degree 2*order-1 per requested order.
    const int n = order + 1;
    std::vector<double> x, w;
    legendre_nodes(n, x, w);
    QuadRule rule;
    rule.degree = 2 * n - 2;
    rule.points.reserve(n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double u = 0.5 * (x[i] + 1.0), uw = 0.5 * w[i];
            const double v = 0.5 * (x[j] + 1.0), vw = 0.5 * w[j];
            rule.points.push_back({{u, v * (1.0 - u)}, uw * vw * (1.0 - u)});
        }
    return rule;
}

QuadRule map_to_segment(const SegmentRule& ref, Vec2 a, Vec2 b) {
    QuadRule rule;
    rule.degree = ref.degree;
    const double len = (b - a).norm();
    rule.points.reserve(ref.x.size());
    for (std::size_t i = 0; i < ref.x.size(); ++i)
        rule.points.push_back({a + ref.x[i] * (b - a), ref.w[i] * len});
    return rule;
}

QuadRule map_to_rect(const QuadRule& ref, Vec2 origin, double hx, double hy) {
    QuadRule rule;
    rule.degree = ref.degree;
    rule.points.reserve(ref.points.size());
    for (const QuadPoint& q : ref.points)
        rule.points.push_back(
            {{origin.x + q.p.x * hx, origin.y + q.p.y * hy}, q.w * hx * hy});
    return rule;
}

QuadRule map_to_triangle(const QuadRule& ref, Vec2 v0, Vec2 v1, Vec2 v2) {
    QuadRule rule;
    rule.degree = ref.degree;
    const Vec2 e1 = v1 - v0, e2 = v2 - v0;
    const double jac = std::abs(e1.cross(e2));   // reference triangle area is 1/2
    rule.points.reserve(ref.points.size());
    for (const QuadPoint& q : ref.points)
        rule.points.push_back({v0 + q.p.x * e1 + q.p.y * e2, q.w * jac});
    return rule;
}

QuadRule polygon_rule(const Polygon& poly, int order) {
    if (poly.v.size() < 3 || !(poly.area() > 0.0))
        throw DegenerateCut("polygon_rule: degenerate polygon");
    const QuadRule ref = gauss_tri(order);
    QuadRule rule;
    rule.degree = ref.degree;
    for (std::size_t i = 1; i + 1 < poly.v.size(); ++i) {
        const QuadRule tri = map_to_triangle(ref, poly.v[0], poly.v[i], poly.v[i + 1]);
        rule.points.insert(rule.points.end(), tri.points.begin(), tri.points.end());
    }
    return rule;
}

CutElementRule cut_rule(const CutGeometry& cut, int order) {
    return {polygon_rule(cut.minus_poly, order), polygon_rule(cut.plus_poly, order)};
}

QuadRule split_edge_rule(const Edge& edge, std::optional<double> crossing_t, int order) {
    const SegmentRule seg = gauss_segment(order);
    if (!crossing_t) return map_to_segment(seg, edge.a, edge.b);
    const Vec2 mid = edge.point_at(*crossing_t);
    QuadRule rule = map_to_segment(seg, edge.a, mid);
    const QuadRule upper = map_to_segment(seg, mid, edge.b);
    rule.points.insert(rule.points.end(), upper.points.begin(), upper.points.end());
    return rule;
}

QuadRule split_edge_rule(const Edge& edge, const InterfaceCurve& curve, int order) {
    const double snap = curve.snap_tolerance();
    const double fa = curve(edge.a);
    const double fb = curve(edge.b);
    std::optional<double> t;
    if (snapped_side(fa, snap) != snapped_side(fb, snap)) {
        if (std::abs(fa) <= snap) {
            t = 0.0;
        } else if (std::abs(fb) <= snap) {
            t = 1.0;
        } else {
            const Vec2 p = edge_intersection(edge.a, edge.b, curve);
            const Vec2 d = edge.b - edge.a;
            t = (p - edge.a).dot(d) / d.dot(d);
        }
        if (*t <= 0.0 || *t >= 1.0) t.reset();   // crossing at an endpoint: no split needed
    }
    return split_edge_rule(edge, t, order);
}

}  // namespace dgife
