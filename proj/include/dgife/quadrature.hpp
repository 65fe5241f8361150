#pragma once

#include <optional>
#include <vector>

#include "dgife/geometry.hpp"

namespace dgife {

struct QuadPoint {
    Vec2 p{};
    double w = 0.0;
};

/// Positive-weight quadrature rule; `degree` is the declared polynomial
/// exactness.
struct QuadRule {
    std::vector<QuadPoint> points;
    int degree = 0;

    double total_weight() const {
        double s = 0.0;
        for (const QuadPoint& q : points) s += q.w;
        return s;
    }
};

/// 1D Gauss-Legendre rule on [0,1].
struct SegmentRule {
    std::vector<double> x, w;
    int degree = 0;
};

/// `order`-point Gauss-Legendre rule on [0,1]; exact through degree 2*order-1.
SegmentRule gauss_segment(int order);

/// Tensor Gauss rule on the unit square [0,1]^2, `order` points per axis.
QuadRule gauss_rect(int order);

/// Rule on the unit triangle {x,y >= 0, x+y <= 1}, exact at least through
/// `order` (actual exactness in `degree`). All weights positive.
QuadRule gauss_tri(int order);

QuadRule map_to_segment(const SegmentRule& ref, Vec2 a, Vec2 b);
QuadRule map_to_rect(const QuadRule& ref, Vec2 origin, double hx, double hy);
QuadRule map_to_triangle(const QuadRule& ref, Vec2 v0, Vec2 v1, Vec2 v2);

/// Composite rule over a convex polygon, fan-triangulated from its first
/// vertex.
QuadRule polygon_rule(const Polygon& poly, int order);

/// Quadrature on a cut element: one point set per sub-polygon, weights
/// summing to the sub-areas.
struct CutElementRule {
    QuadRule minus, plus;
};

CutElementRule cut_rule(const CutGeometry& cut, int order);

/// Gauss rule along an edge; interface edges get the concatenation of rules
/// on the two sub-segments either side of the crossing.
QuadRule split_edge_rule(const Edge& edge, std::optional<double> crossing_t, int order);
QuadRule split_edge_rule(const Edge& edge, const InterfaceCurve& curve, int order);

/// Default quadrature orders for assembly: integrands are products of
/// (bi)linear pieces, one extra order guards the edge terms.
inline constexpr int kVolumeOrder = 3;
inline constexpr int kEdgeOrder = 4;

}  // namespace dgife
