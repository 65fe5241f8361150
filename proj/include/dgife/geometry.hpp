#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgife {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    Vec2 normalized() const {
        const double n = norm();
        return {x / n, y / n};
    }
    // 90-degree counterclockwise rotation
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Axis-aligned rectangular computational domain.
struct Domain {
    double xmin, xmax, ymin, ymax;

    Domain(double xmin_, double xmax_, double ymin_, double ymax_)
        : xmin(xmin_), xmax(xmax_), ymin(ymin_), ymax(ymax_) {
        if (!(xmax > xmin) || !(ymax > ymin))
            throw std::invalid_argument("Domain: require xmax > xmin and ymax > ymin");
    }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    static Domain unit_square() { return Domain(0.0, 1.0, 0.0, 1.0); }
};

/// Implicit interface description. The zero set of the level-set function is
/// the curve; negative values mark the minus subdomain, positive the plus
/// subdomain. `scale` is the characteristic magnitude of the level set, used
/// to make snapping and root-finding tolerances dimensionally meaningful.
class InterfaceCurve {
  public:
    using LevelSet = std::function<double(Vec2)>;

    explicit InterfaceCurve(LevelSet level_set, double scale = 1.0)
        : level_set_(std::move(level_set)), scale_(scale) {
        if (!(scale_ > 0.0)) throw std::invalid_argument("InterfaceCurve: scale must be positive");
    }

    double operator()(Vec2 p) const { return level_set_(p); }
    double scale() const { return scale_; }
    double snap_tolerance() const { return 1e-12 * scale_; }

    /// A curve with no zero set; the whole domain is on the plus side.
    static InterfaceCurve none() {
        return InterfaceCurve([](Vec2) { return 1.0; });
    }

  private:
    LevelSet level_set_;
    double scale_;
};

enum class Side : int { Minus = -1, Plus = +1 };

inline Side opposite(Side s) { return s == Side::Minus ? Side::Plus : Side::Minus; }

/// Sign of a level-set value with the snapping convention: values within the
/// snap tolerance of zero count as Minus.
inline Side snapped_side(double level_value, double snap_tol) {
    return level_value > snap_tol ? Side::Plus : Side::Minus;
}

enum class ElementTag : int { NonInterfaceMinus, NonInterfacePlus, Interface };
enum class MeshKind : int { Rectangular, Simplex };

struct Element {
    int id = -1;
    int n_nodes = 4;                 // 4 for rectangles, 3 for triangles
    std::array<Vec2, 4> nodes{};     // counterclockwise
    std::array<int, 4> edge_ids{};   // edge_ids[k] joins nodes[k] -> nodes[(k+1)%n]
    Vec2 origin{};                   // bounding-box corner, anchors local coordinates
    double hx = 1.0, hy = 1.0;       // bounding-box extents

    bool is_triangle() const { return n_nodes == 3; }
    Vec2 node(int i) const { return nodes[i]; }
    double area() const { return is_triangle() ? 0.5 * hx * hy : hx * hy; }
    Vec2 centroid() const {
        Vec2 c{};
        for (int i = 0; i < n_nodes; ++i) c = c + nodes[i];
        return c * (1.0 / n_nodes);
    }
    Vec2 to_local(Vec2 p) const { return {(p.x - origin.x) / hx, (p.y - origin.y) / hy}; }
    Vec2 to_global(Vec2 q) const { return {origin.x + q.x * hx, origin.y + q.y * hy}; }
};

struct Edge {
    Vec2 a{}, b{};
    double length = 0.0;
    Vec2 normal{};       // unit; outward on boundary edges, K1 -> K2 on interior edges
    int elem1 = -1;
    int elem2 = -1;      // -1 marks a boundary edge

    bool is_boundary() const { return elem2 < 0; }
    Vec2 point_at(double t) const { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }
};

struct CartesianMesh {
    Domain domain;
    int ns = 0;
    MeshKind kind = MeshKind::Rectangular;
    double hx = 0.0, hy = 0.0;
    double h = 0.0;   // = hx, the nominal mesh size
    std::vector<Element> elements;
    std::vector<Edge> edges;

    int n_elements() const { return static_cast<int>(elements.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }
};

/// Simple polygon, counterclockwise vertex order.
struct Polygon {
    std::vector<Vec2> v;

    double area() const {
        double s = 0.0;
        const int n = static_cast<int>(v.size());
        for (int i = 0; i < n; ++i) s += v[i].cross(v[(i + 1) % n]);
        return 0.5 * s;
    }
    Vec2 centroid() const {
        Vec2 c{};
        for (const Vec2& p : v) c = c + p;
        return c * (1.0 / static_cast<double>(v.size()));
    }
};

/// Geometry of an interface element: the chord DE and the two sub-polygons it
/// cuts the element into.
struct CutGeometry {
    int element = -1;
    Vec2 D{}, E{};
    int edge_D = -1, edge_E = -1;   // mesh edge ids carrying D and E
    Polygon minus_poly, plus_poly;
    double area_minus = 0.0, area_plus = 0.0;
    Vec2 chord_normal{};            // unit normal of DE pointing into the plus side
    double chord_length = 0.0;
};

struct Classification {
    std::vector<ElementTag> tags;         // per element
    std::vector<int> cut_of_element;      // per element: index into cuts, or -1
    std::vector<CutGeometry> cuts;
    std::vector<double> edge_crossing;    // per edge: crossing parameter in [0,1], or -1

    bool edge_is_interface(int edge_id) const { return edge_crossing[edge_id] >= 0.0; }
    bool is_interface(int elem_id) const { return tags[elem_id] == ElementTag::Interface; }
    Side noninterface_side(int elem_id) const {
        return tags[elem_id] == ElementTag::NonInterfacePlus ? Side::Plus : Side::Minus;
    }
    const CutGeometry& cut(int elem_id) const { return cuts[cut_of_element[elem_id]]; }
    int n_interface_elements() const { return static_cast<int>(cuts.size()); }
};

struct HypothesisViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateCut : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Builds a uniform ns x ns Cartesian mesh (2*ns^2 right triangles in simplex
/// mode) with full edge adjacency. Requires ns >= 2.
CartesianMesh build_mesh(const Domain& domain, int ns, MeshKind kind = MeshKind::Rectangular);

/// Finds the interface crossing on the segment [p0, p1]. Requires a strict
/// sign change of the level set between the endpoints.
Vec2 edge_intersection(Vec2 p0, Vec2 p1, const InterfaceCurve& curve);

/// Splits an element along the chord DE into the (minus, plus) sub-polygons.
/// D and E must lie on distinct element edges; throws DegenerateCut when the
/// chord is shorter than 1e-10 times the element size.
std::pair<Polygon, Polygon> subpolygons(const Element& element, Vec2 D, Vec2 E,
                                        const InterfaceCurve& curve);

/// Tags every element as noninterface minus/plus or interface and extracts
/// the cut geometry of interface elements. Throws HypothesisViolation when an
/// element edge is crossed more than once or an element boundary is crossed
/// at other than zero or two points.
Classification classify_elements(const CartesianMesh& mesh, const InterfaceCurve& curve);

}  // namespace dgife
