#pragma once

#include <optional>
#include <span>

#include "dgife/geometry.hpp"

namespace dgife {

struct IfeConstructionFailure : std::runtime_error {
    int element = -1;
    IfeConstructionFailure(std::string msg, int elem)
        : std::runtime_error(std::move(msg)), element(elem) {}
};

/// Local nodal basis of an element, stored as one polynomial piece per side
/// of the chord. Pieces are expressed in element-local coordinates
/// (xi, eta) = ((x-x0)/hx, (y-y0)/hy): value = c0 + c1*xi + c2*eta + c3*xi*eta
/// (c3 = 0 for triangles). Noninterface elements carry identical pieces.
struct LocalBasis {
    struct Piece {
        std::array<double, 4> c{};

        double value(Vec2 q) const { return c[0] + c[1] * q.x + c[2] * q.y + c[3] * q.x * q.y; }
        // gradient in local coordinates; divide by (hx, hy) for the global one
        Vec2 grad_local(Vec2 q) const { return {c[1] + c[3] * q.y, c[2] + c[3] * q.x}; }
    };

    int n_funcs = 4;
    bool interface = false;
    Side fixed_side = Side::Minus;              // side of a noninterface element
    std::array<Piece, 4> minus{}, plus{};

    // chord line in local coordinates (valid when interface)
    Vec2 chord_point_loc{};                     // D in local coordinates
    Vec2 chord_normal_loc{};                    // normal pointing into the plus side

    const Piece& piece(int i, Side s) const { return s == Side::Minus ? minus[i] : plus[i]; }

    /// Side of a local point: chord-side for interface elements (points on
    /// the chord resolve to Minus), the element side otherwise.
    Side side_at_local(Vec2 q) const {
        if (!interface) return fixed_side;
        return (q - chord_point_loc).dot(chord_normal_loc) > 0.0 ? Side::Plus : Side::Minus;
    }
    double chord_distance_local(Vec2 q) const {
        return (q - chord_point_loc).dot(chord_normal_loc);
    }
};

/// Standard bilinear (rectangle) or linear (triangle) nodal basis.
LocalBasis build_standard_basis(const Element& element);

/// Immersed basis on an interface element: piecewise (bi)linear nodal
/// functions that are continuous at the chord endpoints and satisfy the flux
/// matching condition across the chord. Throws IfeConstructionFailure when
/// the local system is numerically singular.
LocalBasis build_ife_basis(const Element& element, const CutGeometry& cut, double beta_minus,
                           double beta_plus);

/// Values and global gradients of all basis functions at a point in the
/// element closure. The piece is selected by the chord side; `side_hint`
/// overrides the selection for points lying on the chord. Throws
/// std::invalid_argument for points outside the element bounding box.
void eval_basis(const LocalBasis& basis, const Element& element, Vec2 p,
                std::optional<Side> side_hint, std::span<double> values, std::span<Vec2> gradients);

/// Block dof layout of the discontinuous space: element k owns the global
/// indices [k*d, (k+1)*d).
struct DofMap {
    int funcs_per_element = 4;
    int n_elements = 0;

    int total() const { return funcs_per_element * n_elements; }
    int global(int element, int local) const { return element * funcs_per_element + local; }
    int element_of(int dof) const { return dof / funcs_per_element; }
    int local_of(int dof) const { return dof % funcs_per_element; }
};

/// Per-element basis table for a classified mesh.
class BasisTable {
  public:
    static BasisTable build(const CartesianMesh& mesh, const Classification& cls,
                            double beta_minus, double beta_plus);

    const LocalBasis& operator[](int element) const { return items_[element]; }
    int size() const { return static_cast<int>(items_.size()); }
    DofMap dof_map() const { return {items_.empty() ? 4 : items_[0].n_funcs, size()}; }

    /// Side used for evaluating element `e` at a global point.
    Side side_at(const Element& el, Vec2 p) const {
        return items_[el.id].side_at_local(el.to_local(p));
    }

    /// Evaluate all basis functions of an element at a global point on a
    /// fixed side; gradients are global.
    void eval(const Element& el, Vec2 p, Side side, std::span<double> values,
              std::span<Vec2> gradients) const;

    /// u_h at a global point from its coefficient block.
    double value(const Element& el, Vec2 p, Side side, std::span<const double> coeffs) const;

  private:
    std::vector<LocalBasis> items_;
};

}  // namespace dgife
