#include "dgife/assembly.hpp"

#include <cmath>

namespace dgife {

namespace {

// Volume quadrature of a noninterface element.
QuadRule element_rule(const Element& el, int order) {
    if (el.is_triangle())
        return map_to_triangle(gauss_tri(order), el.nodes[0], el.nodes[1], el.nodes[2]);
    return map_to_rect(gauss_rect(order), el.origin, el.hx, el.hy);
}

std::optional<double> crossing_of(const Classification& cls, int edge_id) {
    const double t = cls.edge_crossing[edge_id];
    if (t <= 0.0 || t >= 1.0) return std::nullopt;
    return t;
}

struct EdgeSideEval {
    std::array<double, 4> val{};
    std::array<double, 4> flux{};   // beta * grad(phi) . n_e
    std::array<Vec2, 4> grad{};
    Side side = Side::Minus;
};

void eval_on_edge(const CartesianMesh& mesh, const BasisTable& bases, int elem, Vec2 p,
                  Vec2 normal, BetaPair beta, EdgeSideEval& out) {
    const Element& el = mesh.elements[elem];
    out.side = bases.side_at(el, p);
    bases.eval(el, p, out.side, out.val, out.grad);
    const double b = beta.on(out.side);
    for (int i = 0; i < el.n_nodes; ++i) out.flux[i] = b * out.grad[i].dot(normal);
}

}  // namespace

CsrMatrix assemble_mass(const CartesianMesh& mesh, const Classification& cls,
                        const BasisTable& bases, const AssemblyOptions& opts) {
    const DofMap dofs = bases.dof_map();
    TripletBuffer buf;
    buf.reserve(static_cast<std::size_t>(mesh.n_elements()) * dofs.funcs_per_element *
                dofs.funcs_per_element);

    std::array<double, 4> val{};
    std::array<Vec2, 4> grad{};
    for (const Element& el : mesh.elements) {
        const int d = el.n_nodes;
        std::array<std::array<double, 4>, 4> local{};
        const auto accumulate = [&](const QuadRule& rule, Side side) {
            for (const QuadPoint& q : rule.points) {
                bases.eval(el, q.p, side, val, grad);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) local[i][j] += q.w * val[i] * val[j];
            }
        };
        if (cls.is_interface(el.id)) {
            const CutElementRule rule = cut_rule(cls.cut(el.id), opts.volume_order);
            accumulate(rule.minus, Side::Minus);
            accumulate(rule.plus, Side::Plus);
        } else {
            accumulate(element_rule(el, opts.volume_order), Side::Minus);
        }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                buf.add(dofs.global(el.id, i), dofs.global(el.id, j), local[i][j]);
    }
    return buf.compress(dofs.total());
}

CsrMatrix assemble_stiffness(const CartesianMesh& mesh, const Classification& cls,
                             const BasisTable& bases, BetaPair beta, double sigma, int epsilon,
                             const AssemblyOptions& opts, const StiffnessTerms& terms) {
    if (sigma < 0.0) throw std::invalid_argument("assemble_stiffness: sigma must be >= 0");
    if (epsilon < -1 || epsilon > 1)
        throw std::invalid_argument("assemble_stiffness: epsilon must be -1, 0 or 1");

    const DofMap dofs = bases.dof_map();
    TripletBuffer buf;
    buf.reserve(static_cast<std::size_t>(mesh.n_elements()) * 16 +
                static_cast<std::size_t>(mesh.n_edges()) * 64);

    std::array<double, 4> val{};
    std::array<Vec2, 4> grad{};

    if (terms.volume) {
        for (const Element& el : mesh.elements) {
            const int d = el.n_nodes;
            std::array<std::array<double, 4>, 4> local{};
            const auto accumulate = [&](const QuadRule& rule, Side side) {
                const double b = beta.on(side);
                for (const QuadPoint& q : rule.points) {
                    bases.eval(el, q.p, side, val, grad);
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j)
                            local[i][j] += q.w * b * grad[i].dot(grad[j]);
                }
            };
            if (cls.is_interface(el.id)) {
                const CutElementRule rule = cut_rule(cls.cut(el.id), opts.volume_order);
                accumulate(rule.minus, Side::Minus);
                accumulate(rule.plus, Side::Plus);
            } else {
                accumulate(element_rule(el, opts.volume_order), cls.noninterface_side(el.id));
            }
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    buf.add(dofs.global(el.id, i), dofs.global(el.id, j), local[i][j]);
        }
    }

    std::array<EdgeSideEval, 2> ev;
    for (int eid = 0; eid < mesh.n_edges(); ++eid) {
        const Edge& edge = mesh.edges[eid];
        const bool interior = !edge.is_boundary();
        if (!interior && !terms.boundary_edges) continue;

        const QuadRule rule = split_edge_rule(edge, crossing_of(cls, eid), opts.edge_order);
        const int n_adj = interior ? 2 : 1;
        const double avg = interior ? 0.5 : 1.0;
        const std::array<int, 2> elems{edge.elem1, edge.elem2};
        const std::array<double, 2> jump_sign{1.0, -1.0};
        const double pen = sigma / edge.length;

        std::array<std::array<std::array<std::array<double, 4>, 4>, 2>, 2> local{};
        for (const QuadPoint& q : rule.points) {
            for (int a = 0; a < n_adj; ++a)
                eval_on_edge(mesh, bases, elems[a], q.p, edge.normal, beta, ev[a]);
            for (int b = 0; b < n_adj; ++b) {
                const int db = mesh.elements[elems[b]].n_nodes;
                for (int a = 0; a < n_adj; ++a) {
                    const int da = mesh.elements[elems[a]].n_nodes;
                    for (int i = 0; i < db; ++i)
                        for (int j = 0; j < da; ++j) {
                            double term = 0.0;
                            if (terms.consistency)
                                term -= avg * ev[a].flux[j] * jump_sign[b] * ev[b].val[i];
                            if (terms.symmetry && epsilon != 0)
                                term += epsilon * avg * ev[b].flux[i] * jump_sign[a] * ev[a].val[j];
                            if (terms.penalty)
                                term += pen * jump_sign[a] * ev[a].val[j] * jump_sign[b] * ev[b].val[i];
                            local[b][a][i][j] += q.w * term;
                        }
                }
            }
        }
        for (int b = 0; b < n_adj; ++b) {
            const int db = mesh.elements[elems[b]].n_nodes;
            for (int a = 0; a < n_adj; ++a) {
                const int da = mesh.elements[elems[a]].n_nodes;
                for (int i = 0; i < db; ++i)
                    for (int j = 0; j < da; ++j)
                        buf.add(dofs.global(elems[b], i), dofs.global(elems[a], j),
                                local[b][a][i][j]);
            }
        }
    }
    return buf.compress(dofs.total());
}

std::vector<double> assemble_load(const CartesianMesh& mesh, const Classification& cls,
                                  const BasisTable& bases, const ScalarField& f,
                                  const ScalarField& g, BetaPair beta, double sigma, int epsilon,
                                  const AssemblyOptions& opts) {
    const DofMap dofs = bases.dof_map();
    std::vector<double> rhs(dofs.total(), 0.0);

    std::array<double, 4> val{};
    std::array<Vec2, 4> grad{};
    for (const Element& el : mesh.elements) {
        const int d = el.n_nodes;
        const auto accumulate = [&](const QuadRule& rule, Side side) {
            for (const QuadPoint& q : rule.points) {
                const double fv = f(q.p);
                if (fv == 0.0) continue;
                bases.eval(el, q.p, side, val, grad);
                for (int i = 0; i < d; ++i) rhs[dofs.global(el.id, i)] += q.w * fv * val[i];
            }
        };
        if (cls.is_interface(el.id)) {
            const CutElementRule rule = cut_rule(cls.cut(el.id), opts.volume_order);
            accumulate(rule.minus, Side::Minus);
            accumulate(rule.plus, Side::Plus);
        } else {
            accumulate(element_rule(el, opts.volume_order), Side::Minus);
        }
    }

    EdgeSideEval ev;
    for (int eid = 0; eid < mesh.n_edges(); ++eid) {
        const Edge& edge = mesh.edges[eid];
        if (!edge.is_boundary()) continue;
        const QuadRule rule = split_edge_rule(edge, crossing_of(cls, eid), opts.edge_order);
        const double pen = sigma / edge.length;
        const Element& el = mesh.elements[edge.elem1];
        for (const QuadPoint& q : rule.points) {
            const double gv = g(q.p);
            if (gv == 0.0) continue;
            eval_on_edge(mesh, bases, edge.elem1, q.p, edge.normal, beta, ev);
            for (int i = 0; i < el.n_nodes; ++i)
                rhs[dofs.global(el.id, i)] +=
                    q.w * gv * (epsilon * ev.flux[i] + pen * ev.val[i]);
        }
    }
    return rhs;
}

std::vector<double> combine_theta_load(const std::vector<double>& load_n,
                                       const std::vector<double>& load_nm1, double theta) {
    if (load_n.size() != load_nm1.size())
        throw std::invalid_argument("combine_theta_load: size mismatch");
    if (theta < 0.0 || theta > 1.0)
        throw std::invalid_argument("combine_theta_load: theta must lie in [0,1]");
    std::vector<double> out(load_n.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = theta * load_n[i] + (1.0 - theta) * load_nm1[i];
    return out;
}

DgSystem build_dg_system(const CartesianMesh& mesh, const Classification& cls,
                         const BasisTable& bases, BetaPair beta, double sigma, int epsilon,
                         const AssemblyOptions& opts) {
    DgSystem sys;
    sys.stiffness = assemble_stiffness(mesh, cls, bases, beta, sigma, epsilon, opts);
    sys.mass = assemble_mass(mesh, cls, bases, opts);
    sys.sigma = sigma;
    sys.epsilon = epsilon;
    return sys;
}

double energy_norm(const CartesianMesh& mesh, const Classification& cls, const BasisTable& bases,
                   BetaPair beta, double sigma, std::span<const double> coeffs,
                   const AssemblyOptions& opts) {
    const DofMap dofs = bases.dof_map();
    double acc = 0.0;

    std::array<double, 4> val{};
    std::array<Vec2, 4> grad{};
    for (const Element& el : mesh.elements) {
        const auto accumulate = [&](const QuadRule& rule, Side side) {
            const double b = beta.on(side);
            for (const QuadPoint& q : rule.points) {
                bases.eval(el, q.p, side, val, grad);
                Vec2 gu{};
                for (int i = 0; i < el.n_nodes; ++i)
                    gu = gu + coeffs[dofs.global(el.id, i)] * grad[i];
                acc += q.w * b * gu.dot(gu);
            }
        };
        if (cls.is_interface(el.id)) {
            const CutElementRule rule = cut_rule(cls.cut(el.id), opts.volume_order);
            accumulate(rule.minus, Side::Minus);
            accumulate(rule.plus, Side::Plus);
        } else {
            accumulate(element_rule(el, opts.volume_order), cls.noninterface_side(el.id));
        }
    }

    for (int eid = 0; eid < mesh.n_edges(); ++eid) {
        const Edge& edge = mesh.edges[eid];
        const QuadRule rule = split_edge_rule(edge, crossing_of(cls, eid), opts.edge_order);
        const double pen = sigma / edge.length;
        for (const QuadPoint& q : rule.points) {
            const Element& e1 = mesh.elements[edge.elem1];
            double jump = bases.value(e1, q.p, bases.side_at(e1, q.p),
                                      coeffs.subspan(dofs.global(edge.elem1, 0), e1.n_nodes));
            if (!edge.is_boundary()) {
                const Element& e2 = mesh.elements[edge.elem2];
                jump -= bases.value(e2, q.p, bases.side_at(e2, q.p),
                                    coeffs.subspan(dofs.global(edge.elem2, 0), e2.n_nodes));
            }
            acc += q.w * pen * jump * jump;
        }
    }
    return std::sqrt(acc);
}

}  // namespace dgife
