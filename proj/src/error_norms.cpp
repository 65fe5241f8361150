#include "dgife/error_norms.hpp"

#include <cmath>

namespace dgife {

namespace {

QuadRule noninterface_rule(const Element& el, int order) {
    if (el.is_triangle())
        return map_to_triangle(gauss_tri(order), el.nodes[0], el.nodes[1], el.nodes[2]);
    return map_to_rect(gauss_rect(order), el.origin, el.hx, el.hy);
}

}  // namespace

ErrorReport error_norms(std::span<const double> u_h, const CartesianMesh& mesh,
                        const Classification& cls, const BasisTable& bases,
                        const SidedScalar& exact, const SidedGradient& exact_grad,
                        const ErrorOptions& opts) {
    const DofMap dofs = bases.dof_map();
    ErrorReport rep;
    rep.ns = mesh.ns;
    rep.h = mesh.h;

    double l2 = 0.0, h1 = 0.0, linf = 0.0;
    std::array<double, 4> val{};
    std::array<Vec2, 4> grad{};

    for (const Element& el : mesh.elements) {
        const auto block = u_h.subspan(dofs.global(el.id, 0), el.n_nodes);

        const auto accumulate = [&](const QuadRule& rule, Side side) {
            for (const QuadPoint& q : rule.points) {
                bases.eval(el, q.p, side, val, grad);
                double uh = 0.0;
                Vec2 guh{};
                for (int i = 0; i < el.n_nodes; ++i) {
                    uh += block[i] * val[i];
                    guh = guh + block[i] * grad[i];
                }
                const double diff = uh - exact(q.p, side);
                const Vec2 gdiff = guh - exact_grad(q.p, side);
                l2 += q.w * diff * diff;
                h1 += q.w * gdiff.dot(gdiff);
            }
        };
        if (cls.is_interface(el.id)) {
            const CutElementRule rule = cut_rule(cls.cut(el.id), opts.volume_order);
            accumulate(rule.minus, Side::Minus);
            accumulate(rule.plus, Side::Plus);
        } else {
            accumulate(noninterface_rule(el, opts.volume_order), cls.noninterface_side(el.id));
        }

        // fixed per-element sample grid for the max norm
        const int m = opts.sample_grid;
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                const Vec2 loc{static_cast<double>(i) / (m - 1),
                               static_cast<double>(j) / (m - 1)};
                if (el.is_triangle() && loc.x + loc.y > 1.0 + 1e-12) continue;
                const Vec2 p = el.to_global(loc);
                const Side s = bases.side_at(el, p);
                bases.eval(el, p, s, val, grad);
                double uh = 0.0;
                for (int k = 0; k < el.n_nodes; ++k) uh += block[k] * val[k];
                linf = std::max(linf, std::abs(uh - exact(p, s)));
            }
    }

    rep.err_l2 = std::sqrt(l2);
    rep.err_h1 = std::sqrt(h1);
    rep.err_inf = linf;
    return rep;
}

double energy_error(std::span<const double> u_h, const CartesianMesh& mesh,
                    const Classification& cls, const BasisTable& bases, BetaPair beta,
                    double sigma, const SidedScalar& exact, const SidedGradient& exact_grad,
                    const ErrorOptions& opts) {
    const DofMap dofs = bases.dof_map();
    double acc = 0.0;
    std::array<double, 4> val{};
    std::array<Vec2, 4> grad{};

    for (const Element& el : mesh.elements) {
        const auto block = u_h.subspan(dofs.global(el.id, 0), el.n_nodes);
        const auto accumulate = [&](const QuadRule& rule, Side side) {
            const double b = beta.on(side);
            for (const QuadPoint& q : rule.points) {
                bases.eval(el, q.p, side, val, grad);
                Vec2 guh{};
                for (int i = 0; i < el.n_nodes; ++i) guh = guh + block[i] * grad[i];
                const Vec2 gdiff = guh - exact_grad(q.p, side);
                acc += q.w * b * gdiff.dot(gdiff);
            }
        };
        if (cls.is_interface(el.id)) {
            const CutElementRule rule = cut_rule(cls.cut(el.id), opts.volume_order);
            accumulate(rule.minus, Side::Minus);
            accumulate(rule.plus, Side::Plus);
        } else {
            accumulate(noninterface_rule(el, opts.volume_order), cls.noninterface_side(el.id));
        }
    }

    // jump terms: the exact solution is continuous across interior edges, so
    // only u_h jumps there; boundary edges see u_h - u
    for (int eid = 0; eid < mesh.n_edges(); ++eid) {
        const Edge& edge = mesh.edges[eid];
        const double t = cls.edge_crossing[eid];
        const std::optional<double> crossing =
            (t > 0.0 && t < 1.0) ? std::optional<double>(t) : std::nullopt;
        const QuadRule rule = split_edge_rule(edge, crossing, opts.edge_order);
        const double pen = sigma / edge.length;
        for (const QuadPoint& q : rule.points) {
            const Element& e1 = mesh.elements[edge.elem1];
            const Side s1 = bases.side_at(e1, q.p);
            double jump = bases.value(e1, q.p, s1,
                                      u_h.subspan(dofs.global(edge.elem1, 0), e1.n_nodes));
            if (edge.is_boundary()) {
                jump -= exact(q.p, s1);
            } else {
                const Element& e2 = mesh.elements[edge.elem2];
                jump -= bases.value(e2, q.p, bases.side_at(e2, q.p),
                                    u_h.subspan(dofs.global(edge.elem2, 0), e2.n_nodes));
            }
            acc += q.w * pen * jump * jump;
        }
    }
    return std::sqrt(acc);
}

RateTable convergence_rates(std::vector<ErrorReport> reports) {
    RateTable table;
    table.rates.resize(reports.size());
    for (std::size_t k = 1; k < reports.size(); ++k) {
        if (reports[k].ns != 2 * reports[k - 1].ns)
            throw std::invalid_argument(
                "convergence_rates: ladder entries must double the mesh resolution");
        const auto rate = [](double coarse, double fine) -> std::optional<double> {
            if (!(coarse > 0.0) || !(fine > 0.0)) return std::nullopt;
            return std::log2(coarse / fine);
        };
        table.rates[k][0] = rate(reports[k - 1].err_inf, reports[k].err_inf);
        table.rates[k][1] = rate(reports[k - 1].err_l2, reports[k].err_l2);
        table.rates[k][2] = rate(reports[k - 1].err_h1, reports[k].err_h1);
    }
    table.reports = std::move(reports);
    return table;
}

}  // namespace dgife
