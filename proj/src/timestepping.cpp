#include "dgife/timestepping.hpp"

#include <fstream>
#include <memory>

namespace dgife {

std::vector<double> initial_interpolant(const CartesianMesh& mesh, const DofMap& dofs,
                                        const ScalarField& u0) {
    std::vector<double> u(dofs.total(), 0.0);
    for (const Element& el : mesh.elements)
        for (int i = 0; i < el.n_nodes; ++i) u[dofs.global(el.id, i)] = u0(el.nodes[i]);
    return u;
}

std::vector<double> elliptic_projection_rhs(const CartesianMesh& mesh, const Classification& cls,
                                            const BasisTable& bases, BetaPair beta, double sigma,
                                            int epsilon, const ExactSolutionFields& fields,
                                            const AssemblyOptions& opts) {
    const DofMap dofs = bases.dof_map();
    std::vector<double> rhs(dofs.total(), 0.0);

    std::array<double, 4> val{};
    std::array<Vec2, 4> grad{};

    // volume term: chord-side beta against the exact one-sided gradient
    for (const Element& el : mesh.elements) {
        const auto accumulate = [&](const QuadRule& rule, Side side) {
            const double b = beta.on(side);
            for (const QuadPoint& q : rule.points) {
                const Vec2 gu = fields.gradient(q.p);
                bases.eval(el, q.p, side, val, grad);
                for (int i = 0; i < el.n_nodes; ++i)
                    rhs[dofs.global(el.id, i)] += q.w * b * gu.dot(grad[i]);
            }
        };
        if (cls.is_interface(el.id)) {
            const CutElementRule rule = cut_rule(cls.cut(el.id), opts.volume_order);
            accumulate(rule.minus, Side::Minus);
            accumulate(rule.plus, Side::Plus);
        } else {
            const QuadRule rule =
                el.is_triangle()
                    ? map_to_triangle(gauss_tri(opts.volume_order), el.nodes[0], el.nodes[1],
                                      el.nodes[2])
                    : map_to_rect(gauss_rect(opts.volume_order), el.origin, el.hx, el.hy);
            accumulate(rule, cls.noninterface_side(el.id));
        }
    }

    // edge terms: the exact solution has zero interior jumps, so only the
    // consistency term acts on interior edges; boundary edges add the
    // symmetry and penalty parts with the trace of u.
    for (int eid = 0; eid < mesh.n_edges(); ++eid) {
        const Edge& edge = mesh.edges[eid];
        const double t = cls.edge_crossing[eid];
        const std::optional<double> crossing =
            (t > 0.0 && t < 1.0) ? std::optional<double>(t) : std::nullopt;
        const QuadRule rule = split_edge_rule(edge, crossing, opts.edge_order);
        const bool interior = !edge.is_boundary();
        const double pen = sigma / edge.length;

        for (const QuadPoint& q : rule.points) {
            const double flux = fields.beta_gradient(q.p).dot(edge.normal);
            const std::array<int, 2> elems{edge.elem1, edge.elem2};
            const std::array<double, 2> jump_sign{1.0, -1.0};
            const int n_adj = interior ? 2 : 1;
            for (int a = 0; a < n_adj; ++a) {
                const Element& el = mesh.elements[elems[a]];
                const Side side = bases.side_at(el, q.p);
                bases.eval(el, q.p, side, val, grad);
                for (int i = 0; i < el.n_nodes; ++i)
                    rhs[dofs.global(el.id, i)] -= q.w * flux * jump_sign[a] * val[i];
                if (!interior) {
                    const double uv = fields.value(q.p);
                    const double b = beta.on(side);
                    for (int i = 0; i < el.n_nodes; ++i)
                        rhs[dofs.global(el.id, i)] +=
                            q.w * uv * (epsilon * b * grad[i].dot(edge.normal) + pen * val[i]);
                }
            }
        }
    }
    return rhs;
}

std::vector<double> elliptic_projection(const DgSystem& system, const CartesianMesh& mesh,
                                        const Classification& cls, const BasisTable& bases,
                                        BetaPair beta, const ExactSolutionFields& fields,
                                        const SolverConfig& solver, const AssemblyOptions& opts) {
    const std::vector<double> rhs = elliptic_projection_rhs(mesh, cls, bases, beta, system.sigma,
                                                            system.epsilon, fields, opts);
    return solve(system.stiffness, rhs, solver).x;
}

BoundaryPins BoundaryPins::collect(const CartesianMesh& mesh, const DofMap& dofs) {
    BoundaryPins pins;
    const Domain& d = mesh.domain;
    const double tol = 1e-12 * std::max(d.width(), d.height());
    for (const Element& el : mesh.elements)
        for (int i = 0; i < el.n_nodes; ++i) {
            const Vec2 p = el.nodes[i];
            if (std::abs(p.x - d.xmin) < tol || std::abs(p.x - d.xmax) < tol ||
                std::abs(p.y - d.ymin) < tol || std::abs(p.y - d.ymax) < tol) {
                pins.dofs.push_back(dofs.global(el.id, i));
                pins.nodes.push_back(p);
            }
        }
    return pins;
}

namespace {

// zero the pinned rows and columns, unit diagonal; keeps symmetry
CsrMatrix pin_matrix(const CsrMatrix& a, const std::vector<char>& is_pinned) {
    CsrMatrix m = a;
    for (int i = 0; i < m.n; ++i)
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            if (is_pinned[i] || is_pinned[m.col[k]])
                m.val[k] = i == m.col[k] ? 1.0 : 0.0;
    return m;
}

}  // namespace

SolutionHistory run_theta_scheme(const DgSystem& system, const TimeLadder& ladder, double theta,
                                 std::vector<double> initial, const LoadAssembler& load,
                                 const SolverConfig& solver, bool keep_all,
                                 const PinnedDirichlet* pinned) {
    if (theta < 0.0 || theta > 1.0)
        throw std::invalid_argument("run_theta_scheme: theta must lie in [0,1]");
    if (static_cast<int>(initial.size()) != system.mass.n)
        throw std::invalid_argument("run_theta_scheme: initial vector has wrong size");

    const double dt = ladder.dt();
    const CsrMatrix lhs = add_scaled(system.mass, 1.0, system.stiffness, theta * dt);
    const CsrMatrix rhs_op = add_scaled(system.mass, 1.0, system.stiffness, -(1.0 - theta) * dt);

    const bool pin = pinned != nullptr && !pinned->pins.empty();
    std::vector<char> is_pinned(lhs.n, 0);
    if (pin)
        for (int d : pinned->pins.dofs) is_pinned[d] = 1;
    const CsrMatrix lhs_solve = pin ? pin_matrix(lhs, is_pinned) : CsrMatrix{};
    const CsrMatrix& step_matrix = pin ? lhs_solve : lhs;

    // the step operator is fixed, so a direct method factors it once and
    // reapplies the factorization at every level
    std::unique_ptr<BandedFactorization> factorization;
    if (solver.method == SolverMethod::BandedDirect)
        factorization = std::make_unique<BandedFactorization>(step_matrix);

    SolutionHistory hist;
    hist.initial = initial;
    hist.times.push_back(0.0);
    if (keep_all) hist.levels.push_back(initial);

    std::vector<double> u = std::move(initial);
    std::vector<double> rhs(u.size());
    std::vector<double> pin_values(pin ? u.size() : 0, 0.0);
    std::vector<double> pin_correction(pin ? u.size() : 0, 0.0);
    for (int n = 1; n <= ladder.n_steps; ++n) {
        rhs_op.multiply(u, rhs);
        const std::vector<double> load_n = load(ladder.time(n));
        const std::vector<double> load_prev =
            theta < 1.0 ? load(ladder.time(n - 1)) : std::vector<double>(u.size(), 0.0);
        for (std::size_t i = 0; i < rhs.size(); ++i)
            rhs[i] += dt * (theta * load_n[i] + (1.0 - theta) * load_prev[i]);

        if (pin) {
            // move the known boundary values to the right-hand side
            std::fill(pin_values.begin(), pin_values.end(), 0.0);
            for (std::size_t k = 0; k < pinned->pins.dofs.size(); ++k)
                pin_values[pinned->pins.dofs[k]] =
                    pinned->value(pinned->pins.nodes[k], ladder.time(n));
            lhs.multiply(pin_values, pin_correction);
            for (int i = 0; i < lhs.n; ++i) rhs[i] -= pin_correction[i];
            for (int d : pinned->pins.dofs) rhs[d] = pin_values[d];
        }

        try {
            if (factorization) {
                u = factorization->solve(rhs);
            } else {
                SolveResult res = solve(step_matrix, rhs, solver, u);
                u = std::move(res.x);
                hist.total_iterations += res.report.iterations;
                hist.worst_step_iterations =
                    std::max(hist.worst_step_iterations, res.report.iterations);
            }
        } catch (const SolverFailure& err) {
            throw SolverFailure("time step " + std::to_string(n) + ": " + err.what(),
                                err.residual_history);
        }
        hist.times.push_back(ladder.time(n));
        if (keep_all) hist.levels.push_back(u);
    }
    hist.final_state = std::move(u);
    return hist;
}

void write_checkpoint(const std::filesystem::path& path, std::span<const double> u,
                      std::uint64_t level, double time) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_checkpoint: cannot open " + path.string());
    const std::uint64_t n = u.size();
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(&level), sizeof level);
    os.write(reinterpret_cast<const char*>(&time), sizeof time);
    os.write(reinterpret_cast<const char*>(u.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!os) throw std::runtime_error("write_checkpoint: write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_checkpoint: cannot open " + path.string());
    Checkpoint cp;
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    is.read(reinterpret_cast<char*>(&cp.level), sizeof cp.level);
    is.read(reinterpret_cast<char*>(&cp.time), sizeof cp.time);
    cp.u.resize(n);
    is.read(reinterpret_cast<char*>(cp.u.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("read_checkpoint: truncated file " + path.string());
    return cp;
}

}  // namespace dgife
