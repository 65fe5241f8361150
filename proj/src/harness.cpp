#include "dgife/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace dgife {

ProblemSpec RunConfig::problem() const {
    if (beta_override) return ProblemSpec(*beta_override);
    return make_example(example);
}

SolverConfig RunConfig::solver_config() const {
    SolverConfig cfg;
    cfg.rel_tol = solver_tol;
    cfg.block_size = simplex ? 3 : 4;
    if (solver_method) {
        cfg.method = *solver_method;
        return cfg;
    }
    cfg.method = method_for_epsilon(epsilon);
    // Krylov iterations stall on the strongly nonsymmetric systems of the
    // large-contrast runs; those go to the banded factorization, which the
    // time stepper reuses across steps.
    const BetaPair b = problem().beta();
    const double contrast = std::max(b.minus, b.plus) / std::min(b.minus, b.plus);
    if (!simplex && contrast >= 100.0) cfg.method = SolverMethod::BandedDirect;
    return cfg;
}

SingleRun run_single(const RunConfig& config, int ns) {
    SingleRun run;
    run.ns = ns;
    const auto t_start = std::chrono::steady_clock::now();
    try {
        const ProblemSpec problem = config.problem();
        const InterfaceCurve curve = problem.curve();
        const CartesianMesh mesh =
            build_mesh(Domain::unit_square(), ns,
                       config.simplex ? MeshKind::Simplex : MeshKind::Rectangular);
        const Classification cls = classify_elements(mesh, curve);
        const BasisTable bases =
            BasisTable::build(mesh, cls, problem.beta().minus, problem.beta().plus);
        const AssemblyOptions opts{config.volume_order, config.edge_order};
        const DgSystem system = build_dg_system(mesh, cls, bases, problem.beta(), config.sigma,
                                                config.epsilon, opts);
        const SolverConfig solver = config.solver_config();

        const double dt = config.dt_ratio * mesh.h;
        const int n_steps = std::max(1, static_cast<int>(std::lround(config.final_time / dt)));
        const TimeLadder ladder(config.final_time, n_steps);

        std::vector<double> u0;
        if (config.init == InitMode::Projection) {
            u0 = elliptic_projection(system, mesh, cls, bases, problem.beta(),
                                     problem.fields_at(0.0), solver, opts);
        } else {
            u0 = initial_interpolant(mesh, bases.dof_map(),
                                     [&](Vec2 p) { return problem.initial(p); });
        }

        const LoadAssembler load = [&](double t) {
            return assemble_load(
                mesh, cls, bases, [&](Vec2 p) { return problem.source(p, t); },
                [&](Vec2 p) { return problem.dirichlet(p, t); }, problem.beta(), config.sigma,
                config.epsilon, opts);
        };
        PinnedDirichlet pinned;
        const PinnedDirichlet* pinned_ptr = nullptr;
        if (config.dirichlet == DirichletMode::PinnedNodes) {
            pinned.pins = BoundaryPins::collect(mesh, bases.dof_map());
            pinned.value = [&](Vec2 p, double t) { return problem.dirichlet(p, t); };
            pinned_ptr = &pinned;
        }
        const SolutionHistory hist = run_theta_scheme(system, ladder, config.theta,
                                                      std::move(u0), load, solver, false,
                                                      pinned_ptr);

        const double t_final = config.final_time;
        ErrorOptions eopts;
        eopts.volume_order = config.volume_order;
        eopts.edge_order = config.edge_order;
        run.report = error_norms(
            hist.final_state, mesh, cls, bases,
            [&](Vec2 p, Side s) { return problem.exact_on_side(p, t_final, s); },
            [&](Vec2 p, Side s) { return problem.exact_grad_on_side(p, t_final, s); }, eopts);
        run.report.dt = ladder.dt();
        if (config.with_energy)
            run.report.err_energy = energy_error(
                hist.final_state, mesh, cls, bases, problem.beta(), config.sigma,
                [&](Vec2 p, Side s) { return problem.exact_on_side(p, t_final, s); },
                [&](Vec2 p, Side s) { return problem.exact_grad_on_side(p, t_final, s); },
                eopts);
        run.solver_iterations = hist.total_iterations;
        run.ok = true;
    } catch (const std::exception& err) {
        run.ok = false;
        run.error = err.what();
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return run;
}

ConvergenceResult run_convergence(const RunConfig& config) {
    ConvergenceResult result;
    for (int ns : config.ns_list) result.runs.push_back(run_single(config, ns));

    for (std::size_t k = 1; k < result.runs.size(); ++k) {
        SingleRun& cur = result.runs[k];
        const SingleRun& prev = result.runs[k - 1];
        if (!cur.ok || !prev.ok || cur.ns != 2 * prev.ns) continue;
        const auto rate = [](double coarse, double fine) -> std::optional<double> {
            if (!(coarse > 0.0) || !(fine > 0.0)) return std::nullopt;
            return std::log2(coarse / fine);
        };
        cur.rates[0] = rate(prev.report.err_inf, cur.report.err_inf);
        cur.rates[1] = rate(prev.report.err_l2, cur.report.err_l2);
        cur.rates[2] = rate(prev.report.err_h1, cur.report.err_h1);
    }
    return result;
}

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2E", v);
    return buf;
}

std::string fixed2(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

std::string compact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void write_csv(std::ostream& os, const ConvergenceResult& result, const RunConfig& config) {
    const BetaPair beta = config.problem().beta();
    os << "Ns,h,dt,theta,epsilon,sigma,beta_minus,beta_plus,"
          "err_inf,rate_inf,err_l2,rate_l2,err_h1,rate_h1\n";
    for (const SingleRun& run : result.runs) {
        if (!run.ok) continue;
        const ErrorReport& r = run.report;
        os << run.ns << ',' << compact(r.h) << ',' << compact(r.dt) << ','
           << compact(config.theta) << ',' << config.epsilon << ',' << compact(config.sigma)
           << ',' << compact(beta.minus) << ',' << compact(beta.plus) << ',' << sci(r.err_inf)
           << ',' << fixed2(run.rates[0]) << ',' << sci(r.err_l2) << ',' << fixed2(run.rates[1])
           << ',' << sci(r.err_h1) << ',' << fixed2(run.rates[2]) << '\n';
    }
}

void write_markdown(std::ostream& os, const ConvergenceResult& result, const RunConfig& config) {
    const BetaPair beta = config.problem().beta();
    os << "Scheme: theta = " << compact(config.theta) << ", epsilon = " << config.epsilon
       << ", sigma = " << compact(config.sigma) << ", beta = (" << compact(beta.minus) << ", "
       << compact(beta.plus) << "), dt = " << compact(config.dt_ratio) << "h\n\n";
    os << "| Ns | Linf | rate | L2 | rate | H1 | rate |\n";
    os << "|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const SingleRun& run : result.runs) {
        if (!run.ok) {
            os << "| " << run.ns << " | failed | | | | | |\n";
            continue;
        }
        const ErrorReport& r = run.report;
        os << "| " << run.ns << " | " << sci(r.err_inf) << " | " << fixed2(run.rates[0]) << " | "
           << sci(r.err_l2) << " | " << fixed2(run.rates[1]) << " | " << sci(r.err_h1) << " | "
           << fixed2(run.rates[2]) << " |\n";
    }
}

void write_manifest(std::ostream& os, const RunConfig& config) {
    const BetaPair beta = config.problem().beta();
    nlohmann::json j;
    j["example"] = config.example;
    j["beta_minus"] = beta.minus;
    j["beta_plus"] = beta.plus;
    j["ns"] = config.ns_list;
    j["dt_ratio"] = config.dt_ratio;
    j["theta"] = config.theta;
    j["epsilon"] = config.epsilon;
    j["sigma"] = config.sigma;
    j["final_time"] = config.final_time;
    j["init"] = config.init == InitMode::Projection ? "projection" : "interp";
    j["dirichlet"] = config.dirichlet == DirichletMode::PinnedNodes ? "pinned" : "weak";
    j["mesh"] = config.simplex ? "simplex" : "rectangular";
    const SolverConfig solver = config.solver_config();
    j["solver"]["method"] = solver.method == SolverMethod::ConjugateGradient ? "cg"
                            : solver.method == SolverMethod::BiCgStab        ? "bicgstab"
                            : solver.method == SolverMethod::BandedDirect    ? "banded"
                                                                             : "dense";
    j["solver"]["rel_tol"] = solver.rel_tol;
    j["solver"]["preconditioner"] = solver.preconditioner == Preconditioner::ElementBlock
                                        ? "block"
                                        : solver.preconditioner == Preconditioner::Diagonal
                                              ? "diagonal"
                                              : "none";
    j["quadrature"]["volume_order"] = config.volume_order;
    j["quadrature"]["edge_order"] = config.edge_order;
    j["output"]["path"] = config.out_path;
    j["output"]["format"] = config.format == OutputFormat::Csv ? "csv" : "markdown";
    os << j.dump(2) << '\n';
}

void emit_table(const ConvergenceResult& result, const RunConfig& config) {
    const auto emit = [&](std::ostream& os) {
        if (config.format == OutputFormat::Csv)
            write_csv(os, result, config);
        else
            write_markdown(os, result, config);
    };
    if (config.out_path.empty()) {
        emit(std::cout);
    } else {
        std::ofstream os(config.out_path);
        if (!os) throw std::runtime_error("emit_table: cannot open '" + config.out_path + "'");
        emit(os);
        if (!os) throw std::runtime_error("emit_table: write failed for '" + config.out_path + "'");
        if (config.manifest) {
            const std::string mpath = config.out_path + ".manifest.json";
            std::ofstream ms(mpath);
            if (!ms) throw std::runtime_error("emit_table: cannot open '" + mpath + "'");
            write_manifest(ms, config);
        }
    }
}

}  // namespace dgife
