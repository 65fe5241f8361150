#include <CLI11.hpp>
#include <iostream>

#include "dgife/harness.hpp"

namespace {

using namespace dgife;

void add_common_flags(CLI::App* cmd, RunConfig& config, std::vector<double>& beta,
                      std::string& init, std::string& solver, std::string& format,
                      std::string& bc) {
    cmd->add_option("--example", config.example, "Benchmark id: 1, 2, 3a or 3b")
        ->check(CLI::IsMember({"1", "2", "3a", "3b"}));
    cmd->add_option("--beta", beta, "Custom coefficient pair: beta_minus beta_plus")
        ->expected(2);
    cmd->add_option("--dt-ratio", config.dt_ratio, "Time step as a multiple of h")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--theta", config.theta, "Theta scheme parameter (1 = backward Euler, 0.5 = Crank-Nicolson)")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--epsilon", config.epsilon, "Symmetry parameter: -1, 0 or 1")
        ->check(CLI::Range(-1, 1));
    cmd->add_option("--sigma", config.sigma, "Penalty parameter")->check(CLI::NonNegativeNumber);
    cmd->add_option("--init", init, "Initial data: interp or projection")
        ->check(CLI::IsMember({"interp", "projection"}));
    cmd->add_option("--bc", bc, "Dirichlet treatment: pinned (weak form + boundary nodes fixed) or weak")
        ->check(CLI::IsMember({"pinned", "weak"}));
    cmd->add_flag("--simplex", config.simplex, "Use triangular elements");
    cmd->add_option("--solver", solver, "Linear solver: auto, cg, bicgstab, dense or banded")
        ->check(CLI::IsMember({"auto", "cg", "bicgstab", "dense", "banded"}));
    cmd->add_option("--tol", config.solver_tol, "Solver relative tolerance")
        ->check(CLI::Range(1e-16, 0.5));
    cmd->add_option("--out", config.out_path, "Output file (stdout when omitted)");
    cmd->add_option("--format", format, "Output format: csv or markdown")
        ->check(CLI::IsMember({"csv", "markdown"}));
    cmd->add_flag("--manifest", config.manifest, "Write a JSON run manifest next to the output");
    cmd->add_option("--final-time", config.final_time, "Final time T")
        ->check(CLI::PositiveNumber);
}

void resolve_flags(RunConfig& config, const std::vector<double>& beta, const std::string& init,
                   const std::string& solver, const std::string& format, const std::string& bc) {
    if (!beta.empty()) {
        config.beta_override = BetaPair{beta[0], beta[1]};
        config.example = "custom";
    }
    config.init = init == "projection" ? InitMode::Projection : InitMode::Interpolant;
    config.dirichlet = bc == "weak" ? DirichletMode::Weak : DirichletMode::PinnedNodes;
    if (solver == "cg") config.solver_method = SolverMethod::ConjugateGradient;
    else if (solver == "bicgstab") config.solver_method = SolverMethod::BiCgStab;
    else if (solver == "dense") config.solver_method = SolverMethod::Dense;
    else if (solver == "banded") config.solver_method = SolverMethod::BandedDirect;
    config.format = format == "markdown" ? OutputFormat::Markdown : OutputFormat::Csv;
}

int report_failures(const ConvergenceResult& result) {
    int failures = 0;
    for (const SingleRun& run : result.runs)
        if (!run.ok) {
            std::cerr << "Ns=" << run.ns << " failed: " << run.error << '\n';
            ++failures;
        }
    return failures;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interior-penalty DG immersed finite element solver for parabolic interface problems"};
    app.require_subcommand(1);

    RunConfig config;
    std::vector<double> beta;
    std::string init = "interp", solver = "auto", format = "csv", bc = "pinned";

    int solve_ns = 20;
    CLI::App* solve_cmd = app.add_subcommand("solve", "Single solve at one resolution");
    solve_cmd->add_option("--ns", solve_ns, "Mesh resolution (elements per axis)")
        ->check(CLI::Range(2, 100000));
    add_common_flags(solve_cmd, config, beta, init, solver, format, bc);

    std::vector<int> ns_list;
    CLI::App* conv_cmd = app.add_subcommand("convergence", "Convergence ladder over a list of resolutions");
    conv_cmd->add_option("--ns", ns_list, "Mesh resolutions (comma separated)")->delimiter(',');
    add_common_flags(conv_cmd, config, beta, init, solver, format, bc);

    CLI11_PARSE(app, argc, argv);

    try {
        resolve_flags(config, beta, init, solver, format, bc);
        if (solve_cmd->parsed()) {
            config.ns_list = {solve_ns};
        } else if (!ns_list.empty()) {
            config.ns_list = ns_list;
        }
        const ConvergenceResult result = run_convergence(config);
        emit_table(result, config);
        return report_failures(result) == 0 ? 0 : 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
}
