#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "dgife/error_norms.hpp"
#include "dgife/problems.hpp"

namespace dgife {

enum class InitMode : int { Interpolant, Projection };
enum class OutputFormat : int { Csv, Markdown };

/// Dirichlet data enters the scheme through the weak (Nitsche-type) boundary
/// terms of the bilinear and linear forms; PinnedNodes additionally fixes the
/// boundary-node dofs to the data at every time level, which is the variant
/// that reproduces the benchmark tables.
enum class DirichletMode : int { PinnedNodes, Weak };

struct RunConfig {
    std::string example = "1";                  // "custom" with explicit beta
    std::optional<BetaPair> beta_override;
    std::vector<int> ns_list{10, 20, 40, 80};
    double dt_ratio = 2.0;                      // dt = dt_ratio * h
    double theta = 0.5;
    int epsilon = 1;
    double sigma = 1.0;
    double final_time = 1.0;
    InitMode init = InitMode::Interpolant;
    DirichletMode dirichlet = DirichletMode::PinnedNodes;
    bool simplex = false;
    std::optional<SolverMethod> solver_method;  // defaults to the epsilon rule
    double solver_tol = 1e-10;
    int volume_order = kVolumeOrder;
    int edge_order = kEdgeOrder;
    bool with_energy = false;
    std::string out_path;                        // empty: stdout
    OutputFormat format = OutputFormat::Csv;
    bool manifest = false;

    ProblemSpec problem() const;
    SolverConfig solver_config() const;
};

struct SingleRun {
    int ns = 0;
    bool ok = false;
    std::string error;
    ErrorReport report;
    double seconds = 0.0;
    long solver_iterations = 0;
    std::array<std::optional<double>, 3> rates{};   // inf, l2, h1 vs previous run
};

struct ConvergenceResult {
    std::vector<SingleRun> runs;

    bool all_ok() const {
        for (const SingleRun& r : runs)
            if (!r.ok) return false;
        return true;
    }
};

/// One full pipeline pass at a given resolution: mesh, classification,
/// bases, system, theta scheme to the final time, error norms.
SingleRun run_single(const RunConfig& config, int ns);

/// Runs the whole resolution ladder; per-resolution failures are recorded
/// and do not abort the remaining runs.
ConvergenceResult run_convergence(const RunConfig& config);

void write_csv(std::ostream& os, const ConvergenceResult& result, const RunConfig& config);
void write_markdown(std::ostream& os, const ConvergenceResult& result, const RunConfig& config);
void write_manifest(std::ostream& os, const RunConfig& config);

/// Writes the table to `config.out_path` (stdout when empty) in the config
/// format, plus the JSON manifest next to it when requested.
void emit_table(const ConvergenceResult& result, const RunConfig& config);

}  // namespace dgife
