#pragma once

#include <cstdint>
#include <filesystem>

#include "dgife/assembly.hpp"
#include "dgife/solver.hpp"

namespace dgife {

/// Uniform time grid t^n = n * T / n_steps.
struct TimeLadder {
    double T = 1.0;
    int n_steps = 1;

    TimeLadder(double T_, int n_steps_) : T(T_), n_steps(n_steps_) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeLadder: T must be positive");
        if (n_steps < 1) throw std::invalid_argument("TimeLadder: n_steps must be >= 1");
    }
    double dt() const { return T / n_steps; }
    double time(int n) const { return n * dt(); }
};

struct SolutionHistory {
    std::vector<double> initial;
    std::vector<double> final_state;
    std::vector<std::vector<double>> levels;   // all levels when retained
    std::vector<double> times;
    long total_iterations = 0;
    int worst_step_iterations = 0;
};

/// Nodal interpolant: per element, dof values are u0 at the element nodes
/// (the Lagrange property makes this the local interpolant).
std::vector<double> initial_interpolant(const CartesianMesh& mesh, const DofMap& dofs,
                                        const ScalarField& u0);

/// Exact-solution callables bound at a fixed time. `gradient` evaluates the
/// one-sided gradient on the true side of each point; `beta_gradient` is the
/// flux field beta(x) * grad u(x).
struct ExactSolutionFields {
    ScalarField value;
    std::function<Vec2(Vec2)> gradient;
    std::function<Vec2(Vec2)> beta_gradient;
};

/// Right-hand side r_i = a_eps(u, phi_i) of the elliptic projection, by
/// quadrature; the interior jump terms of the exact solution vanish and the
/// consistency term uses the exact flux.
std::vector<double> elliptic_projection_rhs(const CartesianMesh& mesh, const Classification& cls,
                                            const BasisTable& bases, BetaPair beta, double sigma,
                                            int epsilon, const ExactSolutionFields& fields,
                                            const AssemblyOptions& opts = {});

/// Elliptic projection P_h u: solves a_eps(P_h u, v_h) = a_eps(u, v_h).
std::vector<double> elliptic_projection(const DgSystem& system, const CartesianMesh& mesh,
                                        const Classification& cls, const BasisTable& bases,
                                        BetaPair beta, const ExactSolutionFields& fields,
                                        const SolverConfig& solver,
                                        const AssemblyOptions& opts = {});

using LoadAssembler = std::function<std::vector<double>(double)>;

/// Dofs whose nodes lie on the domain boundary, for pinning them to the
/// Dirichlet data on top of the weak form (the time stepper eliminates the
/// pinned rows and columns symmetrically).
struct BoundaryPins {
    std::vector<int> dofs;
    std::vector<Vec2> nodes;

    static BoundaryPins collect(const CartesianMesh& mesh, const DofMap& dofs);
    bool empty() const { return dofs.empty(); }
};

struct PinnedDirichlet {
    BoundaryPins pins;
    std::function<double(Vec2, double)> value;   // g(x, t)
};

/// Runs the fully discrete theta scheme: each step solves
/// (M + theta*dt*A) u^n = (M - (1-theta)*dt*A) u^{n-1} + dt * L^{n,theta}.
/// The load is re-assembled at both time levels every step. When `pinned` is
/// given, boundary-node dofs are constrained to the Dirichlet data at every
/// time level.
SolutionHistory run_theta_scheme(const DgSystem& system, const TimeLadder& ladder, double theta,
                                 std::vector<double> initial, const LoadAssembler& load,
                                 const SolverConfig& solver, bool keep_all = false,
                                 const PinnedDirichlet* pinned = nullptr);

/// Flat binary checkpoint: header (u64 n_dof, u64 level, f64 time) followed
/// by the coefficients.
void write_checkpoint(const std::filesystem::path& path, std::span<const double> u,
                      std::uint64_t level, double time);

struct Checkpoint {
    std::vector<double> u;
    std::uint64_t level = 0;
    double time = 0.0;
};

Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace dgife
