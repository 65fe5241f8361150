#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgife/sparse.hpp"

namespace dgife {

enum class SolverMethod : int { ConjugateGradient, BiCgStab, Dense, BandedDirect };

/// Diagonal scaling is the default; ElementBlock inverts the aligned
/// block_size x block_size diagonal blocks, which copes with strong
/// coefficient contrast across the interface.
enum class Preconditioner : int { None, Diagonal, ElementBlock };

struct SolverConfig {
    SolverMethod method = SolverMethod::ConjugateGradient;
    double rel_tol = 1e-10;
    int max_iterations = 0;   // 0: defaults to 10*n
    Preconditioner preconditioner = Preconditioner::Diagonal;
    int block_size = 4;       // for ElementBlock

    void validate() const {
        if (!(rel_tol > 0.0 && rel_tol < 1.0))
            throw std::invalid_argument("SolverConfig: rel_tol must lie in (0,1)");
        if (max_iterations < 0)
            throw std::invalid_argument("SolverConfig: max_iterations must be >= 1 (or 0 for default)");
        if (block_size < 1)
            throw std::invalid_argument("SolverConfig: block_size must be >= 1");
    }
};

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    SolverMethod method = SolverMethod::ConjugateGradient;
};

struct SolveResult {
    std::vector<double> x;
    SolveReport report;
};

struct SolverFailure : std::runtime_error {
    std::vector<double> residual_history;
    SolverFailure(std::string msg, std::vector<double> history)
        : std::runtime_error(std::move(msg)), residual_history(std::move(history)) {}
};

/// Solves A x = rhs to ||A x - rhs|| <= rel_tol * ||rhs||. CG requires a
/// symmetric matrix (pre-checked at 1e-8 relative); throws SolverFailure with
/// the residual history on non-convergence.
SolveResult solve(const CsrMatrix& a, std::span<const double> rhs, const SolverConfig& config,
                  std::span<const double> initial_guess = {});

/// Banded LU with partial pivoting; the factorization is built once and can
/// be reapplied to many right-hand sides (the time stepper reuses it across
/// steps). Suited to the strongly nonsymmetric large-contrast systems where
/// Krylov iterations stall.
class BandedFactorization {
  public:
    explicit BandedFactorization(const CsrMatrix& a);

    std::vector<double> solve(std::span<const double> rhs) const;
    int bandwidth() const { return kl_; }
    std::size_t storage_bytes() const { return ab_.size() * sizeof(double); }

  private:
    int n_ = 0;
    int kl_ = 0, ku_ = 0;       // lower/upper bandwidth (equal for our systems)
    int ldab_ = 0;              // rows of the band storage: 2*kl + ku + 1
    std::vector<double> ab_;    // column-major LAPACK-style band storage
    std::vector<int> piv_;
};

/// Method choice for the DG scheme: symmetric (epsilon = -1) systems go to
/// CG, nonsymmetric ones to BiCGStab.
inline SolverMethod method_for_epsilon(int epsilon) {
    return epsilon == -1 ? SolverMethod::ConjugateGradient : SolverMethod::BiCgStab;
}

}  // namespace dgife
