#pragma once

#include <optional>

#include "dgife/assembly.hpp"
#include "dgife/timestepping.hpp"

namespace dgife {

struct ErrorReport {
    int ns = 0;
    double h = 0.0;
    double dt = 0.0;
    double err_inf = 0.0;
    double err_l2 = 0.0;
    double err_h1 = 0.0;                  // broken gradient seminorm
    std::optional<double> err_energy;     // mesh-dependent energy norm, on request
};

struct ErrorOptions {
    int volume_order = kVolumeOrder;
    int edge_order = kEdgeOrder;
    int sample_grid = 5;       // per-element sampling for the max-norm column
};

using SidedScalar = std::function<double(Vec2, Side)>;
using SidedGradient = std::function<Vec2(Vec2, Side)>;

/// Norms of u_h - u at a fixed time. Interface elements integrate each chord
/// sub-polygon against the matching branch of the exact solution (the side
/// passed to the exact callables is the chord side of the quadrature point),
/// which keeps the integrands smooth in the chord-curve mismatch region. The
/// max norm samples a fixed per-element grid.
ErrorReport error_norms(std::span<const double> u_h, const CartesianMesh& mesh,
                        const Classification& cls, const BasisTable& bases,
                        const SidedScalar& exact, const SidedGradient& exact_grad,
                        const ErrorOptions& opts = {});

/// Energy norm of u_h - u: beta-weighted broken gradient plus penalty jumps
/// ([u] = 0 on interior edges for the exact solution; boundary jumps use g).
double energy_error(std::span<const double> u_h, const CartesianMesh& mesh,
                    const Classification& cls, const BasisTable& bases, BetaPair beta,
                    double sigma, const SidedScalar& exact, const SidedGradient& exact_grad,
                    const ErrorOptions& opts = {});

struct RateTable {
    std::vector<ErrorReport> reports;
    // per report: rates against the previous one (inf, l2, h1); absent on the
    // first row
    std::vector<std::array<std::optional<double>, 3>> rates;
};

/// log2 error ratios across a mesh-doubling ladder; reports must be ordered
/// by increasing ns with successive ratio 2.
RateTable convergence_rates(std::vector<ErrorReport> reports);

}  // namespace dgife
