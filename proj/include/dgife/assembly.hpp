#pragma once

#include <functional>

#include "dgife/geometry.hpp"
#include "dgife/ife_basis.hpp"
#include "dgife/quadrature.hpp"
#include "dgife/sparse.hpp"

namespace dgife {

struct BetaPair {
    double minus = 1.0;
    double plus = 1.0;

    double on(Side s) const { return s == Side::Minus ? minus : plus; }
    BetaPair swapped() const { return {plus, minus}; }
};

struct AssemblyOptions {
    int volume_order = kVolumeOrder;
    int edge_order = kEdgeOrder;
};

/// Term switches for the stiffness form; used by tests to isolate parts of
/// the operator.
struct StiffnessTerms {
    bool volume = true;
    bool consistency = true;   // -int_e {beta grad u . n} [v]
    bool symmetry = true;      // +epsilon int_e {beta grad v . n} [u]
    bool penalty = true;       // +int_e (sigma/|e|) [u][v]
    bool boundary_edges = true;
};

using ScalarField = std::function<double(Vec2)>;

/// Block-diagonal mass operator; interface elements are integrated piecewise
/// against the chord.
CsrMatrix assemble_mass(const CartesianMesh& mesh, const Classification& cls,
                        const BasisTable& bases, const AssemblyOptions& opts = {});

/// Interior-penalty stiffness operator with volume, consistency, symmetry
/// and penalty terms over every mesh edge (one-sided convention on boundary
/// edges).
CsrMatrix assemble_stiffness(const CartesianMesh& mesh, const Classification& cls,
                             const BasisTable& bases, BetaPair beta, double sigma, int epsilon,
                             const AssemblyOptions& opts = {}, const StiffnessTerms& terms = {});

/// Load vector: volume source plus the weak Dirichlet boundary terms.
std::vector<double> assemble_load(const CartesianMesh& mesh, const Classification& cls,
                                  const BasisTable& bases, const ScalarField& f,
                                  const ScalarField& g, BetaPair beta, double sigma, int epsilon,
                                  const AssemblyOptions& opts = {});

/// theta * load_n + (1 - theta) * load_nm1.
std::vector<double> combine_theta_load(const std::vector<double>& load_n,
                                       const std::vector<double>& load_nm1, double theta);

struct DgSystem {
    CsrMatrix stiffness;
    CsrMatrix mass;
    double sigma = 0.0;
    int epsilon = 1;
};

DgSystem build_dg_system(const CartesianMesh& mesh, const Classification& cls,
                         const BasisTable& bases, BetaPair beta, double sigma, int epsilon,
                         const AssemblyOptions& opts = {});

/// Mesh-dependent energy norm of a discrete function:
/// (sum_K int beta |grad v|^2 + sum_e (sigma/|e|) int [v]^2)^(1/2).
double energy_norm(const CartesianMesh& mesh, const Classification& cls, const BasisTable& bases,
                   BetaPair beta, double sigma, std::span<const double> coeffs,
                   const AssemblyOptions& opts = {});

}  // namespace dgife
