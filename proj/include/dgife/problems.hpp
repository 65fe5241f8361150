#pragma once

#include <string_view>

#include "dgife/assembly.hpp"
#include "dgife/timestepping.hpp"

namespace dgife {

/// Manufactured parabolic interface problem on the unit square: an elliptic
/// interface r(x,y) = 1 with r^2 = (x-x0)^2/a^2 + (y-y0)^2/b^2 separates the
/// minus region (r < 1) from the plus region, and the exact solution is
///   u = (1/beta-) r^p e^t             on the minus side,
///   u = ((1/beta+) r^p + 1/beta- - 1/beta+) e^t   on the plus side,
/// which is continuous across the interface with a continuous flux. The
/// source f = u_t - div(beta grad u) and boundary data g = u follow
/// analytically.
class ProblemSpec {
  public:
    ProblemSpec(BetaPair beta, double x0 = 0.0, double y0 = 0.0, double a = M_PI / 4.0,
                double b = M_PI / 6.0, int p = 5);

    const BetaPair& beta() const { return beta_; }
    double x0() const { return x0_; }
    double y0() const { return y0_; }
    double semi_axis_a() const { return a_; }
    double semi_axis_b() const { return b_; }
    int exponent() const { return p_; }

    InterfaceCurve curve() const;
    double r(Vec2 p) const { return std::sqrt(r2(p)); }
    Side side_of(Vec2 p) const;

    double exact(Vec2 p, double t) const;
    double exact_on_side(Vec2 p, double t, Side s) const;
    Vec2 exact_grad(Vec2 p, double t) const;
    Vec2 exact_grad_on_side(Vec2 p, double t, Side s) const;
    /// beta(x) * grad u; continuous across the interface by construction.
    Vec2 flux(Vec2 p, double t) const;

    double source(Vec2 p, double t) const;      // f = u_t - beta * laplace(u)
    double dirichlet(Vec2 p, double t) const;   // g = trace of u
    double initial(Vec2 p) const;               // u0 = u(., 0)

    /// Callables of the exact solution at a fixed time, for projections and
    /// error evaluation.
    ExactSolutionFields fields_at(double t) const;

  private:
    double r2(Vec2 p) const;
    double coeff(Side s) const;   // 1/beta on the side
    double shift(Side s) const;   // additive constant on the side

    BetaPair beta_;
    double x0_, y0_, a_, b_;
    int p_;
};

/// The benchmark coefficient pairs: "1" -> (1,10), "2" -> (10,1),
/// "3a" -> (1,10000), "3b" -> (10000,1).
ProblemSpec make_example(std::string_view id);

}  // namespace dgife
