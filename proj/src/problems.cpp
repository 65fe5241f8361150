#include "dgife/problems.hpp"

namespace dgife {

ProblemSpec::ProblemSpec(BetaPair beta, double x0, double y0, double a, double b, int p)
    : beta_(beta), x0_(x0), y0_(y0), a_(a), b_(b), p_(p) {
    if (!(beta.minus > 0.0) || !(beta.plus > 0.0))
        throw std::invalid_argument("ProblemSpec: coefficients must be positive");
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("ProblemSpec: semi-axes must be positive");
    if (p < 2) throw std::invalid_argument("ProblemSpec: exponent must be >= 2");
}

double ProblemSpec::r2(Vec2 p) const {
    const double dx = (p.x - x0_) / a_;
    const double dy = (p.y - y0_) / b_;
    return dx * dx + dy * dy;
}

InterfaceCurve ProblemSpec::curve() const {
    const double x0 = x0_, y0 = y0_, a = a_, b = b_;
    return InterfaceCurve(
        [x0, y0, a, b](Vec2 p) {
            const double dx = (p.x - x0) / a;
            const double dy = (p.y - y0) / b;
            return std::sqrt(dx * dx + dy * dy) - 1.0;
        },
        1.0);
}

Side ProblemSpec::side_of(Vec2 p) const {
    return snapped_side(r(p) - 1.0, 1e-12);
}

double ProblemSpec::coeff(Side s) const { return 1.0 / beta_.on(s); }

double ProblemSpec::shift(Side s) const {
    return s == Side::Minus ? 0.0 : 1.0 / beta_.minus - 1.0 / beta_.plus;
}

double ProblemSpec::exact_on_side(Vec2 p, double t, Side s) const {
    return (coeff(s) * std::pow(r(p), p_) + shift(s)) * std::exp(t);
}

double ProblemSpec::exact(Vec2 p, double t) const { return exact_on_side(p, t, side_of(p)); }

Vec2 ProblemSpec::exact_grad_on_side(Vec2 p, double t, Side s) const {
    // grad(r^p) = p r^(p-2) ((x-x0)/a^2, (y-y0)/b^2)
    const double rp2 = std::pow(r(p), p_ - 2);
    const double factor = coeff(s) * p_ * rp2 * std::exp(t);
    return {factor * (p.x - x0_) / (a_ * a_), factor * (p.y - y0_) / (b_ * b_)};
}

Vec2 ProblemSpec::exact_grad(Vec2 p, double t) const {
    return exact_grad_on_side(p, t, side_of(p));
}

Vec2 ProblemSpec::flux(Vec2 p, double t) const {
    const Side s = side_of(p);
    return beta_.on(s) * exact_grad_on_side(p, t, s);
}

double ProblemSpec::source(Vec2 p, double t) const {
    // laplace(r^p) = p(p-2) r^(p-4) (dx^2/a^4 + dy^2/b^4) + p r^(p-2) (1/a^2 + 1/b^2)
    const Side s = side_of(p);
    const double rr = r(p);
    const double dx = p.x - x0_, dy = p.y - y0_;
    const double lap = p_ * (p_ - 2) * std::pow(rr, p_ - 4) *
                           (dx * dx / (a_ * a_ * a_ * a_) + dy * dy / (b_ * b_ * b_ * b_)) +
                       p_ * std::pow(rr, p_ - 2) * (1.0 / (a_ * a_) + 1.0 / (b_ * b_));
    // u_t = u and beta * coeff = 1, so f = u - beta * coeff * lap * e^t
    return (coeff(s) * std::pow(rr, p_) + shift(s) - lap) * std::exp(t);
}

double ProblemSpec::dirichlet(Vec2 p, double t) const { return exact(p, t); }

double ProblemSpec::initial(Vec2 p) const { return exact(p, 0.0); }

ExactSolutionFields ProblemSpec::fields_at(double t) const {
    ExactSolutionFields fields;
    fields.value = [this, t](Vec2 p) { return exact(p, t); };
    fields.gradient = [this, t](Vec2 p) { return exact_grad(p, t); };
    fields.beta_gradient = [this, t](Vec2 p) { return flux(p, t); };
    return fields;
}

ProblemSpec make_example(std::string_view id) {
    if (id == "1") return ProblemSpec(BetaPair{1.0, 10.0});
    if (id == "2") return ProblemSpec(BetaPair{10.0, 1.0});
    if (id == "3a") return ProblemSpec(BetaPair{1.0, 10000.0});
    if (id == "3b") return ProblemSpec(BetaPair{10000.0, 1.0});
    throw std::invalid_argument("make_example: unknown example id '" + std::string(id) + "'");
}

}  // namespace dgife
