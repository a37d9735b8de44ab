#ifndef PSFLOW_TALENTI_HPP
#define PSFLOW_TALENTI_HPP

#include <array>
#include <cmath>
#include <utility>

#include "psflow/field.hpp"
#include "psflow/params.hpp"

namespace psflow {

using Point = std::array<double, 2>;

inline double dist(const Point& a, const Point& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

/// Parameters of the closed-form radial profile Y solving -Delta_p Y = Y^q
/// on R^n, plus the separable ODE data (mu, Z0) that turn it into a
/// comparison supersolution of the prototype flow.
struct TalentiProfile {
    double lam = 1.0;     ///< scale parameter, > 0
    Point center{0.0, 0.0};
    FlowParams params;
    double mu = -1.0;     ///< separation constant, < 0
    double Z0 = 1.0;      ///< initial value of the time factor Z(s)
};

/// General two-parameter family Y_{a,b,y}(x) = (a + b |x-y|^{p/(p-1)})^{-(n-p)/p}.
inline double talenti_general(double a, double b, const Point& y, const Point& x,
                              const FlowParams& fp) {
    const double r = dist(x, y);
    const double e = fp.p / (fp.p - 1.0);
    return std::pow(a + b * std::pow(r, e), -(fp.n - fp.p) / fp.p);
}

/// One-parameter family solving -Delta_p Y = Y^q on R^n:
///   Y(x) = A^{(n-p)/p^2} lam^{-(n-p)/p} (1 + (|x-y|/lam)^{p/(p-1)})^{-(n-p)/p},
/// with A = n ((n-p)/(p-1))^{p-1}.  Equivalently Y = Y_{a,b,y} with
/// a = lam / A^{1/p}, b = lam^{-1/(p-1)} / A^{1/p}, which satisfies the
/// normalization A a b^{p-1} = 1 for every lam.  (At p = 2 the front factor
/// is the classical (n(n-2))^{(n-2)/4}.)
inline double talenti_value(const TalentiProfile& prof, const Point& x) {
    if (!(prof.lam > 0.0)) throw parameter_error("talenti_value: lam must be positive");
    const FlowParams& fp = prof.params;
    const double n = fp.n, p = fp.p;
    const double A = n * std::pow((n - p) / (p - 1.0), p - 1.0);
    const double front =
        std::pow(A, (n - p) / (p * p)) * std::pow(prof.lam, -(n - p) / p);
    const double r = dist(x, prof.center);
    const double e = p / (p - 1.0);
    return front * std::pow(1.0 + std::pow(r / prof.lam, e), -(n - p) / p);
}

/// The (a, b) pair identifying talenti_value(lam) inside the general family.
inline std::pair<double, double> talenti_ab(double lam, const FlowParams& fp) {
    const double A = fp.n * std::pow((fp.n - fp.p) / (fp.p - 1.0), fp.p - 1.0);
    const double Ainv = std::pow(A, -1.0 / fp.p);
    return {lam * Ainv, std::pow(lam, -1.0 / (fp.p - 1.0)) * Ainv};
}

/// Samples Y on a grid (radial mode: x is the radius from the center).
inline Field talenti_field(GridPtr grid, const TalentiProfile& prof) {
    return sample_field(grid, [&](const Point& x) { return talenti_value(prof, x); });
}

/// Closed-form solution of (Z^q)' = mu Z^{p-1} with Z(0) = Z0 > 0, mu < 0:
///   Z(s) = Z0 (1 + mu ((q+1-p)/q) Z0^{p-(q+1)} s)_+^{1/(q+1-p)}.
/// Vanishes at s = -q Z0^{q+1-p} / (mu (q+1-p)) and stays 0 after.
inline double z_profile(double Z0, double mu, double s, const FlowParams& fp) {
    if (mu >= 0.0) throw parameter_error("z_profile: mu must be negative");
    if (!(Z0 > 0.0)) throw parameter_error("z_profile: Z0 must be positive");
    const double inner = 1.0 + mu * (fp.q1p / fp.q) * std::pow(Z0, fp.p - (fp.q + 1.0)) * s;
    if (inner <= 0.0) return 0.0;
    return Z0 * std::pow(inner, 1.0 / fp.q1p);
}

/// Time at which z_profile reaches zero.
inline double z_vanishing_time(double Z0, double mu, const FlowParams& fp) {
    return -fp.q * std::pow(Z0, fp.q1p) / (mu * fp.q1p);
}

/// min over the grid of Y; Y is radially decreasing, so this sits at the
/// node farthest from the center (asserted by the tests, not assumed here).
inline double min_on_grid(const Field& yfield) { return yfield.min(); }

/// Extinction-time bound (q/(q+1-p)) (max u0 / min_Omega Y)^{q+1-p}.
inline double extinction_bound(const Field& u0, const TalentiProfile& prof) {
    const Field y = talenti_field(u0.grid_ptr(), prof);
    const double ratio = u0.max() / min_on_grid(y);
    return prof.params.q / prof.params.q1p * std::pow(ratio, prof.params.q1p);
}

/// Fixes Z0 = (max u0 / min_Omega Y) (-mu)^{1/(q+1-p)} so that the separable
/// supersolution dominates u0 at s = 0.
inline TalentiProfile make_comparison_profile(const Field& u0, double lam, const Point& center,
                                              const FlowParams& fp, double mu = -1.0) {
    TalentiProfile prof{lam, center, fp, mu, 1.0};
    const Field y = talenti_field(u0.grid_ptr(), prof);
    prof.Z0 = (u0.max() / min_on_grid(y)) * std::pow(-mu, 1.0 / fp.q1p);
    return prof;
}

/// Separable comparison supersolution V(x, s) = (-mu)^{-1/(q+1-p)} Y(x) Z(s).
inline double comparison_supersolution(const TalentiProfile& prof, const Point& x, double s) {
    const double scale = std::pow(-prof.mu, -1.0 / prof.params.q1p);
    return scale * talenti_value(prof, x) * z_profile(prof.Z0, prof.mu, s, prof.params);
}

} // namespace psflow

#endif
