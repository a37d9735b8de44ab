#ifndef PSFLOW_PARAMS_HPP
#define PSFLOW_PARAMS_HPP

#include <cmath>
#include <sstream>

#include "psflow/errors.hpp"

namespace psflow {

/// Exponent bookkeeping for the flow.  All derived exponents are computed
/// once from (n, p); every solver and check reads them from here.
///
/// q = p* - 1 with p* = n p / (n - p), so q + 1 - p = p^2/(n-p) > 0 and the
/// identity (q+1) p / n == q + 1 - p holds exactly (used by the time maps).
struct FlowParams {
    int n = 0;            ///< spatial dimension parameter of the equation (n >= 3)
    double p = 0.0;       ///< exponent, 2 <= p < n
    double p_star = 0.0;  ///< Sobolev conjugate n p / (n - p)
    double q = 0.0;       ///< p_star - 1
    double q1p = 0.0;     ///< q + 1 - p  (positive)

    double newton_tol = 1e-9;       ///< max-norm tolerance on the implicit step residual
    double quad_tol = 1e-12;        ///< slack for quadrature-exact identities
    double extinction_eps = 1e-8;   ///< extinction threshold relative to max |u0|

    /// Exponent of gamma in ds/dt = gamma^((q+1)p/n); equals q1p identically.
    double time_scaling_exponent() const { return (q + 1.0) * p / static_cast<double>(n); }
};

/// Builds FlowParams from (n, p), rejecting values outside n >= 3, 2 <= p < n.
inline FlowParams make_params(int n, double p) {
    if (n < 3) {
        std::ostringstream os;
        os << "make_params: n = " << n << " outside domain n >= 3";
        throw parameter_error(os.str());
    }
    if (!(p >= 2.0) || !(p < static_cast<double>(n))) {
        std::ostringstream os;
        os << "make_params: p = " << p << " outside domain [2, n) with n = " << n;
        throw parameter_error(os.str());
    }
    FlowParams fp;
    fp.n = n;
    fp.p = p;
    fp.p_star = static_cast<double>(n) * p / (static_cast<double>(n) - p);
    fp.q = fp.p_star - 1.0;
    fp.q1p = fp.q + 1.0 - p;
    return fp;
}

/// |x|^q with the sign conventions of the flow: arguments are clamped at 0
/// first, since solution fields are nonnegative and q may be non-integer.
inline double pow_q(double v, double q) {
    return v <= 0.0 ? 0.0 : std::pow(v, q);
}

} // namespace psflow

#endif
