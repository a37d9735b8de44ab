#ifndef PSFLOW_OPERATORS_HPP
#define PSFLOW_OPERATORS_HPP

#include <cmath>
#include <vector>

#include "psflow/field.hpp"
#include "psflow/params.hpp"

namespace psflow {

/// |g|^{p-2} g for p >= 2.  The degenerate case g = 0, p > 2 contributes
/// zero flux, which is the natural limit of the formula.
inline double flux_fn(double g, double p) {
    if (p == 2.0) return g;
    if (g == 0.0) return 0.0;
    return std::pow(std::abs(g), p - 2.0) * g;
}

/// d/dg of flux_fn: (p-1) |g|^{p-2}.
inline double flux_fn_deriv(double g, double p) {
    if (p == 2.0) return 1.0;
    if (g == 0.0) return 0.0;
    return (p - 1.0) * std::pow(std::abs(g), p - 2.0);
}

/// L^r norm against the grid's quadrature measure.
inline double lr_norm(const Field& f, double r) {
    if (r < 1.0) throw parameter_error("lr_norm: r must be >= 1");
    const auto& w = f.grid().node_weights();
    double acc = 0.0;
    for (int i = 0; i < f.size(); ++i) acc += w[i] * std::pow(std::abs(f[i]), r);
    return std::pow(acc, 1.0 / r);
}

/// Discrete pairing <f, g>_h = sum_i w_i f_i g_i.
inline double pairing(const Field& f, const Field& g) {
    f.require_same_grid(g, "pairing");
    const auto& w = f.grid().node_weights();
    double acc = 0.0;
    for (int i = 0; i < f.size(); ++i) acc += w[i] * f[i] * g[i];
    return acc;
}

/// Face-flux p-Dirichlet energy: sum over faces of w_f |d_f / h|^p.
/// Matches apply_p_laplacian so that <-Delta_p f, f>_h equals this exactly
/// for zero-boundary f (discrete summation by parts).
inline double grad_p_energy(const Field& f, double p) {
    double acc = 0.0;
    f.grid().for_each_face([&](int i, int j, double wf, double h) {
        const double d = (f[j] - f[i]) / h;
        acc += wf * std::pow(std::abs(d), p);
    });
    return acc;
}

/// Mixed face form int |grad f|^{p-2} grad f . grad g dmu_h.
inline double grad_p_pairing(const Field& f, const Field& g, double p) {
    f.require_same_grid(g, "grad_p_pairing");
    double acc = 0.0;
    f.grid().for_each_face([&](int i, int j, double wf, double h) {
        const double df = (f[j] - f[i]) / h;
        const double dg = (g[j] - g[i]) / h;
        acc += wf * flux_fn(df, p) * dg;
    });
    return acc;
}

/// Conservative face-flux divergence, premultiplied by the node weight:
/// out_i = w_i (Delta_p f)_i.  This is the form the implicit solver uses;
/// it makes the Jacobian symmetric.  Dirichlet nodes get 0.
inline Field weighted_p_laplacian(const Field& f, double p) {
    const Grid& g = f.grid();
    Field out(f.grid_ptr());
    g.for_each_face([&](int i, int j, double wf, double h) {
        // wf = area * h, so the flux through the face is (wf / h) * phi.
        const double flux = (wf / h) * flux_fn((f[j] - f[i]) / h, p);
        out[i] += flux;
        out[j] -= flux;
    });
    for (int i = 0; i < out.size(); ++i)
        if (g.is_boundary(i)) out[i] = 0.0;
    return out;
}

/// Pointwise p-Laplacian div(|grad f|^{p-2} grad f) at interior nodes
/// (radial mode: r^{1-n} d_r(r^{n-1} |d_r f|^{p-2} d_r f) with a zero-flux
/// symmetry face at r = 0).  Boundary nodes get 0.
inline Field apply_p_laplacian(const Field& f, double p) {
    if (!f.all_finite()) throw geometry_error("apply_p_laplacian: field has non-finite values");
    Field out = weighted_p_laplacian(f, p);
    const auto& w = f.grid().node_weights();
    for (int i = 0; i < out.size(); ++i)
        if (!f.grid().is_boundary(i)) out[i] /= w[i];
    return out;
}

/// Discrete p-Laplacian bound to a parameter set and grid.
struct PLaplacianOp {
    FlowParams params;
    GridPtr grid;

    Field apply(const Field& f) const {
        if (*f.grid_ptr() != *grid) throw geometry_error("PLaplacianOp: grid mismatch");
        return apply_p_laplacian(f, params.p);
    }
    double energy(const Field& f) const { return grad_p_energy(f, params.p); }
};

struct MonotonicityProbe {
    double lhs;    ///< (|xi|^{p-2} xi - |eta|^{p-2} eta) . (xi - eta)
    double bound;  ///< 2^{2-p} |xi - eta|^p
};

/// Evaluates both sides of the algebraic flux-monotonicity inequality for
/// p >= 2.  The constant 2^{2-p} is the tested candidate; the caller asserts
/// lhs >= bound.
inline MonotonicityProbe flux_monotonicity_probe(const std::vector<double>& xi,
                                                 const std::vector<double>& eta, double p) {
    if (p < 2.0) throw parameter_error("flux_monotonicity_probe: stated for p >= 2 only");
    if (xi.size() != eta.size()) throw parameter_error("flux_monotonicity_probe: dimension mismatch");
    double nx = 0.0, ne = 0.0, nd = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        nx += xi[k] * xi[k];
        ne += eta[k] * eta[k];
        nd += (xi[k] - eta[k]) * (xi[k] - eta[k]);
    }
    nx = std::sqrt(nx);
    ne = std::sqrt(ne);
    nd = std::sqrt(nd);
    const double ax = (p == 2.0) ? 1.0 : (nx == 0.0 ? 0.0 : std::pow(nx, p - 2.0));
    const double ae = (p == 2.0) ? 1.0 : (ne == 0.0 ? 0.0 : std::pow(ne, p - 2.0));
    double lhs = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k)
        lhs += (ax * xi[k] - ae * eta[k]) * (xi[k] - eta[k]);
    const double bound = std::pow(2.0, 2.0 - p) * std::pow(nd, p);
    return {lhs, bound};
}

} // namespace psflow

#endif
