#ifndef PSFLOW_INITIAL_DATA_HPP
#define PSFLOW_INITIAL_DATA_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "psflow/field.hpp"
#include "psflow/operators.hpp"
#include "psflow/talenti.hpp"

namespace psflow {

/// Divides by the L^{q+1} norm so that ||u0||_{q+1} = 1.
inline Field normalize_initial(const Field& u0_raw, const FlowParams& fp) {
    if (!u0_raw.all_finite() || u0_raw.min() < 0.0)
        throw degenerate_data_error("normalize_initial: data must be finite and nonnegative");
    const double nrm = lr_norm(u0_raw, fp.q + 1.0);
    if (nrm <= 0.0)
        throw degenerate_data_error("normalize_initial: identically zero initial data");
    Field out = u0_raw;
    for (int i = 0; i < out.size(); ++i) out[i] /= nrm;
    if (std::abs(lr_norm(out, fp.q + 1.0) - 1.0) > fp.quad_tol)
        throw invariant_failure("normalize_initial: quadrature did not reproduce the unit norm");
    return out;
}

/// Smooth sine bump: product of sin(pi x_a / L_a) over axes; radial mode
/// uses cos(pi r / 2R).  Zero exactly on the Dirichlet boundary.
inline Field preset_bump(GridPtr grid, double amplitude = 1.0) {
    const Grid& g = *grid;
    Field out = sample_field(grid, [&](const Point& c) {
        switch (g.mode()) {
            case GridMode::cartesian_1d:
                return amplitude * std::sin(std::numbers::pi * c[0] / g.extent(0));
            case GridMode::radial:
                return amplitude * std::cos(0.5 * std::numbers::pi * c[0] / g.extent(0));
            case GridMode::cartesian_2d:
                return amplitude * std::sin(std::numbers::pi * c[0] / g.extent(0)) *
                       std::sin(std::numbers::pi * c[1] / g.extent(1));
        }
        return 0.0;
    });
    out.set_boundary_zero();
    return out;
}

/// Constant plateau of the given height with a linear ramp of the given
/// width down to the boundary (W^{1,inf} data, steep but bounded gradient).
inline Field preset_plateau(GridPtr grid, double height = 1.0, double ramp = 0.1) {
    const Grid& g = *grid;
    if (!(ramp > 0.0)) throw parameter_error("preset_plateau: ramp width must be positive");
    Field out = sample_field(grid, [&](const Point& c) {
        (void)c;
        return 0.0;
    });
    for (int i = 0; i < out.size(); ++i) {
        const double d = g.boundary_distance(i);
        out[i] = height * std::clamp(d / ramp, 0.0, 1.0);
    }
    out.set_boundary_zero();
    return out;
}

/// Talenti profile truncated at its boundary minimum: Y - min_Omega Y,
/// centered at the domain center (radial: the origin).  Positive in the
/// interior, zero on the boundary, W^{1,p}_0.
inline Field preset_truncated_talenti(GridPtr grid, const FlowParams& fp, double lam = 1.0) {
    const Grid& g = *grid;
    Point center{0.0, 0.0};
    if (g.mode() == GridMode::cartesian_1d) center = {0.5 * g.extent(0), 0.0};
    if (g.mode() == GridMode::cartesian_2d) center = {0.5 * g.extent(0), 0.5 * g.extent(1)};
    TalentiProfile prof{lam, center, fp, -1.0, 1.0};
    Field y = talenti_field(grid, prof);
    // Truncate at the largest boundary value so the cut is continuous.
    double floor = 0.0;
    for (int i = 0; i < y.size(); ++i)
        if (g.is_boundary(i)) floor = std::max(floor, y[i]);
    for (int i = 0; i < y.size(); ++i) y[i] = std::max(y[i] - floor, 0.0);
    y.set_boundary_zero();
    return y;
}

/// Named preset dispatch used by the config loader.
inline Field make_preset(const std::string& name, GridPtr grid, const FlowParams& fp,
                         double amplitude, double ramp, double lam) {
    if (name == "bump") return preset_bump(grid, amplitude);
    if (name == "plateau") return preset_plateau(grid, amplitude, ramp);
    if (name == "truncated_talenti") return preset_truncated_talenti(grid, fp, lam);
    throw parameter_error("unknown initial-data preset '" + name + "'");
}

} // namespace psflow

#endif
