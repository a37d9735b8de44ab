#ifndef PSFLOW_POSITIVITY_HPP
#define PSFLOW_POSITIVITY_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "psflow/field.hpp"
#include "psflow/operators.hpp"

namespace psflow {

/// Interior subdomain Omega' with 16 rho margin from the boundary and a
/// Harnack chain of ball centers covering it: consecutive centers at
/// distance in (rho, 2 rho), every Omega' point within rho of some center.
struct SubdomainSpec {
    std::vector<int> indices;            ///< grid indices of Omega'
    double rho = 0.0;                    ///< chain ball radius (length units)
    double margin = 0.0;                 ///< 16 rho
    std::vector<std::array<double, 2>> chain;
    double measure = 0.0;                ///< |Omega'|_h
    double complement_measure = 0.0;     ///< |Omega \ Omega'|_h
};

namespace detail {

/// Lattice with fixed pitch, centered on [a, b].  The edge offset lands in
/// [0, pitch/2), so segment ends stay within pitch/2 of the first/last
/// point.
inline std::vector<double> lattice_axis(double a, double b, double pitch) {
    const double span = b - a;
    const int k = std::max(1, static_cast<int>(std::floor(span / pitch)) + 1);
    const double e = 0.5 * (span - (k - 1) * pitch);
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = a + e + i * pitch;
    return out;
}

/// Chain centers along [a, b]: pitch 1.45 rho lies in (rho, 2 rho) and the
/// edge offset < 0.725 rho keeps every segment point within rho of a center.
inline std::vector<double> chain_1d(double a, double b, double rho) {
    return lattice_axis(a, b, 1.45 * rho);
}

} // namespace detail

/// Builds Omega' with margin 16 rho, rho = rho_cells * h.
inline SubdomainSpec make_subdomain(const Grid& g, int rho_cells) {
    if (rho_cells < 1) throw parameter_error("make_subdomain: rho_cells must be >= 1");
    SubdomainSpec spec;
    spec.rho = rho_cells * g.spacing(0);
    spec.margin = 16.0 * spec.rho;

    for (int i = 0; i < g.size(); ++i) {
        if (g.is_boundary(i)) continue;
        if (g.boundary_distance(i) >= spec.margin - 1e-12) {
            spec.indices.push_back(i);
            spec.measure += g.node_weight(i);
        }
    }
    if (spec.indices.empty())
        throw geometry_error("make_subdomain: margin 16 rho leaves no interior points");
    spec.complement_measure = g.measure() - spec.measure;

    const double rho = spec.rho, m = spec.margin;
    switch (g.mode()) {
        case GridMode::cartesian_1d:
            for (double x : detail::chain_1d(m, g.extent(0) - m, rho))
                spec.chain.push_back({x, 0.0});
            break;
        case GridMode::radial:
            for (double x : detail::chain_1d(0.0, g.extent(0) - m, rho))
                spec.chain.push_back({x, 0.0});
            break;
        case GridMode::cartesian_2d: {
            // Serpentine over an x-lattice (pitch 1.45 rho) and y-rows
            // (pitch 0.8 rho).  Row hops land one column in from the turn
            // (diagonal 1.66 rho), then double back over the corner point,
            // so every consecutive distance stays inside (rho, 2 rho).
            // Worst covering distance is sqrt(0.725^2 + 0.4^2) = 0.83 rho.
            const auto xs = detail::lattice_axis(m, g.extent(0) - m, 1.45 * rho);
            const auto ys = detail::lattice_axis(m, g.extent(1) - m, 0.8 * rho);
            const int kx = static_cast<int>(xs.size());
            if (ys.size() == 1) {
                for (double x : xs) spec.chain.push_back({x, ys[0]});
            } else if (kx == 1) {
                for (double y : detail::chain_1d(m, g.extent(1) - m, rho))
                    spec.chain.push_back({xs[0], y});
            } else {
                for (std::size_t r = 0; r < ys.size(); ++r) {
                    const bool rightward = (r % 2 == 0);
                    const double y = ys[r];
                    if (r > 0) {  // double back over the turn column
                        spec.chain.push_back({rightward ? xs[1] : xs[kx - 2], y});
                        spec.chain.push_back({rightward ? xs[0] : xs[kx - 1], y});
                    }
                    if (rightward)
                        for (int c = r > 0 ? 1 : 0; c < kx; ++c) spec.chain.push_back({xs[c], y});
                    else
                        for (int c = kx - 2; c >= 0; --c) spec.chain.push_back({xs[c], y});
                }
            }
            break;
        }
    }
    return spec;
}

/// Checks the covering property and consecutive-ball intersection
/// combinatorially; returns a list of violated conditions (empty = sound).
inline std::vector<std::string> check_chain_soundness(const Grid& g, const SubdomainSpec& spec) {
    std::vector<std::string> bad;
    for (int idx : spec.indices) {
        const auto c = g.coords(idx);
        double best = 1e300;
        for (const auto& ctr : spec.chain)
            best = std::min(best, std::hypot(c[0] - ctr[0], c[1] - ctr[1]));
        if (best > spec.rho + 1e-12) {
            bad.push_back("point outside every chain ball");
            break;
        }
    }
    for (std::size_t k = 0; k + 1 < spec.chain.size(); ++k) {
        const double d = std::hypot(spec.chain[k][0] - spec.chain[k + 1][0],
                                    spec.chain[k][1] - spec.chain[k + 1][1]);
        if (!(d < 2.0 * spec.rho)) {
            bad.push_back("consecutive chain balls do not intersect");
            break;
        }
    }
    return bad;
}

struct SublevelMeasure {
    double measure_ge = 0.0;   ///< |Omega' cap {u >= L}| (closed threshold)
    double measure_gt = 0.0;   ///< open-threshold variant, reported when it differs
    double alpha_hat = 0.0;    ///< measure_ge / |Omega'|
};

/// Discrete measure of {x in Omega' : u(x) >= L} and its fraction of |Omega'|.
inline SublevelMeasure sublevel_measure(const Field& u, const SubdomainSpec& region, double L) {
    if (!(L > 0.0)) throw parameter_error("sublevel_measure: L must be positive");
    if (region.indices.empty()) throw geometry_error("sublevel_measure: empty region");
    SublevelMeasure out;
    const auto& w = u.grid().node_weights();
    for (int idx : region.indices) {
        if (u[idx] >= L) out.measure_ge += w[idx];
        if (u[idx] > L) out.measure_gt += w[idx];
    }
    out.alpha_hat = out.measure_ge / region.measure;
    return out;
}

struct VolumeConstraintAlpha {
    double bound = 0.0;        ///< (1 - L^{q+1}|Omega'| - M^{q+1}|Omega \ Omega'|) / M^{q+1}
    double measured = 0.0;     ///< |Omega' cap {u >= L}|
    double alpha_lower = 0.0;  ///< bound / |Omega'|
    bool hypotheses_hold = false;
    bool satisfied = false;    ///< measured >= bound - 1e-10 (given hypotheses)
    std::vector<std::string> violations;
};

/// The volume-constraint measure bound: with ||u||_{q+1} = 1, u <= M,
/// |Omega \ Omega'| <= 1/(4 M^{q+1}) and L^{q+1}|Omega'| <= 1/4,
///   |Omega' cap {u >= L}| >= (1 - L^{q+1}|Omega'| - M^{q+1}|Omega\Omega'|) / M^{q+1}.
/// The inequality itself needs only the norm and u <= M; a failure with the
/// hypotheses satisfied indicates quadrature or constraint drift (bug signal).
inline VolumeConstraintAlpha volume_constraint_alpha(const Field& u, const SubdomainSpec& region,
                                                      double M, double L, const FlowParams& fp) {
    VolumeConstraintAlpha out;
    const double q1 = fp.q + 1.0;
    const double nrm = lr_norm(u, q1);
    if (std::abs(nrm - 1.0) > 1e-10)
        out.violations.push_back("||u||_{q+1} != 1 (got " + std::to_string(nrm) + ")");
    if (u.max() > M)
        out.violations.push_back("M < max u");
    const double Mq1 = std::pow(M, q1);
    if (region.complement_measure > 1.0 / (4.0 * Mq1))
        out.violations.push_back("|Omega \\ Omega'| > 1/(4 M^{q+1})");
    if (std::pow(L, q1) * region.measure > 0.25)
        out.violations.push_back("L^{q+1} |Omega'| > 1/4");

    out.bound = (1.0 - std::pow(L, q1) * region.measure - Mq1 * region.complement_measure) / Mq1;
    out.alpha_lower = out.bound / region.measure;
    out.measured = sublevel_measure(u, region, L).measure_ge;
    out.hypotheses_hold = out.violations.empty();
    out.satisfied = out.measured >= out.bound - 1e-10;
    return out;
}

struct FloorSample {
    double t;
    double inf_u;
};

/// Per-time infimum of u over Omega'; positive for all t is the qualitative
/// conclusion of the interior-positivity results.
template <class Series>
std::vector<FloorSample> positivity_floor_track(const Series& series, const SubdomainSpec& region) {
    std::vector<FloorSample> out;
    for (const auto& row : series) {
        double inf = 1e300;
        for (int idx : region.indices) inf = std::min(inf, row.u[idx]);
        out.push_back({row.t, inf});
    }
    return out;
}

/// Stretched-time coordinate of the expansion-of-positivity argument:
///   -e^{-tau} = (t - T) / T  with T = delta L^{q+1-p} rho^p,
/// i.e. tau = -log(1 - t/T), monotone and bijective on t in [0, T).
inline double stretched_tau(double t, double T) {
    if (!(T > 0.0) || t < 0.0 || t >= T)
        throw range_error("stretched_tau: need 0 <= t < T with T > 0");
    return -std::log(1.0 - t / T);
}

inline double stretched_tau_inverse(double tau, double T) {
    return T * (1.0 - std::exp(-tau));
}

} // namespace psflow

#endif
