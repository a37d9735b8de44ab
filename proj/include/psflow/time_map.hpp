#ifndef PSFLOW_TIME_MAP_HPP
#define PSFLOW_TIME_MAP_HPP

#include <cmath>
#include <vector>

#include "psflow/interpolation.hpp"
#include "psflow/ode.hpp"
#include "psflow/operators.hpp"
#include "psflow/snapshot_store.hpp"

namespace psflow {

/// Monotone interpolant of gamma(s) = ||v(s)||_{q+1} over the stored
/// trajectory.  Requires the store to reach extinction and gamma to be
/// nonincreasing up to 1e-10.
inline MonotoneCubic build_gamma_interpolant(const SnapshotStore& store) {
    if (!store.extinction_time())
        throw data_integrity_error("build_gamma_interpolant: store has no extinction time");
    const auto& e = store.entries();
    if (e.size() < 2) throw data_integrity_error("build_gamma_interpolant: too few snapshots");
    std::vector<double> s(e.size()), g(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        s[k] = e[k].s;
        g[k] = e[k].gamma;
        if (k > 0 && g[k] > g[k - 1] + 1e-10)
            throw data_integrity_error("build_gamma_interpolant: stored gamma is not nonincreasing");
        if (k > 0 && g[k] > g[k - 1]) g[k] = g[k - 1];  // flatten sub-tolerance wiggles
    }
    return MonotoneCubic(std::move(s), std::move(g));
}

/// One sample of the reparametrization t -> (tau, Lambda, s, gamma).
struct TimeSample {
    double t;
    double tau;     ///< g(t)
    double Lambda;  ///< Lambda(g(t))
    double s;       ///< S* (1 - e^{-Lambda(g(t))})
    double gamma;   ///< gamma(t) = gamma(s(t))
};

/// Sampled monotone maps linking prototype time s to Sobolev-flow time t.
/// Carries both integration routes: the coupled (Lambda, g) system and the
/// collapsed autonomous ds/dt = gamma(s)^{(q+1)p/n}; their agreement is the
/// composition identity and is recorded in max_route_discrepancy.
struct TimeMap {
    double S_star = 0.0;
    std::vector<TimeSample> samples;
    MonotoneCubic gamma_of_s;
    double max_route_discrepancy = 0.0;  ///< max relative |s_route1 - s_route2|

    double t_end() const { return samples.empty() ? 0.0 : samples.back().t; }

    double s_of(double t) const {
        require_in_range(t);
        return lerp_on(&TimeSample::s, t);
    }
    double gamma_at(double t) const {
        require_in_range(t);
        return lerp_on(&TimeSample::gamma, t);
    }
    double lambda_at(double t) const { return lerp_on(&TimeSample::Lambda, t); }

    void require_in_range(double t) const {
        if (samples.empty() || t < samples.front().t - 1e-12 || t > samples.back().t + 1e-12)
            throw range_error("TimeMap: t outside the integrated range");
    }

private:
    double lerp_on(double TimeSample::*m, double t) const {
        // Samples are dense and uniform; linear interpolation keeps lookups monotone.
        if (t <= samples.front().t) return samples.front().*m;
        if (t >= samples.back().t) return samples.back().*m;
        std::size_t lo = 0, hi = samples.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (samples[mid].t <= t ? lo : hi) = mid;
        }
        const double w = (t - samples[lo].t) / (samples[lo + 1].t - samples[lo].t);
        return samples[lo].*m + w * (samples[lo + 1].*m - samples[lo].*m);
    }
};

struct TimeMapConfig {
    double abs_tol = 1e-9;           ///< ODE tolerance on Lambda and g
    int num_samples = 2000;          ///< dense output resolution
    double route_tol = 1e-6;         ///< allowed relative route discrepancy in s(t)
};

/// Integrates the reparametrization ODEs on top of a completed prototype run:
///   Lambda'(tau) = (S*)^{-1} gamma(S*(1-e^{-Lambda}))^{(q+1)p/n},
///   g'(t) = e^{Lambda(g(t))},  s(t) = S*(1-e^{-Lambda(g(t))}),
/// together with the collapsed route ds/dt = gamma(s)^{(q+1)p/n}.
inline TimeMap integrate_time_map(const SnapshotStore& store, const FlowParams& fp, double t_end,
                                  TimeMapConfig cfg = {}) {
    if (!(t_end > 0.0)) throw parameter_error("integrate_time_map: t_end must be positive");
    TimeMap map;
    map.S_star = store.extinction_time().value();
    map.gamma_of_s = build_gamma_interpolant(store);
    const double Sstar = map.S_star;
    const double expo = fp.time_scaling_exponent();
    const double s_hi = map.gamma_of_s.x_max();

    auto gamma_at_s = [&](double s) { return map.gamma_of_s(std::min(s, s_hi)); };

    // State: [Lambda(g(t)), g(t), s_collapsed(t)].
    AdaptiveRk4<3> ode(
        [&](double, const std::array<double, 3>& y) -> std::array<double, 3> {
            const double lam_comp = y[0];
            const double s1 = Sstar * (1.0 - std::exp(-lam_comp));
            const double gl = std::exp(lam_comp);
            return {std::pow(gamma_at_s(s1), expo) * gl / Sstar, gl,
                    std::pow(gamma_at_s(y[2]), expo)};
        },
        cfg.abs_tol);

    std::vector<double> times(cfg.num_samples + 1);
    for (int k = 0; k <= cfg.num_samples; ++k) times[k] = t_end * k / cfg.num_samples;

    map.samples.reserve(times.size());
    ode.integrate(0.0, {0.0, 0.0, 0.0}, times, [&](double t, const std::array<double, 3>& y) {
        const double s1 = Sstar * (1.0 - std::exp(-y[0]));
        map.samples.push_back({t, y[1], y[0], s1, gamma_at_s(s1)});
        if (t > 0.0) {
            const double rel = std::abs(s1 - y[2]) / std::max(std::abs(y[2]), 1e-300);
            map.max_route_discrepancy = std::max(map.max_route_discrepancy, rel);
        }
    });
    if (map.max_route_discrepancy > cfg.route_tol)
        throw integrator_inconsistency(
            "integrate_time_map: (Lambda,g) route and collapsed route disagree beyond tolerance");
    return map;
}

/// Smallest t with s(t) >= frac * S*, found by integrating the collapsed
/// route; used to pick the default reconstruction horizon.
inline double t_end_for_s_fraction(const SnapshotStore& store, const FlowParams& fp,
                                   double frac = 0.99) {
    const MonotoneCubic gam = build_gamma_interpolant(store);
    const double Sstar = store.extinction_time().value();
    const double expo = fp.time_scaling_exponent();
    const double target = frac * Sstar;
    double s = 0.0, t = 0.0;
    // RK4 on the scalar autonomous ODE with a fixed conservative step.
    const double dt = 1e-3;
    auto f = [&](double sv) { return std::pow(gam(std::min(sv, gam.x_max())), expo); };
    for (long k = 0; k < 100000000L && s < target; ++k) {
        const double k1 = f(s);
        const double k2 = f(s + 0.5 * dt * k1);
        const double k3 = f(s + 0.5 * dt * k2);
        const double k4 = f(s + dt * k3);
        s += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += dt;
    }
    return t;
}

/// Reconstructed constrained-flow state at one Sobolev time t.
struct Rescaled {
    Field u;
    double lambda_t;       ///< ||grad u||_p^p
    double gamma_t;
    double renormalization;///< |  ||v(s(t))/gamma(t)||_{q+1} - 1 |, interpolation drift
    double s;
};

/// u(., t) = v(., s(t)) / gamma(t), with v between snapshots interpolated
/// linearly in the v^q variable (the quantity the equation evolves) and the
/// result renormalized to ||u||_{q+1} = 1 exactly.
inline Rescaled rescale_solution(const SnapshotStore& store, const TimeMap& map,
                                 const FlowParams& fp, double t) {
    const double s = map.s_of(t);
    const auto& e = store.entries();
    std::size_t lo = 0, hi = e.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (e[mid].s <= s ? lo : hi) = mid;
    }
    const double span = e[lo + 1].s - e[lo].s;
    const double w = span > 0.0 ? std::clamp((s - e[lo].s) / span, 0.0, 1.0) : 0.0;

    Field u(e[lo].field.grid_ptr());
    const double q = fp.q;
    for (int i = 0; i < u.size(); ++i) {
        const double vq = (1.0 - w) * pow_q(e[lo].field[i], q) + w * pow_q(e[lo + 1].field[i], q);
        u[i] = vq <= 0.0 ? 0.0 : std::pow(vq, 1.0 / q);
    }
    const double gamma_t = map.gamma_at(t);
    if (!(gamma_t > 0.0)) throw range_error("rescale_solution: gamma vanished at requested t");
    for (int i = 0; i < u.size(); ++i) u[i] /= gamma_t;

    const double nrm = lr_norm(u, q + 1.0);
    for (int i = 0; i < u.size(); ++i) u[i] /= nrm;
    const double lambda_t = grad_p_energy(u, fp.p);
    return {std::move(u), lambda_t, gamma_t, std::abs(nrm - 1.0), s};
}

struct BoundednessRow {
    double t;
    double max_u;
    double bound;   ///< exp((1/q) int_0^t lambda) * max u0
    bool violated;
};

struct BoundednessReport {
    std::vector<BoundednessRow> rows;
    int violations = 0;
    double worst_margin = 0.0;  ///< max of max_u / bound
};

/// Checks max u(t) <= exp((1/q) int_0^t lambda dtau) max u0 (1 + 1e-6) with
/// trapezoidal quadrature of the sampled lambda.
template <class Series>
BoundednessReport boundedness_check(const Series& series, const Field& u0, const FlowParams& fp) {
    BoundednessReport rep;
    if (series.empty()) return rep;
    const double max_u0 = u0.max();
    double integral = 0.0;
    double prev_t = series.front().t, prev_lambda = series.front().lambda;
    for (const auto& row : series) {
        integral += 0.5 * (row.t - prev_t) * (row.lambda + prev_lambda);
        prev_t = row.t;
        prev_lambda = row.lambda;
        const double bound = std::exp(integral / fp.q) * max_u0;
        const double mu = row.u.max();
        const bool bad = mu > bound * (1.0 + 1e-6);
        rep.rows.push_back({row.t, mu, bound, bad});
        if (bad) ++rep.violations;
        rep.worst_margin = std::max(rep.worst_margin, mu / bound);
    }
    return rep;
}

} // namespace psflow

#endif
