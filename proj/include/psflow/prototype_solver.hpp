#ifndef PSFLOW_PROTOTYPE_SOLVER_HPP
#define PSFLOW_PROTOTYPE_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "psflow/operators.hpp"
#include "psflow/snapshot_store.hpp"

namespace psflow {

/// Outcome of one implicit step.
struct StepResult {
    Field v;
    bool converged = false;
    int newton_iters = 0;
    double residual_max = 0.0;   ///< final pointwise residual max-norm
    double clamp_magnitude = 0.0;///< largest negative undershoot projected away
};

namespace detail {

/// Weighted residual of the backward-Euler step equation:
///   G_i = w_i (v_i^q - b_i)/ds - (weighted p-Laplacian of v)_i,   b = v_prev^q.
/// Zero at Dirichlet nodes.
inline void step_residual(const Field& v, const std::vector<double>& b, double ds, double q,
                          double p, Field& out) {
    out = weighted_p_laplacian(v, p);
    const Grid& g = v.grid();
    const auto& w = g.node_weights();
    for (int i = 0; i < v.size(); ++i) {
        if (g.is_boundary(i)) {
            out[i] = 0.0;
        } else {
            out[i] = w[i] * (pow_q(v[i], q) - b[i]) / ds - out[i];
        }
    }
}

/// Matrix-free product with the step Jacobian
///   J = diag(w_i q v_i^{q-1} / ds) + K(v),
/// where K is the face-assembled derivative of the weighted p-Laplacian.
/// J is symmetric positive definite for p >= 2; the mass diagonal is floored
/// at 1e-14 where v degenerates.
struct StepJacobian {
    const Field* v;
    double ds, q, p;
    std::vector<double> mass_diag;   // floored
    std::vector<double> face_coeff;  // (wf/h^2) * phi'(d) per face, in visit order
    std::vector<double> full_diag;   // mass + K diagonal, for Jacobi preconditioning

    void rebuild(const Field& vv) {
        v = &vv;
        const Grid& g = vv.grid();
        const auto& w = g.node_weights();
        mass_diag.assign(vv.size(), 0.0);
        full_diag.assign(vv.size(), 0.0);
        for (int i = 0; i < vv.size(); ++i)
            mass_diag[i] = std::max(w[i] * q * pow_q(vv[i], q - 1.0) / ds, 1e-14);
        face_coeff.clear();
        g.for_each_face([&](int i, int j, double wf, double h) {
            const double c = (wf / (h * h)) * flux_fn_deriv((vv[j] - vv[i]) / h, p);
            face_coeff.push_back(c);
            full_diag[i] += c;
            full_diag[j] += c;
        });
        for (int i = 0; i < vv.size(); ++i) full_diag[i] += mass_diag[i];
    }

    /// y = J x, with x zero at Dirichlet nodes (enforced on output).
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const Grid& g = v->grid();
        const int n = static_cast<int>(x.size());
        for (int i = 0; i < n; ++i) y[i] = mass_diag[i] * x[i];
        std::size_t k = 0;
        g.for_each_face([&](int i, int j, double, double) {
            const double f = face_coeff[k++] * (x[j] - x[i]);
            y[i] -= f;
            y[j] += f;
        });
        for (int i = 0; i < n; ++i)
            if (g.is_boundary(i)) y[i] = 0.0;
    }
};

/// Jacobi-preconditioned conjugate gradients on J x = rhs over non-Dirichlet
/// nodes.  rel_tol is on the residual 2-norm.
inline void pcg(const StepJacobian& J, const std::vector<double>& rhs, std::vector<double>& x,
                double rel_tol, int max_iter) {
    const Grid& g = J.v->grid();
    const int n = static_cast<int>(rhs.size());
    x.assign(n, 0.0);
    std::vector<double> r = rhs, z(n), pdir(n), Ap(n);
    for (int i = 0; i < n; ++i)
        if (g.is_boundary(i)) r[i] = 0.0;
    double rhs_norm = 0.0;
    for (int i = 0; i < n; ++i) rhs_norm += r[i] * r[i];
    rhs_norm = std::sqrt(rhs_norm);
    if (rhs_norm == 0.0) return;
    auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (int i = 0; i < n; ++i) out[i] = g.is_boundary(i) ? 0.0 : in[i] / J.full_diag[i];
    };
    precond(r, z);
    pdir = z;
    double rz = 0.0;
    for (int i = 0; i < n; ++i) rz += r[i] * z[i];
    for (int it = 0; it < max_iter; ++it) {
        J.apply(pdir, Ap);
        double pAp = 0.0;
        for (int i = 0; i < n; ++i) pAp += pdir[i] * Ap[i];
        if (pAp <= 0.0) break;
        const double alpha = rz / pAp;
        double rn = 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * pdir[i];
            r[i] -= alpha * Ap[i];
            rn += r[i] * r[i];
        }
        if (std::sqrt(rn) <= rel_tol * rhs_norm) break;
        precond(r, z);
        double rz_new = 0.0;
        for (int i = 0; i < n; ++i) rz_new += r[i] * z[i];
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) pdir[i] = z[i] + beta * pdir[i];
    }
}

} // namespace detail

/// One backward-Euler step of the prototype flow: solves
///   (v^q - v_prev^q)/ds - Delta_p v = 0
/// at interior nodes by damped Newton (projected at 0, line search halving
/// up to 30 times), matrix-free PCG inside.  Convergence is measured on the
/// pointwise residual max-norm against newton_tol.
inline StepResult step_prototype(const Field& v_prev, double ds, const FlowParams& fp,
                                 int max_newton = 40) {
    if (!(ds > 0.0)) throw parameter_error("step_prototype: ds must be positive");
    const Grid& g = v_prev.grid();
    const auto& w = g.node_weights();
    const double q = fp.q, p = fp.p;

    std::vector<double> b(v_prev.size());
    double max_b = 0.0;
    for (int i = 0; i < v_prev.size(); ++i) {
        b[i] = pow_q(v_prev[i], q);
        max_b = std::max(max_b, b[i]);
    }
    // Rounding floor of the residual: (v^q - b)/ds cannot be resolved below
    // eps * max b / ds, so tiny steps relax the effective tolerance.
    const double tol_eff =
        std::max(fp.newton_tol, 32.0 * std::numeric_limits<double>::epsilon() * max_b / ds);

    StepResult res;
    res.v = v_prev;
    Field r(v_prev.grid_ptr()), r_trial(v_prev.grid_ptr());
    detail::step_residual(res.v, b, ds, q, p, r);

    auto pointwise_max = [&](const Field& rr) {
        double m = 0.0;
        for (int i = 0; i < rr.size(); ++i)
            if (!g.is_boundary(i)) m = std::max(m, std::abs(rr[i]) / w[i]);
        return m;
    };
    auto norm2 = [&](const Field& rr) {
        double a = 0.0;
        for (int i = 0; i < rr.size(); ++i) a += rr[i] * rr[i];
        return std::sqrt(a);
    };

    detail::StepJacobian J{nullptr, ds, q, p, {}, {}, {}};
    std::vector<double> delta, rhs(v_prev.size());
    res.residual_max = pointwise_max(r);

    while (res.residual_max > tol_eff && res.newton_iters < max_newton) {
        ++res.newton_iters;
        J.rebuild(res.v);
        for (int i = 0; i < res.v.size(); ++i) rhs[i] = -r[i];
        detail::pcg(J, rhs, delta, 1e-2 * fp.newton_tol, 8 * res.v.size());

        const double r0 = norm2(r);
        double step = 1.0;
        bool improved = false;
        Field v_trial = res.v;
        for (int ls = 0; ls < 30; ++ls) {
            double clamp = 0.0;
            for (int i = 0; i < res.v.size(); ++i) {
                if (g.is_boundary(i)) continue;
                double x = res.v[i] + step * delta[i];
                if (x < 0.0) {
                    clamp = std::max(clamp, -x);
                    x = 0.0;
                }
                v_trial[i] = x;
            }
            detail::step_residual(v_trial, b, ds, q, p, r_trial);
            if (norm2(r_trial) <= (1.0 - 0.25 * step) * r0) {
                res.clamp_magnitude = std::max(res.clamp_magnitude, clamp);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;  // stalled at the attainable accuracy
        res.v = v_trial;
        r = r_trial;
        res.residual_max = pointwise_max(r);
    }
    res.converged = res.residual_max <= tol_eff;
    return res;
}

/// Step-control and bookkeeping knobs for a prototype run.
struct PrototypeRunConfig {
    double ds_init = 1e-4;
    double ds_min = 1e-9;
    double ds_max = 1e-3;
    bool adaptive = true;          ///< false: fixed ds = ds_init (halving only on Newton failure)
    double gamma_step_factor = 0.5;///< ds <= factor * gamma^{q+1-p} (intrinsic time scale)
    double growth = 1.2;           ///< ds growth per accepted step
    double energy_budget = 1e-6;   ///< per-step energy-balance residual budget (adaptive mode)
    double snapshot_cadence_s = 0.0; ///< 0: snapshot every accepted step
    double snapshot_gamma_factor = 0.05; ///< densify cadence to <= factor * gamma^{q+1-p} near extinction (0: off)
    long max_steps = 2000000;
};

/// A prototype-flow run: parameters, initial state, controls, results.
struct PrototypeRun {
    FlowParams params;
    Field u0;                      ///< nonnegative, zero boundary
    PrototypeRunConfig config;
    SnapshotStore store;
    bool completed = false;
    long total_steps = 0;
    double max_overshoot = 0.0;    ///< worst (max v_next - max v_prev)_+ over accepted steps
    double max_undershoot = 0.0;   ///< worst (-min v_next)_+ over accepted steps
    long accuracy_warnings = 0;    ///< steps whose pre-clamp undershoot exceeded 1e-8
};

/// Integrates the prototype flow until max |v| < extinction_eps * max |u0|,
/// recording snapshots at the configured cadence and the dense energy
/// ledger.  ds adapts to Newton failures, the per-step energy budget, and
/// the amplitude scale gamma^{q+1-p}.  Hitting the step cap leaves
/// run.completed = false with the partial store intact (incomplete run).
inline SnapshotStore& run_to_extinction(PrototypeRun& run) {
    const FlowParams& fp = run.params;
    const double q = fp.q, p = fp.p;
    Field v = run.u0;
    if (!v.boundary_is_zero()) throw degenerate_data_error("run_to_extinction: u0 must vanish on the boundary");
    const double eps_abs = fp.extinction_eps * v.max();
    if (!(eps_abs > 0.0)) throw degenerate_data_error("run_to_extinction: u0 is identically zero");

    double s = 0.0;
    double ds = run.config.ds_init;
    double gamma = lr_norm(v, q + 1.0);
    double energy = grad_p_energy(v, p);
    double dissipation = 0.0;

    run.store = SnapshotStore{};
    run.store.append({s, v, gamma, energy});
    run.store.ledger().push_back({s, gamma, std::pow(gamma, q + 1.0), energy, 0.0, v.max(), v.min(), 0.0, 0, 0.0});
    double next_snapshot = run.config.snapshot_cadence_s;

    while (v.max() >= eps_abs) {
        if (run.total_steps >= run.config.max_steps) {
            run.completed = false;
            return run.store;
        }
        StepResult st = step_prototype(v, ds, fp);
        if (!st.converged) {
            if (ds <= run.config.ds_min * (1.0 + 1e-12))
                throw invariant_failure("run_to_extinction: Newton failed at ds_min");
            ds = std::max(0.5 * ds, run.config.ds_min);
            continue;
        }
        const double gamma_new = lr_norm(st.v, q + 1.0);
        const double energy_new = grad_p_energy(st.v, p);
        // Per-step energy-balance defect, trapezoidal in time.
        const double resid = std::pow(gamma_new, q + 1.0) - std::pow(gamma, q + 1.0) +
                             (q + 1.0) / q * 0.5 * ds * (energy + energy_new);
        if (run.config.adaptive && std::abs(resid) > run.config.energy_budget &&
            ds > run.config.ds_min * (1.0 + 1e-12)) {
            ds = std::max(0.5 * ds, run.config.ds_min);
            continue;
        }

        run.max_overshoot = std::max(run.max_overshoot, st.v.max() - v.max());
        run.max_undershoot = std::max(run.max_undershoot, -st.v.min());
        if (st.clamp_magnitude > 1e-8) ++run.accuracy_warnings;

        dissipation += (q + 1.0) / q * 0.5 * ds * (energy + energy_new);
        v = st.v;
        s += ds;
        gamma = gamma_new;
        energy = energy_new;
        ++run.total_steps;
        run.store.ledger().push_back({s, gamma, std::pow(gamma, q + 1.0), energy, dissipation,
                                      v.max(), v.min(), ds, st.newton_iters, resid});

        const bool extinct = v.max() < eps_abs;
        if (run.config.snapshot_cadence_s <= 0.0 || s >= next_snapshot - 1e-15 || extinct) {
            run.store.append({s, v, gamma, energy});
            if (run.config.snapshot_cadence_s > 0.0) {
                // The intrinsic time scale shrinks like gamma^{q+1-p}; keep
                // snapshot spacing below it so interpolation in s stays
                // accurate up to extinction.
                double cadence = run.config.snapshot_cadence_s;
                if (run.config.snapshot_gamma_factor > 0.0)
                    cadence = std::min(cadence,
                                       run.config.snapshot_gamma_factor * std::pow(gamma, fp.q1p));
                next_snapshot = s + cadence;
            }
        }

        if (run.config.adaptive) {
            double cap = run.config.gamma_step_factor * std::pow(gamma, fp.q1p);
            ds = std::min({run.config.growth * ds, run.config.ds_max, std::max(cap, run.config.ds_min)});
        }
    }
    run.store.set_extinction_time(s);
    run.completed = true;
    return run.store;
}

/// One energy-balance interval of the report.
struct IntervalResidual {
    double s1, s2;
    double residual;  ///< ||v(s2)||^{q+1} + (q+1)/q int_{s1}^{s2} ||grad v||_p^p - ||v(s1)||^{q+1}
};

/// Per-snapshot-interval energy-balance residuals.  The time integral uses
/// the dense per-step ledger samples (trapezoid) when available, otherwise
/// the snapshot endpoints.
inline std::vector<IntervalResidual> energy_balance_report(const SnapshotStore& store,
                                                           const FlowParams& fp) {
    std::vector<IntervalResidual> out;
    const auto& e = store.entries();
    if (e.size() < 2) return out;
    const auto& led = store.ledger();
    const double c = (fp.q + 1.0) / fp.q;

    std::size_t lo = 0;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
        const double s1 = e[k].s, s2 = e[k + 1].s;
        double integral = 0.0;
        if (led.size() >= 2) {
            while (lo + 1 < led.size() && led[lo + 1].s <= s1 + 1e-15) ++lo;
            std::size_t hi = lo;
            while (hi + 1 < led.size() && led[hi + 1].s <= s2 + 1e-15) ++hi;
            for (std::size_t i = lo; i < hi; ++i)
                integral += 0.5 * (led[i + 1].s - led[i].s) * (led[i].grad_energy + led[i + 1].grad_energy);
            lo = hi;
        } else {
            integral = 0.5 * (s2 - s1) * (e[k].grad_energy + e[k + 1].grad_energy);
        }
        const double r = std::pow(e[k + 1].gamma, fp.q + 1.0) + c * integral -
                         std::pow(e[k].gamma, fp.q + 1.0);
        out.push_back({s1, s2, r});
    }
    return out;
}

} // namespace psflow

#endif
