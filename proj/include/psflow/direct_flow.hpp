#ifndef PSFLOW_DIRECT_FLOW_HPP
#define PSFLOW_DIRECT_FLOW_HPP

#include <cmath>
#include <vector>

#include "psflow/prototype_solver.hpp"
#include "psflow/time_map.hpp"

namespace psflow {

/// How the Lagrange multiplier enters the direct scheme.  The projection
/// variant is the default and the oracle: it is the discrete shadow of the
/// gamma division in the intrinsic scaling and keeps the constraint exact.
enum class LambdaCoupling { projection, explicit_source };

struct DirectStepResult {
    Field u;
    double lambda_used;        ///< ||grad u_next||_p^p
    double projection_factor;  ///< 1 / ||u*||_{q+1} (projection mode)
    int newton_iters;
    bool converged;
};

/// One step of the constrained flow.  Projection mode: (i) implicit
/// prototype substep of length dt, (ii) renormalize to ||u||_{q+1} = 1.
/// Source mode: substep on b = (1 + dt lambda_prev) u_prev^q, no projection.
inline DirectStepResult step_direct(const Field& u_prev, double dt, const FlowParams& fp,
                                    LambdaCoupling mode = LambdaCoupling::projection,
                                    double lambda_prev = 0.0) {
    if (mode == LambdaCoupling::projection) {
        StepResult st = step_prototype(u_prev, dt, fp);
        const double nrm = lr_norm(st.v, fp.q + 1.0);
        if (!(nrm > 0.0)) throw invariant_failure("step_direct: substep annihilated the field");
        Field u = std::move(st.v);
        for (int i = 0; i < u.size(); ++i) u[i] /= nrm;
        const double lambda_used = grad_p_energy(u, fp.p);
        return {std::move(u), lambda_used, 1.0 / nrm, st.newton_iters, st.converged};
    }
    // Explicit source term: fold lambda_prev u^q into the step data.
    Field boosted = u_prev;
    const double f = std::pow(1.0 + dt * lambda_prev, 1.0 / fp.q);
    for (int i = 0; i < boosted.size(); ++i) boosted[i] *= f;
    StepResult st = step_prototype(boosted, dt, fp);
    const double lambda_used = grad_p_energy(st.v, fp.p);
    return {std::move(st.v), lambda_used, 1.0, st.newton_iters, st.converged};
}

struct DirectSample {
    double t;
    Field u;
    double lambda;                ///< ||grad u(t)||_p^p
    double constraint_residual;   ///< | ||u||_{q+1} - 1 |
    double max_u;
    double min_u_interior;
    double projection_factor;
};

/// Semi-implicit run of the constrained flow, cross-validation oracle for
/// the intrinsic-scaling reconstruction.
struct DirectRun {
    FlowParams params;
    Field u0;                     ///< normalized: ||u0||_{q+1} = 1
    double dt = 1e-3;
    double t_end = 1.0;
    LambdaCoupling mode = LambdaCoupling::projection;
    int sample_every = 1;         ///< keep every k-th step in the series

    std::vector<DirectSample> series;
    double gamma_cum = 1.0;       ///< product of substep norms: underlying prototype amplitude
    double s_equiv = 0.0;         ///< accumulated prototype time, ds = dt gamma_prev^{q+1-p}
    bool completed = false;
};

inline void run_direct(DirectRun& run) {
    const FlowParams& fp = run.params;
    Field u = run.u0;
    const double c0 = lr_norm(u, fp.q + 1.0);
    if (std::abs(c0 - 1.0) > 1e-10)
        throw degenerate_data_error("run_direct: u0 is not normalized in L^{q+1}");

    run.series.clear();
    run.gamma_cum = 1.0;
    run.s_equiv = 0.0;
    auto push = [&](double t, const Field& f, double proj) {
        double mini = 1e300;
        for (int i = 0; i < f.size(); ++i)
            if (!f.grid().is_boundary(i)) mini = std::min(mini, f[i]);
        run.series.push_back({t, f, grad_p_energy(f, fp.p),
                              std::abs(lr_norm(f, fp.q + 1.0) - 1.0), f.max(), mini, proj});
    };
    push(0.0, u, 1.0);

    const long nsteps = static_cast<long>(std::llround(run.t_end / run.dt));
    double lambda_prev = grad_p_energy(u, fp.p);
    for (long k = 1; k <= nsteps; ++k) {
        // Relabel with the pre-step amplitude (explicit, first order).
        run.s_equiv += run.dt * std::pow(run.gamma_cum, fp.q1p);
        DirectStepResult st = step_direct(u, run.dt, fp, run.mode, lambda_prev);
        if (!st.converged) throw invariant_failure("run_direct: substep Newton failed");
        u = std::move(st.u);
        if (run.mode == LambdaCoupling::projection) run.gamma_cum /= st.projection_factor;
        lambda_prev = grad_p_energy(u, fp.p);
        if (k % run.sample_every == 0 || k == nsteps)
            push(run.dt * k, u, st.projection_factor);
    }
    run.completed = true;
}

struct CrossValidationRow {
    double t;
    double dist_q1;      ///< ||u_direct - u_rescaled||_{q+1}
    double lambda_rel;   ///< |lambda_direct - lambda_rescaled| / lambda_rescaled
};

struct CrossValidationReport {
    std::vector<CrossValidationRow> rows;
    double max_dist_q1 = 0.0;
    double max_lambda_rel = 0.0;
};

/// Compares the direct run against the intrinsic-scaling reconstruction at
/// the direct run's sample times that fall inside the map range.
inline CrossValidationReport cross_validate(const DirectRun& direct, const TimeMap& map,
                                            const SnapshotStore& store) {
    CrossValidationReport rep;
    const FlowParams& fp = direct.params;
    for (const auto& row : direct.series) {
        if (row.t > map.t_end() + 1e-12) break;
        Rescaled rs = rescale_solution(store, map, fp, row.t);
        Field diff = row.u;
        for (int i = 0; i < diff.size(); ++i) diff[i] -= rs.u[i];
        const double d = lr_norm(diff, fp.q + 1.0);
        const double lr = std::abs(row.lambda - rs.lambda_t) / rs.lambda_t;
        rep.rows.push_back({row.t, d, lr});
        rep.max_dist_q1 = std::max(rep.max_dist_q1, d);
        rep.max_lambda_rel = std::max(rep.max_lambda_rel, lr);
    }
    return rep;
}

} // namespace psflow

#endif
