#ifndef PSFLOW_VERIFY_HPP
#define PSFLOW_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "psflow/direct_flow.hpp"
#include "psflow/initial_data.hpp"
#include "psflow/positivity.hpp"
#include "psflow/talenti.hpp"

namespace psflow {

enum class CriterionStatus { pass, fail, missing_input, not_measurable };

inline const char* to_string(CriterionStatus s) {
    switch (s) {
        case CriterionStatus::pass: return "PASS";
        case CriterionStatus::fail: return "FAIL";
        case CriterionStatus::missing_input: return "MISSING-INPUT";
        case CriterionStatus::not_measurable: return "NOT-MEASURABLE";
    }
    return "?";
}

struct CriterionResult {
    int id = 0;
    std::string name;
    CriterionStatus status = CriterionStatus::fail;
    std::string detail;   ///< measured values, thresholds
};

/// Runs the full verification benchmark suite.  Every tolerance is pinned
/// here; the CLI `verify` command and the acceptance test binary both go
/// through this class.  Heavy runs are shared between criteria.
class AcceptanceSuite {
public:
    explicit AcceptanceSuite(unsigned seed = 0) : seed_(seed) {}

    /// Criteria whose measurements need refinement ladders; used by the CLI
    /// to mark them not-measurable for deliberately coarsened configs.
    static bool needs_refinement_ladder(int id) {
        return id == 1 || id == 3 || id == 4 || id == 5 || id == 8 || id == 9;
    }

    /// Runs the criteria; those for which skip(id) is true are reported as
    /// NOT-MEASURABLE without computing (degraded-mode contract for coarse
    /// configs).
    std::vector<CriterionResult> run_all(const std::function<void(const CriterionResult&)>& emit,
                                         const std::function<bool(int)>& skip = nullptr) {
        std::vector<CriterionResult> out;
        auto push = [&](CriterionResult r) {
            if (emit) emit(r);
            out.push_back(std::move(r));
        };
        auto gate = [&](int id, const std::string& name, auto&& fn) {
            if (skip && skip(id))
                push({id, name, CriterionStatus::not_measurable,
                      "skipped: configured resolution below the benchmark ladder"});
            else
                push(fn());
        };
        gate(1, "energy equality", [&] { return energy_equality(); });
        gate(3, "extinction bound", [&] { return extinction_bound_check(); });
        gate(4, "talenti pde residual", [&] { return talenti_residual_order(); });
        gate(5, "comparison principle", [&] { return comparison_principle(); });
        gate(7, "time-map identity", [&] { return time_map_identity(); });
        gate(8, "lambda identity", [&] { return lambda_identity(); });
        gate(9, "cross-solver oracle", [&] { return cross_solver(); });
        gate(6, "volume constraint", [&] { return volume_constraint(); });
        gate(10, "boundedness bound", [&] { return boundedness(); });
        gate(11, "measure lower bound", [&] { return measure_lower_bound(); });
        gate(12, "algebraic inequality probe", [&] { return algebraic_probe(); });
        gate(2, "maximum principle", [&] { return max_principle(); });
        std::sort(out.begin(), out.end(),
                  [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
        return out;
    }

    // -- criterion 1 ---------------------------------------------------------
    CriterionResult energy_equality() {
        const FlowParams fp = make_params(3, 2.0);
        auto grid = std::make_shared<Grid>(Grid::cartesian_1d(1.0, 201));
        const Field u0 = normalize_initial(preset_bump(grid), fp);
        std::vector<double> ds_levels{4e-4, 2e-4, 1e-4}, max_r;
        for (double ds : ds_levels) {
            PrototypeRun run;
            run.params = fp;
            run.u0 = u0;
            run.config.ds_init = run.config.ds_min = run.config.ds_max = ds;
            run.config.adaptive = false;
            run.config.snapshot_cadence_s = 5e-3;
            run_to_extinction(run);
            note_run(run);
            double mr = 0.0;
            for (const auto& r : energy_balance_report(run.store, fp))
                mr = std::max(mr, std::abs(r.residual));
            max_r.push_back(mr);
        }
        const double slope = fit_slope(ds_levels, max_r);
        const bool ok = max_r.back() <= 1e-4 && slope >= 0.8 && slope <= 1.5;
        std::ostringstream d;
        d << "max|R|(ds=1e-4) = " << max_r.back() << " (<= 1e-4), slope = " << slope
          << " (in [0.8, 1.5])";
        return {1, "energy equality", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

    // -- criterion 3 (runs shared with 5) -------------------------------------
    CriterionResult extinction_bound_check() {
        const FlowParams fp = make_params(3, 2.0);
        std::vector<double> s_star;
        double bound = 0.0;
        for (int npts : {101, 201}) {
            auto grid = std::make_shared<Grid>(Grid::radial(1.0, npts, fp.n));
            Field u0 = preset_truncated_talenti(grid, fp, 1.0);
            TalentiProfile prof{1.0, {0.0, 0.0}, fp, -1.0, 1.0};
            bound = extinction_bound(u0, prof);
            PrototypeRun run;
            run.params = fp;
            run.u0 = u0;
            run.config.ds_init = 1e-6;
            run.config.ds_min = 1e-12;
            run.config.ds_max = 5e-3;
            run.config.gamma_step_factor = 0.3;
            run.config.energy_budget = 1e-8;
            run.config.snapshot_cadence_s = 2e-5;
            run_to_extinction(run);
            note_run(run);
            s_star.push_back(run.store.extinction_time().value());
            radial_stores_.push_back(std::move(run.store));
            radial_profiles_.push_back(make_comparison_profile(radial_stores_.back().front().field,
                                                               1.0, {0.0, 0.0}, fp));
        }
        const double change = std::abs(s_star[1] - s_star[0]) / s_star[0];
        const bool ok = s_star[0] <= 1.05 * bound && s_star[1] <= 1.05 * bound && change < 0.05;
        std::ostringstream d;
        d << "S*(N=101) = " << s_star[0] << ", S*(N=201) = " << s_star[1] << ", bound = " << bound
          << ", doubling change = " << change * 100.0 << "%";
        return {3, "extinction bound", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

    // -- criterion 4 ---------------------------------------------------------
    CriterionResult talenti_residual_order() {
        const FlowParams fp = make_params(3, 2.0);
        std::vector<double> hs, sup;
        for (int npts : {101, 201, 401}) {
            auto grid = std::make_shared<Grid>(Grid::radial(1.0, npts, fp.n));
            TalentiProfile prof{1.0, {0.0, 0.0}, fp, -1.0, 1.0};
            const Field y = talenti_field(grid, prof);
            const Field lap = apply_p_laplacian(y, fp.p);
            double s = 0.0;
            for (int i = 0; i < y.size(); ++i) {
                if (grid->is_boundary(i) || grid->coords(i)[0] < 0.15) continue;
                s = std::max(s, std::abs(-lap[i] - pow_q(y[i], fp.q)));
            }
            hs.push_back(grid->spacing(0));
            sup.push_back(s);
        }
        const double order = fit_slope(hs, sup);
        const bool ok = order >= 1.7 && order <= 2.3;
        std::ostringstream d;
        d << "interior sup residuals = {" << sup[0] << ", " << sup[1] << ", " << sup[2]
          << "}, measured order = " << order << " (2 +- 0.3)";
        return {4, "talenti pde residual", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

    // -- criterion 5 (uses the stores from 3) ----------------------------------
    CriterionResult comparison_principle() {
        if (radial_stores_.size() < 2) extinction_bound_check();
        std::vector<double> tol_h;
        for (std::size_t lvl = 0; lvl < radial_stores_.size(); ++lvl) {
            const auto& store = radial_stores_[lvl];
            const auto& prof = radial_profiles_[lvl];
            const Grid& g = store.front().field.grid();
            double worst = 0.0;
            for (const auto& e : store.entries()) {
                for (int i = 0; i < e.field.size(); ++i) {
                    if (g.is_boundary(i)) continue;
                    if (g.boundary_distance(i) <= 1.5 * g.spacing(0)) continue;  // one-cell collar
                    const double v_super = comparison_supersolution(prof, g.coords(i), e.s);
                    worst = std::max(worst, e.field[i] - v_super);
                }
            }
            tol_h.push_back(worst);
        }
        // tol(h) must halve (+-30%) under doubling; exact dominance (0 -> 0) passes.
        const bool zero = tol_h[0] <= 1e-12 && tol_h[1] <= 1e-12;
        const bool ok = zero || (tol_h[1] <= 0.65 * tol_h[0] && tol_h[1] >= 0.0);
        std::ostringstream d;
        d << "max (v - V)_+ = {" << tol_h[0] << ", " << tol_h[1] << "}"
          << (zero ? " (V dominates exactly at both resolutions)" : "");
        return {5, "comparison principle", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

    // -- criteria 7 & 8 share the map pipelines --------------------------------
    struct MapPipeline {
        PrototypeRun run;
        TimeMap map;
        double fd_err = 0.0;
        double lambda_err = 0.0;
        double max_constraint = 0.0;
        double max_renorm = 0.0;
    };

    MapPipeline build_map_pipeline(int npts, double ds_max, double cadence) {
        const FlowParams fp = make_params(3, 2.0);
        auto grid = std::make_shared<Grid>(Grid::cartesian_1d(1.0, npts));
        MapPipeline pl;
        pl.run.params = fp;
        pl.run.u0 = normalize_initial(preset_bump(grid), fp);
        pl.run.config.ds_init = 1e-6;
        pl.run.config.ds_min = 1e-12;
        pl.run.config.ds_max = ds_max;
        pl.run.config.energy_budget = 1e-8;
        pl.run.config.snapshot_cadence_s = cadence;
        run_to_extinction(pl.run);
        note_run(pl.run);
        const double t_end = t_end_for_s_fraction(pl.run.store, fp, 0.99);
        pl.map = integrate_time_map(pl.run.store, fp, t_end);

        const double expo = fp.time_scaling_exponent();
        const auto& smp = pl.map.samples;
        for (std::size_t i = 1; i + 1 < smp.size(); ++i) {
            const double fd = (smp[i + 1].s - smp[i - 1].s) / (smp[i + 1].t - smp[i - 1].t);
            const double rhs = std::pow(smp[i].gamma, expo);
            pl.fd_err = std::max(pl.fd_err, std::abs(fd - rhs) / rhs);
        }
        for (std::size_t i = 10; i + 10 < smp.size(); i += 10) {
            const Rescaled r = rescale_solution(pl.run.store, pl.map, fp, smp[i].t);
            const double gp =
                (smp[i + 1].gamma - smp[i - 1].gamma) / (smp[i + 1].t - smp[i - 1].t);
            const double rhs = -fp.q * gp / smp[i].gamma;
            pl.lambda_err = std::max(pl.lambda_err, std::abs(r.lambda_t - rhs) / r.lambda_t);
            pl.max_constraint = std::max(pl.max_constraint, std::abs(lr_norm(r.u, fp.q + 1.0) - 1.0));
            pl.max_renorm = std::max(pl.max_renorm, r.renormalization);
        }
        return pl;
    }

    void ensure_maps() {
        if (maps_.empty()) {
            maps_.push_back(build_map_pipeline(101, 1e-3, 1e-3));
            maps_.push_back(build_map_pipeline(201, 5e-4, 5e-4));
        }
    }

    CriterionResult time_map_identity() {
        ensure_maps();
        double fd = 0.0, route = 0.0;
        for (const auto& pl : maps_) {
            fd = std::max(fd, pl.fd_err);
            route = std::max(route, pl.map.max_route_discrepancy);
        }
        const bool ok = fd <= 1e-5 && route <= 1e-6;
        std::ostringstream d;
        d << "max FD rel err = " << fd << " (<= 1e-5), route discrepancy = " << route
          << " (<= 1e-6)";
        return {7, "time-map identity", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

    CriterionResult lambda_identity() {
        ensure_maps();
        const double base = maps_[0].lambda_err, fine = maps_[1].lambda_err;
        const bool ok = base <= 2e-2 && fine < base;
        std::ostringstream d;
        d << "rel err baseline = " << base << " (<= 2e-2), refined = " << fine
          << " (decreasing)";
        return {8, "lambda identity", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

    // -- criterion 9 ------------------------------------------------------------
    CriterionResult cross_solver() {
        const FlowParams fp = make_params(3, 2.0);
        struct Level {
            int npts;
            double dt;
        };
        const std::vector<Level> levels{{51, 2e-3}, {101, 1e-3}, {201, 5e-4}};
        std::vector<double> dist, lam_rel, dts;
        for (const auto& lv : levels) {
            auto grid = std::make_shared<Grid>(Grid::cartesian_1d(1.0, lv.npts));
            const Field u0 = normalize_initial(preset_bump(grid), fp);
            PrototypeRun run;
            run.params = fp;
            run.u0 = u0;
            run.config.ds_init = 1e-6;
            run.config.ds_min = 1e-12;
            run.config.ds_max = 5e-5;   // reference quality: well below every dt level
            run.config.energy_budget = 1e-10;
            run.config.snapshot_cadence_s = 1e-4;
            run_to_extinction(run);
            note_run(run);
            const TimeMap map = integrate_time_map(run.store, fp, 1.05);
            DirectRun dr;
            dr.params = fp;
            dr.u0 = u0;
            dr.dt = lv.dt;
            dr.t_end = 1.0;
            dr.sample_every = std::max(1, static_cast<int>(std::llround(1e-2 / lv.dt)));
            run_direct(dr);
            note_direct(dr);
            const auto rep = cross_validate(dr, map, run.store);
            dist.push_back(rep.max_dist_q1);
            lam_rel.push_back(rep.max_lambda_rel);
            dts.push_back(lv.dt);
        }
        const double slope = fit_slope(dts, dist);
        const bool ok = dist[1] <= 5e-2 && lam_rel[1] <= 5e-2 && slope >= 0.8;
        std::ostringstream d;
        d << "baseline L^{q+1} dist = " << dist[1] << " (<= 5e-2), lambda rel = " << lam_rel[1]
          << " (<= 5e-2), joint slope = " << slope << " (>= 0.8)";
        return {9, "cross-solver oracle", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

    // -- criterion 6 --------------------------------------------------------------
    CriterionResult volume_constraint() {
        ensure_maps();
        ensure_plateau();
        double worst = 0.0;
        for (const auto& pl : maps_) worst = std::max(worst, pl.max_constraint);
        for (const auto& row : plateau_.series) worst = std::max(worst, row.constraint_residual);
        for (double c : direct_constraints_) worst = std::max(worst, c);
        const bool ok = worst <= 1e-12;
        std::ostringstream d;
        d << "max | ||u||_{q+1} - 1 | = " << worst << " (<= 1e-12) across rescaled and direct series";
        return {6, "volume constraint", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

    // -- criterion 10 ---------------------------------------------------------------
    CriterionResult boundedness() {
        const FlowParams fp = make_params(3, 2.0);
        ensure_plateau();
        ensure_maps();
        int violations = boundedness_check(plateau_.series, plateau_.u0, fp).violations +
                         direct_bound_violations_;
        // Rescaled pipeline: sample u(t) and lambda(t) off the fine map.
        struct Row {
            double t;
            Field u;
            double lambda;
        };
        std::vector<Row> series;
        const auto& pl = maps_[1];
        for (std::size_t i = 0; i < pl.map.samples.size(); i += 20) {
            Rescaled r = rescale_solution(pl.run.store, pl.map, fp, pl.map.samples[i].t);
            series.push_back({pl.map.samples[i].t, std::move(r.u), r.lambda_t});
        }
        violations += boundedness_check(series, pl.run.u0, fp).violations;
        const bool ok = violations == 0;
        std::ostringstream d;
        d << violations << " violations of ||u(t)||_inf <= exp((1/q) int lambda) ||u0||_inf (1+1e-6)";
        return {10, "boundedness bound", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

    // -- criterion 11 ----------------------------------------------------------------
    CriterionResult measure_lower_bound() {
        const FlowParams fp = make_params(3, 2.0);
        ensure_plateau();
        const Grid& g = plateau_.u0.grid();
        const SubdomainSpec spec = make_subdomain(g, 1);
        double m_emp = 0.0;
        for (const auto& row : plateau_.series) m_emp = std::max(m_emp, row.max_u);
        m_emp *= 1.0 + 1e-6;
        const double l_cap = std::pow(0.25 / spec.measure, 1.0 / (fp.q + 1.0));
        int held = 0, satisfied = 0, checked = 0;
        double worst_slack = 1e300;
        for (const auto& row : plateau_.series) {
            for (double frac : {0.25, 0.5, 0.75}) {
                const auto vca = volume_constraint_alpha(row.u, spec, m_emp, frac * l_cap, fp);
                ++checked;
                if (vca.hypotheses_hold) {
                    ++held;
                    if (vca.measured >= vca.bound - 1e-10) ++satisfied;
                    worst_slack = std::min(worst_slack, vca.measured - vca.bound);
                }
            }
        }
        const bool ok = held > 0 && satisfied == held;
        std::ostringstream d;
        d << satisfied << "/" << held << " snapshots with hypotheses held satisfy the bound (of "
          << checked << " checked), worst slack = " << worst_slack;
        return {11, "measure lower bound", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

    // -- criterion 12 -----------------------------------------------------------------
    CriterionResult algebraic_probe() {
        std::mt19937_64 rng(seed_);
        std::uniform_real_distribution<double> uni(-10.0, 10.0);
        bool all_ok = true;
        double p2_worst = 0.0, worst_margin = 1e300;
        for (double p : {2.0, 2.5, 3.0}) {
            for (int k = 0; k < 100000; ++k) {
                std::vector<double> xi{uni(rng), uni(rng), uni(rng)};
                std::vector<double> eta{uni(rng), uni(rng), uni(rng)};
                const auto pr = flux_monotonicity_probe(xi, eta, p);
                if (p == 2.0) {
                    if (pr.bound > 0.0)
                        p2_worst = std::max(p2_worst, std::abs(pr.lhs - pr.bound) / pr.bound);
                } else {
                    if (pr.lhs < pr.bound * (1.0 - 1e-12)) all_ok = false;
                    if (pr.bound > 0.0) worst_margin = std::min(worst_margin, pr.lhs / pr.bound);
                }
            }
        }
        const bool ok = all_ok && p2_worst <= 1e-15;
        std::ostringstream d;
        d << "10^5 pairs per p in {2, 2.5, 3}: all lhs >= 2^{2-p}|xi-eta|^p, min lhs/bound = "
          << worst_margin << ", p=2 relative equality defect = " << p2_worst << " (<= 1e-15)";
        return {12, "algebraic inequality probe", ok ? CriterionStatus::pass : CriterionStatus::fail,
                d.str()};
    }

    // -- criterion 2 (aggregated last) ----------------------------------------------
    CriterionResult max_principle() {
        const bool ok = worst_overshoot_ <= 1e-10 && worst_undershoot_ <= 1e-12 &&
                        direct_min_u_ >= -1e-12 && runs_seen_ > 0;
        std::ostringstream d;
        d << "over " << runs_seen_ << " runs / " << steps_seen_
          << " accepted steps: max overshoot = " << worst_overshoot_
          << " (<= 1e-10), max undershoot = " << worst_undershoot_
          << " (<= 1e-12), min direct-series u = " << direct_min_u_;
        return {2, "maximum principle", ok ? CriterionStatus::pass : CriterionStatus::fail, d.str()};
    }

private:
    struct PlateauRun {
        Field u0;
        std::vector<DirectSample> series;
    };

    void ensure_plateau() {
        if (!plateau_.series.empty()) return;
        const FlowParams fp = make_params(3, 2.0);
        auto grid = std::make_shared<Grid>(Grid::cartesian_1d(1.0, 801));
        DirectRun dr;
        dr.params = fp;
        dr.u0 = normalize_initial(preset_plateau(grid, 1.0, 0.2), fp);
        dr.dt = 1e-3;
        dr.t_end = 0.3;
        dr.sample_every = 5;
        run_direct(dr);
        note_direct(dr);
        plateau_.u0 = dr.u0;
        plateau_.series = std::move(dr.series);
    }

    void note_run(const PrototypeRun& run) {
        ++runs_seen_;
        steps_seen_ += run.total_steps;
        worst_overshoot_ = std::max(worst_overshoot_, run.max_overshoot);
        worst_undershoot_ = std::max(worst_undershoot_, run.max_undershoot);
    }

    void note_direct(const DirectRun& dr) {
        ++runs_seen_;
        steps_seen_ += static_cast<long>(std::llround(dr.t_end / dr.dt));
        double c = 0.0;
        for (const auto& row : dr.series) {
            c = std::max(c, row.constraint_residual);
            direct_min_u_ = std::min(direct_min_u_, row.min_u_interior);
        }
        direct_constraints_.push_back(c);
        direct_bound_violations_ += boundedness_check(dr.series, dr.u0, dr.params).violations;
    }

    /// Least-squares slope of log(err) against log(scale).
    static double fit_slope(const std::vector<double>& scale, const std::vector<double>& err) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int n = static_cast<int>(scale.size());
        for (int i = 0; i < n; ++i) {
            const double x = std::log(scale[i]), y = std::log(std::max(err[i], 1e-300));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    unsigned seed_;
    std::vector<SnapshotStore> radial_stores_;
    std::vector<TalentiProfile> radial_profiles_;
    std::vector<MapPipeline> maps_;
    PlateauRun plateau_;
    std::vector<double> direct_constraints_;
    int direct_bound_violations_ = 0;
    double direct_min_u_ = 1e300;
    double worst_overshoot_ = 0.0;
    double worst_undershoot_ = 0.0;
    long runs_seen_ = 0;
    long steps_seen_ = 0;
};

} // namespace psflow

#endif
