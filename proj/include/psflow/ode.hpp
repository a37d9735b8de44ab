#ifndef PSFLOW_ODE_HPP
#define PSFLOW_ODE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "psflow/errors.hpp"

namespace psflow {

/// Classical RK4 with step-doubling error control.  Integrates y' = f(t, y)
/// from t0 to t1, invoking on_sample(t, y) at the requested output times
/// (which are hit exactly by clipping the step).  abs_tol bounds the
/// per-step Richardson error estimate component-wise.
template <std::size_t N>
class AdaptiveRk4 {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<State(double, const State&)>;

    explicit AdaptiveRk4(Rhs rhs, double abs_tol = 1e-9) : rhs_(std::move(rhs)), tol_(abs_tol) {}

    template <class OnSample>
    State integrate(double t0, const State& y0, const std::vector<double>& output_times,
                    OnSample&& on_sample) const {
        State y = y0;
        double t = t0;
        double dt = output_times.empty() ? 1e-3 : std::max((output_times.back() - t0) * 1e-4, 1e-12);
        for (double t_out : output_times) {
            if (t_out <= t) {
                on_sample(t_out, y);
                continue;
            }
            while (t < t_out - 1e-15 * std::max(1.0, std::abs(t_out))) {
                double h = std::min(dt, t_out - t);
                if (h < 1e-15 * std::max(1.0, std::abs(t_out)))
                    throw error("AdaptiveRk4: step size collapsed; right-hand side may be non-finite");
                State full = rk4_step(t, y, h);
                State half = rk4_step(t + 0.5 * h, rk4_step(t, y, 0.5 * h), 0.5 * h);
                double err = 0.0;
                for (std::size_t i = 0; i < N; ++i) err = std::max(err, std::abs(full[i] - half[i]));
                if (err <= tol_) {
                    t += h;
                    y = half;
                    if (err < 0.1 * tol_) dt = std::min(2.0 * h, 4.0 * dt);
                } else {
                    dt = 0.5 * h;
                }
            }
            t = t_out;
            on_sample(t, y);
        }
        return y;
    }

private:
    State rk4_step(double t, const State& y, double h) const {
        const State k1 = rhs_(t, y);
        const State k2 = rhs_(t + 0.5 * h, axpy(y, 0.5 * h, k1));
        const State k3 = rhs_(t + 0.5 * h, axpy(y, 0.5 * h, k2));
        const State k4 = rhs_(t + h, axpy(y, h, k3));
        State out = y;
        for (std::size_t i = 0; i < N; ++i)
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return out;
    }

    static State axpy(const State& y, double a, const State& x) {
        State out = y;
        for (std::size_t i = 0; i < N; ++i) out[i] += a * x[i];
        return out;
    }

    Rhs rhs_;
    double tol_;
};

} // namespace psflow

#endif
