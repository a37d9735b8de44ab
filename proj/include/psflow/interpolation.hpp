#ifndef PSFLOW_INTERPOLATION_HPP
#define PSFLOW_INTERPOLATION_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "psflow/errors.hpp"

namespace psflow {

/// Monotonicity-preserving piecewise-cubic interpolant (Fritsch-Carlson
/// slope limiting).  Matches the data exactly at the nodes and never
/// overshoots between monotone samples, which is what the gamma(s)
/// interpolant needs: stored gamma values are nonincreasing and the
/// interpolant must stay so.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw data_integrity_error("MonotoneCubic: need at least two samples");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw data_integrity_error("MonotoneCubic: abscissae must be strictly increasing");
        m_.assign(n, 0.0);
        std::vector<double> h(n - 1), d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            d[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        if (n == 2) {
            m_[0] = m_[1] = d[0];
        } else {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                if (d[i - 1] * d[i] > 0.0) {
                    const double w1 = 2.0 * h[i] + h[i - 1];
                    const double w2 = h[i] + 2.0 * h[i - 1];
                    m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                }
            }
            m_[0] = edge_slope(h[0], h[1], d[0], d[1]);
            m_[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        }
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

    /// Evaluation; arguments outside the sample range clamp to the ends.
    double operator()(double x) const {
        if (x <= x_.front()) return y_.front();
        if (x >= x_.back()) return y_.back();
        const std::size_t i = segment(x);
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] +
               (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * m_[i + 1];
    }

    double derivative(double x) const {
        if (x <= x_.front()) return m_.front();
        if (x >= x_.back()) return m_.back();
        const std::size_t i = segment(x);
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        return ((6 * t * t - 6 * t) * y_[i] + (3 * t * t - 4 * t + 1) * h * m_[i] +
                (-6 * t * t + 6 * t) * y_[i + 1] + (3 * t * t - 2 * t) * h * m_[i + 1]) /
               h;
    }

private:
    std::size_t segment(double x) const {
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        return static_cast<std::size_t>(std::distance(x_.begin(), it)) - 1;
    }

    static double edge_slope(double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) return 0.0;
        if (std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return m;
    }

    std::vector<double> x_, y_, m_;
};

/// Linear interpolation on a sampled monotone function; used for map lookups.
inline double lerp_lookup(const std::vector<double>& x, const std::vector<double>& y, double q) {
    if (q <= x.front()) return y.front();
    if (q >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), q);
    const std::size_t i = static_cast<std::size_t>(std::distance(x.begin(), it)) - 1;
    const double t = (q - x[i]) / (x[i + 1] - x[i]);
    return y[i] + t * (y[i + 1] - y[i]);
}

} // namespace psflow

#endif
