#ifndef PSFLOW_FIELD_HPP
#define PSFLOW_FIELD_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "psflow/grid.hpp"
#include "psflow/params.hpp"

namespace psflow {

/// Grid-sampled scalar function.  Solution fields are nonnegative with
/// exact zeros on the Dirichlet boundary; probe fields (e.g. Talenti
/// profiles under the residual test) may carry arbitrary boundary values.
class Field {
public:
    Field() = default;
    explicit Field(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)), v_(grid_->size(), fill) {}

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    int size() const { return static_cast<int>(v_.size()); }
    double& operator[](int i) { return v_[i]; }
    double operator[](int i) const { return v_[i]; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    double max() const { return *std::max_element(v_.begin(), v_.end()); }
    double min() const { return *std::min_element(v_.begin(), v_.end()); }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    void set_boundary_zero() {
        for (int i = 0; i < size(); ++i)
            if (grid_->is_boundary(i)) v_[i] = 0.0;
    }

    bool boundary_is_zero() const {
        for (int i = 0; i < size(); ++i)
            if (grid_->is_boundary(i) && v_[i] != 0.0) return false;
        return true;
    }

    /// Pointwise q-th power, clamped at 0 (solution fields only).
    Field pow_q(double q) const {
        Field out(grid_);
        for (int i = 0; i < size(); ++i) out.v_[i] = psflow::pow_q(v_[i], q);
        return out;
    }

    void require_same_grid(const Field& other, const char* where) const {
        if (!grid_ || !other.grid_ || *grid_ != *other.grid_)
            throw geometry_error(std::string(where) + ": fields live on different grids");
    }

private:
    GridPtr grid_;
    std::vector<double> v_;
};

/// Fills a field from a callable of the node position.
template <class F>
Field sample_field(GridPtr grid, F&& fn) {
    Field out(grid);
    for (int i = 0; i < out.size(); ++i) {
        const auto c = grid->coords(i);
        out[i] = fn(c);
    }
    return out;
}

} // namespace psflow

#endif
