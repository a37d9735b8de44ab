#ifndef PSFLOW_GRID_HPP
#define PSFLOW_GRID_HPP

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "psflow/errors.hpp"

namespace psflow {

enum class GridMode { cartesian_1d, cartesian_2d, radial };

inline const char* to_string(GridMode m) {
    switch (m) {
        case GridMode::cartesian_1d: return "cartesian_1d";
        case GridMode::cartesian_2d: return "cartesian_2d";
        case GridMode::radial: return "radial";
    }
    return "?";
}

/// Surface area of the unit (n-1)-sphere, 2 pi^{n/2} / Gamma(n/2).
inline double unit_sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Immutable structured grid: an interval, a rectangle, or a radially
/// symmetric ball of equation dimension n sampled along r in [0, R].
///
/// Node quadrature weights implement the trapezoidal rule (against the
/// measure omega_{n-1} r^{n-1} dr in radial mode).  The center node of a
/// radial grid is an unknown with a zero-flux symmetry face at r = 0; its
/// weight is the exact volume of the half-cell [0, h/2], which keeps the
/// discrete divergence theorem exact there.
class Grid {
public:
    static Grid cartesian_1d(double extent, int points) {
        Grid g;
        g.mode_ = GridMode::cartesian_1d;
        g.ext_ = {extent, 0.0};
        g.pts_ = {points, 1};
        g.validate_axis(extent, points);
        g.h_ = {extent / (points - 1), 0.0};
        g.build_weights();
        return g;
    }

    static Grid cartesian_2d(double extent_x, double extent_y, int points_x, int points_y) {
        Grid g;
        g.mode_ = GridMode::cartesian_2d;
        g.ext_ = {extent_x, extent_y};
        g.pts_ = {points_x, points_y};
        g.validate_axis(extent_x, points_x);
        g.validate_axis(extent_y, points_y);
        g.h_ = {extent_x / (points_x - 1), extent_y / (points_y - 1)};
        g.build_weights();
        return g;
    }

    static Grid radial(double extent, int points, int equation_dim) {
        if (equation_dim < 2) throw geometry_error("radial grid: equation dimension must be >= 2");
        Grid g;
        g.mode_ = GridMode::radial;
        g.ext_ = {extent, 0.0};
        g.pts_ = {points, 1};
        g.rdim_ = equation_dim;
        g.validate_axis(extent, points);
        g.h_ = {extent / (points - 1), 0.0};
        g.build_weights();
        return g;
    }

    GridMode mode() const { return mode_; }
    int size() const { return pts_[0] * pts_[1]; }
    int points(int axis = 0) const { return pts_[axis]; }
    double extent(int axis = 0) const { return ext_[axis]; }
    double spacing(int axis = 0) const { return h_[axis]; }
    int radial_dim() const { return rdim_; }

    bool is_boundary(int idx) const {
        switch (mode_) {
            case GridMode::cartesian_1d: return idx == 0 || idx == pts_[0] - 1;
            case GridMode::radial: return idx == pts_[0] - 1;
            case GridMode::cartesian_2d: {
                const int i = idx % pts_[0], j = idx / pts_[0];
                return i == 0 || i == pts_[0] - 1 || j == 0 || j == pts_[1] - 1;
            }
        }
        return false;
    }

    /// Position of a node; axis 1 is zero except in 2d mode.
    std::array<double, 2> coords(int idx) const {
        if (mode_ == GridMode::cartesian_2d)
            return {h_[0] * (idx % pts_[0]), h_[1] * (idx / pts_[0])};
        return {h_[0] * idx, 0.0};
    }

    double node_weight(int idx) const { return w_[idx]; }
    const std::vector<double>& node_weights() const { return w_; }

    /// Total discrete measure |Omega_h| = sum of node weights.
    double measure() const { return measure_; }

    /// Distance from a node to the Dirichlet boundary.
    double boundary_distance(int idx) const {
        const auto c = coords(idx);
        switch (mode_) {
            case GridMode::cartesian_1d: return std::min(c[0], ext_[0] - c[0]);
            case GridMode::radial: return ext_[0] - c[0];
            case GridMode::cartesian_2d:
                return std::min(std::min(c[0], ext_[0] - c[0]), std::min(c[1], ext_[1] - c[1]));
        }
        return 0.0;
    }

    /// Visits every face as fn(i, j, face_volume, h_axis) with i, j the node
    /// indices across the face and face_volume = (transverse area) * h.  The
    /// order is fixed (x-faces row-major, then y-faces) so that summations
    /// are bit-reproducible.  The radial symmetry face at r = 0 carries zero
    /// flux and is not visited.
    template <class F>
    void for_each_face(F&& fn) const {
        const int nx = pts_[0], ny = pts_[1];
        switch (mode_) {
            case GridMode::cartesian_1d:
                for (int i = 0; i + 1 < nx; ++i) fn(i, i + 1, h_[0], h_[0]);
                break;
            case GridMode::radial: {
                const double omega = unit_sphere_area(rdim_);
                for (int i = 0; i + 1 < nx; ++i) {
                    const double rf = h_[0] * (i + 0.5);
                    fn(i, i + 1, omega * std::pow(rf, rdim_ - 1) * h_[0], h_[0]);
                }
                break;
            }
            case GridMode::cartesian_2d: {
                for (int j = 0; j < ny; ++j)
                    for (int i = 0; i + 1 < nx; ++i)
                        fn(j * nx + i, j * nx + i + 1, axis_weight(1, j) * h_[0], h_[0]);
                for (int j = 0; j + 1 < ny; ++j)
                    for (int i = 0; i < nx; ++i)
                        fn(j * nx + i, (j + 1) * nx + i, axis_weight(0, i) * h_[1], h_[1]);
                break;
            }
        }
    }

    bool operator==(const Grid& o) const {
        return mode_ == o.mode_ && pts_ == o.pts_ && ext_ == o.ext_ && rdim_ == o.rdim_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    Grid() = default;

    static void validate_axis(double extent, int points) {
        if (points < 3) throw geometry_error("grid axis needs at least 3 points");
        if (!(extent > 0.0)) throw geometry_error("grid extent must be positive");
    }

    double axis_weight(int axis, int k) const {
        const double h = h_[axis];
        return (k == 0 || k == pts_[axis] - 1) ? 0.5 * h : h;
    }

    void build_weights() {
        w_.assign(size(), 0.0);
        switch (mode_) {
            case GridMode::cartesian_1d:
                for (int i = 0; i < pts_[0]; ++i) w_[i] = axis_weight(0, i);
                break;
            case GridMode::cartesian_2d:
                for (int j = 0; j < pts_[1]; ++j)
                    for (int i = 0; i < pts_[0]; ++i)
                        w_[j * pts_[0] + i] = axis_weight(0, i) * axis_weight(1, j);
                break;
            case GridMode::radial: {
                const double omega = unit_sphere_area(rdim_);
                const double h = h_[0];
                w_[0] = omega * std::pow(0.5 * h, rdim_) / rdim_;
                for (int i = 1; i + 1 < pts_[0]; ++i)
                    w_[i] = omega * std::pow(h * i, rdim_ - 1) * h;
                w_[pts_[0] - 1] = 0.5 * omega * std::pow(ext_[0], rdim_ - 1) * h;
                break;
            }
        }
        measure_ = 0.0;
        for (double w : w_) measure_ += w;
    }

    GridMode mode_ = GridMode::cartesian_1d;
    std::array<double, 2> ext_{};
    std::array<int, 2> pts_{};
    std::array<double, 2> h_{};
    int rdim_ = 0;
    std::vector<double> w_;
    double measure_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

} // namespace psflow

#endif
