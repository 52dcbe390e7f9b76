#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace condlab {

/// Uniform axis with both endpoints included.
class Axis {
public:
    Axis() = default;
    Axis(double lo, double hi, std::size_t n);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double spacing() const noexcept { return h_; }
    double length() const noexcept { return hi_ - lo_; }
    double node(std::size_t i) const { return nodes_[i]; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    /// Trapezoid weights: h/2 at the ends, h inside. They sum to length().
    std::span<const double> weights() const noexcept { return weights_; }

    bool operator==(const Axis& other) const noexcept {
        return lo_ == other.lo_ && hi_ == other.hi_ && nodes_.size() == other.nodes_.size();
    }

    /// Contiguous sub-axis of nodes [first, last).
    Axis slice(std::size_t first, std::size_t last) const;

private:
    double lo_ = 0.0;
    double hi_ = 1.0;
    double h_ = 1.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Tensor grid on D x E. Row index runs over x (state), column index over y (query).
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(Axis x, Axis y);

    const Axis& x() const noexcept { return x_; }
    const Axis& y() const noexcept { return y_; }
    std::size_t nx() const noexcept { return x_.size(); }
    std::size_t ny() const noexcept { return y_.size(); }
    std::size_t size() const noexcept { return nx() * ny(); }
    double hx() const noexcept { return x_.spacing(); }
    double hy() const noexcept { return y_.spacing(); }
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * ny() + j; }

    bool operator==(const Grid2D& other) const noexcept { return x_ == other.x_ && y_ == other.y_; }

private:
    Axis x_;
    Axis y_;
};

Grid2D make_grid(double x_min, double x_max, std::size_t nx,
                 double y_min, double y_max, std::size_t ny);

/// Half-open index box [i0, i1) x [j0, j1).
struct IndexBox {
    std::size_t i0 = 0, i1 = 0, j0 = 0, j1 = 0;

    std::size_t rows() const noexcept { return i1 - i0; }
    std::size_t cols() const noexcept { return j1 - j0; }
    static IndexBox full(const Grid2D& g) { return {0, g.nx(), 0, g.ny()}; }
    bool operator==(const IndexBox&) const = default;
};

/// Grid of the nodes inside `box`. Throws invalid-argument for boxes that leave the grid
/// or hold fewer than two nodes per axis.
Grid2D subgrid(const Grid2D& g, const IndexBox& box);

class GridField1D {
public:
    GridField1D() = default;
    GridField1D(Axis axis, std::vector<double> values);

    const Axis& axis() const noexcept { return axis_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }

private:
    Axis axis_;
    std::vector<double> values_;
};

/// Nonnegative 1D field with unit trapezoid mass.
class GridDensity1D {
public:
    explicit GridDensity1D(GridField1D field);

    const GridField1D& field() const noexcept { return field_; }
    const Axis& axis() const noexcept { return field_.axis(); }
    std::size_t size() const noexcept { return field_.size(); }
    double operator[](std::size_t i) const { return field_[i]; }
    std::span<const double> values() const noexcept { return field_.values(); }

private:
    GridField1D field_;
};

class GridField2D {
public:
    GridField2D() = default;
    explicit GridField2D(Grid2D grid);  // zero-filled
    GridField2D(Grid2D grid, std::vector<double> values);

    const Grid2D& grid() const noexcept { return grid_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::vector<double> column(std::size_t j) const;

private:
    Grid2D grid_;
    std::vector<double> values_;
};

/// Nonnegative field with unit trapezoid mass (within 1e-8).
class GridDensity2D {
public:
    static constexpr double mass_tolerance = 1e-8;

    /// Validates; throws invalid-argument on negative values or wrong mass.
    explicit GridDensity2D(GridField2D field);

    /// Divides by the quadrature mass first. Mass must be positive and finite.
    static GridDensity2D normalized(GridField2D field);

    const GridField2D& field() const noexcept { return field_; }
    const Grid2D& grid() const noexcept { return field_.grid(); }
    double operator()(std::size_t i, std::size_t j) const { return field_(i, j); }
    std::span<const double> values() const noexcept { return field_.values(); }

private:
    GridField2D field_;
};

double integrate1d(const Axis& axis, std::span<const double> values);
double integrate1d(const GridField1D& f);
/// Trapezoid rule over both axes, summed as the y-quadrature of the x-marginal.
double integrate2d(const GridField2D& f);

/// m(y_j) = trapezoid quadrature over x of f(., y_j).
GridField1D marginal_y(const GridField2D& f);
GridField1D marginal_y(const GridDensity2D& rho);

/// Grid minimum of the marginal; rho is in X_delta for any delta at or below it.
double delta_of(const GridDensity2D& rho);
/// Same, restricted to the y-index range [j0, j1).
double delta_of(const GridDensity2D& rho, std::size_t j0, std::size_t j1);

double sup_norm(const GridField2D& f);
double sup_distance(const GridField2D& f, const GridField2D& g);
double l1_distance(const GridField2D& f, const GridField2D& g);
/// L1 distance over the nodes of `box`, using trapezoid weights of the box's own sub-axes.
double l1_distance(const GridField2D& f, const GridField2D& g, const IndexBox& box);

} // namespace condlab
