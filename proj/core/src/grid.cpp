#include "condlab/grid.hpp"

#include "condlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace condlab {

Axis::Axis(double lo, double hi, std::size_t n) : lo_(lo), hi_(hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
        fail(ErrorKind::invalid_argument, "axis bounds must satisfy lo < hi");
    if (n < 2) fail(ErrorKind::invalid_argument, "axis needs at least 2 nodes");
    h_ = (hi - lo) / static_cast<double>(n - 1);
    nodes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) nodes_[i] = lo + static_cast<double>(i) * h_;
    nodes_.back() = hi;
    weights_.assign(n, h_);
    weights_.front() = 0.5 * h_;
    weights_.back() = 0.5 * h_;
}

Axis Axis::slice(std::size_t first, std::size_t last) const {
    if (first >= last || last > size() || last - first < 2)
        fail(ErrorKind::invalid_argument, "axis slice out of range or shorter than 2 nodes");
    Axis out(nodes_[first], nodes_[last - 1], last - first);
    // keep the parent's node values bit-for-bit
    std::copy(nodes_.begin() + static_cast<std::ptrdiff_t>(first),
              nodes_.begin() + static_cast<std::ptrdiff_t>(last), out.nodes_.begin());
    return out;
}

Grid2D::Grid2D(Axis x, Axis y) : x_(std::move(x)), y_(std::move(y)) {}

Grid2D make_grid(double x_min, double x_max, std::size_t nx,
                 double y_min, double y_max, std::size_t ny) {
    return Grid2D(Axis(x_min, x_max, nx), Axis(y_min, y_max, ny));
}

Grid2D subgrid(const Grid2D& g, const IndexBox& box) {
    if (box.i1 > g.nx() || box.j1 > g.ny() || box.i0 >= box.i1 || box.j0 >= box.j1)
        fail(ErrorKind::invalid_argument, "index box outside the grid");
    return Grid2D(g.x().slice(box.i0, box.i1), g.y().slice(box.j0, box.j1));
}

GridField1D::GridField1D(Axis axis, std::vector<double> values)
    : axis_(std::move(axis)), values_(std::move(values)) {
    if (values_.size() != axis_.size())
        fail(ErrorKind::invalid_argument, "1D field length does not match its axis");
    for (double v : values_)
        if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "1D field holds a non-finite value");
}

GridDensity1D::GridDensity1D(GridField1D field) : field_(std::move(field)) {
    for (double v : field_.values())
        if (v < 0.0) fail(ErrorKind::invalid_argument, "density holds a negative value");
    const double mass = integrate1d(field_);
    if (std::abs(mass - 1.0) > GridDensity2D::mass_tolerance)
        fail(ErrorKind::invalid_argument, "1D density mass " + std::to_string(mass) + " is not 1");
}

GridField2D::GridField2D(Grid2D grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

GridField2D::GridField2D(Grid2D grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        fail(ErrorKind::invalid_argument, "field size does not match its grid");
    for (double v : values_)
        if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "field holds a non-finite value");
}

std::vector<double> GridField2D::column(std::size_t j) const {
    std::vector<double> out(grid_.nx());
    for (std::size_t i = 0; i < grid_.nx(); ++i) out[i] = (*this)(i, j);
    return out;
}

GridDensity2D::GridDensity2D(GridField2D field) : field_(std::move(field)) {
    for (double v : field_.values())
        if (v < 0.0) fail(ErrorKind::invalid_argument, "density holds a negative value");
    const double mass = integrate2d(field_);
    if (std::abs(mass - 1.0) > mass_tolerance)
        fail(ErrorKind::invalid_argument, "density mass " + std::to_string(mass) + " is not 1");
}

GridDensity2D GridDensity2D::normalized(GridField2D field) {
    const double mass = integrate2d(field);
    if (!(mass > 0.0) || !std::isfinite(mass))
        fail(ErrorKind::invalid_argument, "cannot normalize a field with non-positive mass");
    for (double& v : field.values()) v /= mass;
    return GridDensity2D(std::move(field));
}

double integrate1d(const Axis& axis, std::span<const double> values) {
    const auto w = axis.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i];
    return s;
}

double integrate1d(const GridField1D& f) { return integrate1d(f.axis(), f.values()); }

GridField1D marginal_y(const GridField2D& f) {
    const auto& g = f.grid();
    const auto wx = g.x().weights();
    std::vector<double> m(g.ny(), 0.0);
    for (std::size_t i = 0; i < g.nx(); ++i) {
        const double w = wx[i];
        for (std::size_t j = 0; j < g.ny(); ++j) m[j] += w * f(i, j);
    }
    return GridField1D(g.y(), std::move(m));
}

GridField1D marginal_y(const GridDensity2D& rho) { return marginal_y(rho.field()); }

double integrate2d(const GridField2D& f) { return integrate1d(marginal_y(f)); }

double delta_of(const GridDensity2D& rho) { return delta_of(rho, 0, rho.grid().ny()); }

double delta_of(const GridDensity2D& rho, std::size_t j0, std::size_t j1) {
    require(j0 < j1 && j1 <= rho.grid().ny(), "delta_of: y-index range out of bounds");
    const auto m = marginal_y(rho);
    double d = m[j0];
    for (std::size_t j = j0 + 1; j < j1; ++j) d = std::min(d, m[j]);
    return d;
}

namespace {
void check_same_grid(const GridField2D& f, const GridField2D& g) {
    if (!(f.grid() == g.grid())) fail(ErrorKind::invalid_argument, "fields live on different grids");
}
} // namespace

double sup_norm(const GridField2D& f) {
    double s = 0.0;
    for (double v : f.values()) s = std::max(s, std::abs(v));
    return s;
}

double sup_distance(const GridField2D& f, const GridField2D& g) {
    check_same_grid(f, g);
    const auto a = f.values();
    const auto b = g.values();
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, std::abs(a[k] - b[k]));
    return s;
}

double l1_distance(const GridField2D& f, const GridField2D& g) {
    return l1_distance(f, g, IndexBox::full(f.grid()));
}

double l1_distance(const GridField2D& f, const GridField2D& g, const IndexBox& box) {
    check_same_grid(f, g);
    const Grid2D sub = subgrid(f.grid(), box);
    const auto wx = sub.x().weights();
    const auto wy = sub.y().weights();
    double total = 0.0;
    for (std::size_t j = 0; j < sub.ny(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < sub.nx(); ++i)
            col += wx[i] * std::abs(f(box.i0 + i, box.j0 + j) - g(box.i0 + i, box.j0 + j));
        total += wy[j] * col;
    }
    return total;
}

} // namespace condlab
