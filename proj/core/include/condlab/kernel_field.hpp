#pragma once

#include "condlab/grid.hpp"

namespace condlab {

/// Markov kernel kappa(x_i | y_j) on a grid: nonnegative, every y-slice has unit
/// trapezoid mass over x (within 1e-8).
class KernelField {
public:
    static constexpr double slice_tolerance = 1e-8;

    explicit KernelField(GridField2D field);

    const GridField2D& field() const noexcept { return field_; }
    const Grid2D& grid() const noexcept { return field_.grid(); }
    double operator()(std::size_t i, std::size_t j) const { return field_(i, j); }
    std::span<const double> values() const noexcept { return field_.values(); }

private:
    GridField2D field_;
};

/// Divides each column of `f` by its x-quadrature. Columns with zero mass are
/// replaced by the uniform density 1/|D|; their indices are appended to `zero_slices`
/// when it is non-null.
KernelField normalize_slices(GridField2D f, std::vector<std::size_t>* zero_slices = nullptr);

} // namespace condlab
