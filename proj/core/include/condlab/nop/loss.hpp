#pragma once

#include "condlab/grid.hpp"
#include "condlab/kernel_field.hpp"

#include <span>

namespace condlab::nop {

/// Trapezoid-weighted relative L1 error ||pred - target||_1 / ||target||_1 on `grid`.
/// Throws invalid-argument when the target has zero L1 mass.
double relative_l1(const Grid2D& grid, std::span<const double> pred, std::span<const double> target);

/// Same value; writes scale * d(loss)/d(pred) into `grad` (subgradient 0 where pred == target).
double relative_l1_grad(const Grid2D& grid, std::span<const double> pred, std::span<const double> target,
                        double scale, std::span<double> grad);

double relative_l1_loss(const GridField2D& pred, const KernelField& target);

} // namespace condlab::nop
