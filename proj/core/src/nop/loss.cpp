#include "condlab/nop/loss.hpp"

#include "condlab/error.hpp"

#include <cmath>

namespace condlab::nop {

namespace {

void check_sizes(const Grid2D& grid, std::size_t a, std::size_t b) {
    if (a != grid.size() || b != grid.size()) fail(ErrorKind::invalid_argument, "loss: field size does not match grid");
}

double target_mass(const Grid2D& grid, std::span<const double> target) {
    const auto wx = grid.x().weights();
    const auto wy = grid.y().weights();
    double mass = 0.0;
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < grid.ny(); ++j) row += wy[j] * std::abs(target[grid.index(i, j)]);
        mass += wx[i] * row;
    }
    if (!(mass > 0.0)) fail(ErrorKind::invalid_argument, "loss: target has zero L1 mass");
    return mass;
}

} // namespace

double relative_l1(const Grid2D& grid, std::span<const double> pred, std::span<const double> target) {
    check_sizes(grid, pred.size(), target.size());
    const double denom = target_mass(grid, target);
    const auto wx = grid.x().weights();
    const auto wy = grid.y().weights();
    double num = 0.0;
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < grid.ny(); ++j) {
            const auto n = grid.index(i, j);
            row += wy[j] * std::abs(pred[n] - target[n]);
        }
        num += wx[i] * row;
    }
    return num / denom;
}

double relative_l1_grad(const Grid2D& grid, std::span<const double> pred, std::span<const double> target,
                        double scale, std::span<double> grad) {
    check_sizes(grid, pred.size(), target.size());
    if (grad.size() != grid.size()) fail(ErrorKind::invalid_argument, "loss: gradient size does not match grid");
    const double loss = relative_l1(grid, pred, target);
    const double c = scale / target_mass(grid, target);
    const auto wx = grid.x().weights();
    const auto wy = grid.y().weights();
    for (std::size_t i = 0; i < grid.nx(); ++i)
        for (std::size_t j = 0; j < grid.ny(); ++j) {
            const auto n = grid.index(i, j);
            const double d = pred[n] - target[n];
            const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            grad[n] = c * wx[i] * wy[j] * s;
        }
    return loss;
}

double relative_l1_loss(const GridField2D& pred, const KernelField& target) {
    if (!(pred.grid() == target.grid())) fail(ErrorKind::invalid_argument, "loss: grid mismatch");
    return relative_l1(pred.grid(), pred.values(), target.values());
}

} // namespace condlab::nop
