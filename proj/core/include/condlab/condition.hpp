#pragma once

#include "condlab/grid.hpp"
#include "condlab/kernel_field.hpp"

#include <vector>

namespace condlab {

/// Kernel conditioning: kappa[i][j] = rho[i][j] / m_rho[j].
/// Throws domain-violation (index = first offending y slice) when delta_of(rho) < delta_min.
KernelField kernel_condition(const GridDensity2D& rho, double delta_min);

/// In-context conditioning at query y. On grid nodes this is the matching kernel column,
/// computed by the same arithmetic. Between nodes the joint slice is interpolated linearly
/// in y and divided by its own quadrature (the interpolated marginal).
/// Throws out-of-domain when y leaves [y_min, y_max].
GridDensity1D incontext_condition(const GridDensity2D& rho, double y, double delta_min);

enum class MollifyMethod {
    fft,     // zero-padded FFT linear convolution
    direct,  // separable direct sums; exact nonnegativity, full relative precision in tails
};

/// Gaussian mollification with covariance eps*I. The mollifier is sampled on the grid
/// offsets and normalized to unit discrete sum; the output is renormalized to unit mass.
GridDensity2D mollify(const GridDensity2D& rho, double eps, MollifyMethod method = MollifyMethod::fft);

/// Strictly decreasing positive epsilons.
class MollifierSchedule {
public:
    explicit MollifierSchedule(std::vector<double> epsilons);
    static MollifierSchedule default_schedule();  // {0.5, 0.2, 0.1, 0.05, 0.02}

    const std::vector<double>& epsilons() const noexcept { return eps_; }
    std::size_t size() const noexcept { return eps_.size(); }

private:
    std::vector<double> eps_;
};

struct ExtensionResult {
    GridDensity1D conditional;               // at the smallest epsilon
    std::vector<GridDensity1D> iterates;     // one per epsilon
    std::vector<double> step_sup_distances;  // sup distance between consecutive iterates
};

/// Conditional of the mollified joint at y for each epsilon in the schedule. No delta
/// bound is required of rho. Throws degenerate-query when the mollified marginal at y
/// falls below 1e-300.
ExtensionResult extension_limit(const GridDensity2D& rho, double y, const MollifierSchedule& schedule);

/// Nodewise clamp to [-M, M]. Throws invalid-argument for M <= 0.
GridField2D truncate_tm(const GridField2D& f, double M);
/// (z + M)_+ - (z - M)_+ - M, the one-hidden-layer ReLU form of the clamp.
double truncate_relu(double z, double M);
GridField2D truncate_tm_relu(const GridField2D& f, double M);

/// Copies `f` (living on subgrid(target, box)) into a zero field on `target`.
GridField2D zero_extend(const GridField2D& f, const Grid2D& target, const IndexBox& box);
/// Values of `f` inside `box`, as a field on subgrid(f.grid(), box).
GridField2D restrict_to(const GridField2D& f, const IndexBox& box);

} // namespace condlab
