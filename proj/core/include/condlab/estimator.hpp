#pragma once

#include "condlab/grid.hpp"
#include "condlab/kernel_field.hpp"
#include "condlab/mixture.hpp"

#include <span>
#include <vector>

namespace condlab {

enum class SampleAxis { x, y };

/// Per-axis Silverman factor for a product kernel in d = 2:
/// h = sigma_hat * (4 / ((d + 2) n))^(1 / (d + 4)), sigma_hat the unbiased sample std.
/// Throws degenerate-sample for n < 2 or zero variance.
double silverman_bandwidth(std::span<const Point2> samples, SampleAxis axis);

/// Samples plus per-axis bandwidths.
class KdeSpec {
public:
    KdeSpec(std::vector<Point2> samples, double bandwidth_x, double bandwidth_y);
    /// Silverman bandwidths on both axes.
    static KdeSpec silverman(std::vector<Point2> samples);

    const std::vector<Point2>& samples() const noexcept { return samples_; }
    double bandwidth_x() const noexcept { return hx_; }
    double bandwidth_y() const noexcept { return hy_; }

private:
    std::vector<Point2> samples_;
    double hx_;
    double hy_;
};

/// Mean of product Gaussian kernels at the grid nodes, renormalized to unit mass.
GridDensity2D kde_density(const KdeSpec& spec, const Grid2D& grid);

struct PluginResult {
    KernelField kernel;
    /// y indices whose marginal fell below the floor. Their slices are the floored
    /// ratio renormalized to unit mass; slices with no mass at all become uniform.
    std::vector<std::size_t> flagged;
};

/// Plug-in conditional of a KDE joint with the marginal floored at delta_floor.
PluginResult plugin_conditional(const GridDensity2D& rho_hat, double delta_floor = 1e-6);

} // namespace condlab
