#pragma once

#include "condlab/grid.hpp"
#include "condlab/kernel_field.hpp"
#include "condlab/rng.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace condlab {

/// One bivariate normal component. `xi` is the x-y correlation.
struct GaussianComponent {
    double weight = 1.0;
    double mu_x = 0.0;
    double mu_y = 0.0;
    double sigma_x = 1.0;
    double sigma_y = 1.0;
    double xi = 0.0;

    bool operator==(const GaussianComponent&) const = default;
};

/// K-component bivariate Gaussian mixture.
class MixtureParams {
public:
    /// Validates: weights nonnegative summing to 1 (1e-12), positive stds, |xi| < 1.
    explicit MixtureParams(std::vector<GaussianComponent> components);

    std::size_t size() const noexcept { return components_.size(); }
    const GaussianComponent& operator[](std::size_t k) const { return components_[k]; }
    const std::vector<GaussianComponent>& components() const noexcept { return components_; }

    bool operator==(const MixtureParams&) const = default;

    static MixtureParams standard_normal(double xi = 0.0);

private:
    std::vector<GaussianComponent> components_;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Sampling ranges for the randomized mixture family.
struct ParamRanges {
    Interval mean{-3.0, 3.0};
    Interval sigma{0.3, 1.2};
    Interval corr{-0.7, 0.7};

    void validate() const;
};

double normal_pdf(double x, double mean, double var);
double normal_logpdf(double x, double mean, double var);

double gmm_joint_pdf(const MixtureParams& p, double x, double y);
double gmm_marginal_y(const MixtureParams& p, double y);
/// Posterior component weights given y; computed in log space so they stay
/// well defined far in the tails.
std::vector<double> responsibilities(const MixtureParams& p, double y);
double gmm_conditional_pdf(const MixtureParams& p, double x, double y);
double gmm_conditional_logpdf(const MixtureParams& p, double x, double y);

/// Dirichlet(1_K) weights (normalized exponentials) and uniform parameters.
MixtureParams sample_params(std::size_t K, const ParamRanges& ranges, CounterRng& rng);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

/// Component by weight, then a Cholesky draw from its covariance.
std::vector<Point2> sample_points(const MixtureParams& p, std::size_t n, CounterRng& rng);

struct RenderedPair {
    GridDensity2D joint;
    KernelField kernel;
};

/// Joint renormalized by its quadrature mass on the grid; kernel evaluated from the
/// closed form and renormalized slice by slice (in log space, so slices whose
/// conditional mass lies off the grid still come out as valid densities).
RenderedPair render_pair(const MixtureParams& p, const Grid2D& grid);
GridDensity2D render_joint(const MixtureParams& p, const Grid2D& grid);
KernelField render_kernel(const MixtureParams& p, const Grid2D& grid);

} // namespace condlab
