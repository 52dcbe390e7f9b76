#include "condlab/mixture.hpp"

#include "condlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace condlab {

MixtureParams::MixtureParams(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
    require(!components_.empty(), "mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
        require(c.weight >= 0.0 && std::isfinite(c.weight), "mixture weights must be nonnegative");
        require(c.sigma_x > 0.0 && c.sigma_y > 0.0, "mixture stds must be positive");
        require(std::abs(c.xi) < 1.0, "mixture correlations must lie in (-1, 1)");
        require(std::isfinite(c.mu_x) && std::isfinite(c.mu_y) && std::isfinite(c.sigma_x) &&
                    std::isfinite(c.sigma_y),
                "mixture parameters must be finite");
        total += c.weight;
    }
    require(std::abs(total - 1.0) <= 1e-12, "mixture weights must sum to 1");
}

MixtureParams MixtureParams::standard_normal(double xi) {
    return MixtureParams({GaussianComponent{1.0, 0.0, 0.0, 1.0, 1.0, xi}});
}

void ParamRanges::validate() const {
    require(mean.lo <= mean.hi, "mean range is empty");
    require(sigma.lo <= sigma.hi && sigma.lo > 0.0, "sigma range must be positive and nonempty");
    require(corr.lo <= corr.hi && corr.lo > -1.0 && corr.hi < 1.0,
            "correlation range must lie inside (-1, 1)");
}

double normal_logpdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (d * d / var + std::log(2.0 * std::numbers::pi * var));
}

double normal_pdf(double x, double mean, double var) { return std::exp(normal_logpdf(x, mean, var)); }

namespace {

double component_joint_pdf(const GaussianComponent& c, double x, double y) {
    const double zx = (x - c.mu_x) / c.sigma_x;
    const double zy = (y - c.mu_y) / c.sigma_y;
    const double one_m = 1.0 - c.xi * c.xi;
    const double q = (zx * zx - 2.0 * c.xi * zx * zy + zy * zy) / one_m;
    return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * c.sigma_x * c.sigma_y * std::sqrt(one_m));
}

double conditional_mean(const GaussianComponent& c, double y) {
    return c.mu_x + c.xi * (c.sigma_x / c.sigma_y) * (y - c.mu_y);
}

double conditional_var(const GaussianComponent& c) {
    return c.sigma_x * c.sigma_x * (1.0 - c.xi * c.xi);
}

double log_sum_exp(const std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (m == -std::numeric_limits<double>::infinity()) return m;
    double s = 0.0;
    for (double a : v) s += std::exp(a - m);
    return m + std::log(s);
}

} // namespace

double gmm_joint_pdf(const MixtureParams& p, double x, double y) {
    double s = 0.0;
    for (const auto& c : p.components()) s += c.weight * component_joint_pdf(c, x, y);
    return s;
}

double gmm_marginal_y(const MixtureParams& p, double y) {
    double s = 0.0;
    for (const auto& c : p.components()) s += c.weight * normal_pdf(y, c.mu_y, c.sigma_y * c.sigma_y);
    return s;
}

std::vector<double> responsibilities(const MixtureParams& p, double y) {
    std::vector<double> logw(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const auto& c = p[k];
        logw[k] = (c.weight > 0.0 ? std::log(c.weight) : -std::numeric_limits<double>::infinity()) +
                  normal_logpdf(y, c.mu_y, c.sigma_y * c.sigma_y);
    }
    const double lse = log_sum_exp(logw);
    for (double& a : logw) a = std::exp(a - lse);
    return logw;
}

double gmm_conditional_pdf(const MixtureParams& p, double x, double y) {
    const auto r = responsibilities(p, y);
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
        s += r[k] * normal_pdf(x, conditional_mean(p[k], y), conditional_var(p[k]));
    return s;
}

double gmm_conditional_logpdf(const MixtureParams& p, double x, double y) {
    const auto r = responsibilities(p, y);
    std::vector<double> terms(p.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        terms[k] = (r[k] > 0.0 ? std::log(r[k]) : -std::numeric_limits<double>::infinity()) +
                   normal_logpdf(x, conditional_mean(p[k], y), conditional_var(p[k]));
    return log_sum_exp(terms);
}

MixtureParams sample_params(std::size_t K, const ParamRanges& ranges, CounterRng& rng) {
    require(K >= 1, "sample_params: K must be at least 1");
    ranges.validate();
    std::vector<GaussianComponent> comps(K);
    double total = 0.0;
    for (auto& c : comps) {
        c.weight = rng.exponential();
        total += c.weight;
    }
    for (auto& c : comps) {
        c.weight /= total;
        c.mu_x = rng.uniform(ranges.mean.lo, ranges.mean.hi);
        c.mu_y = rng.uniform(ranges.mean.lo, ranges.mean.hi);
        c.sigma_x = rng.uniform(ranges.sigma.lo, ranges.sigma.hi);
        c.sigma_y = rng.uniform(ranges.sigma.lo, ranges.sigma.hi);
        c.xi = rng.uniform(ranges.corr.lo, ranges.corr.hi);
    }
    return MixtureParams(std::move(comps));
}

std::vector<Point2> sample_points(const MixtureParams& p, std::size_t n, CounterRng& rng) {
    require(n >= 1, "sample_points: n must be at least 1");
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) cdf[k] = (acc += p[k].weight);
    std::vector<Point2> out(n);
    for (auto& pt : out) {
        const double u = rng.uniform() * acc;
        std::size_t k = 0;
        while (k + 1 < p.size() && u >= cdf[k]) ++k;
        const auto& c = p[k];
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        pt.x = c.mu_x + c.sigma_x * z1;
        pt.y = c.mu_y + c.sigma_y * (c.xi * z1 + std::sqrt(1.0 - c.xi * c.xi) * z2);
    }
    return out;
}

GridDensity2D render_joint(const MixtureParams& p, const Grid2D& grid) {
    GridField2D f(grid);
    for (std::size_t i = 0; i < grid.nx(); ++i)
        for (std::size_t j = 0; j < grid.ny(); ++j) f(i, j) = gmm_joint_pdf(p, grid.x().node(i), grid.y().node(j));
    return GridDensity2D::normalized(std::move(f));
}

KernelField render_kernel(const MixtureParams& p, const Grid2D& grid) {
    GridField2D f(grid);
    std::vector<double> logs(grid.nx());
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        const double y = grid.y().node(j);
        for (std::size_t i = 0; i < grid.nx(); ++i) logs[i] = gmm_conditional_logpdf(p, grid.x().node(i), y);
        const double top = *std::max_element(logs.begin(), logs.end());
        for (std::size_t i = 0; i < grid.nx(); ++i) f(i, j) = std::exp(logs[i] - top);
    }
    return normalize_slices(std::move(f));
}

RenderedPair render_pair(const MixtureParams& p, const Grid2D& grid) {
    return RenderedPair{render_joint(p, grid), render_kernel(p, grid)};
}

} // namespace condlab
