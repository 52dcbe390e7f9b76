#include "condlab/estimator.hpp"

#include "condlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace condlab {

double silverman_bandwidth(std::span<const Point2> samples, SampleAxis axis) {
    const std::size_t n = samples.size();
    if (n < 2) fail(ErrorKind::degenerate_sample, "Silverman bandwidth needs at least 2 samples");
    auto coord = [axis](const Point2& p) { return axis == SampleAxis::x ? p.x : p.y; };
    double mean = 0.0;
    for (const auto& p : samples) mean += coord(p);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& p : samples) {
        const double d = coord(p) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) fail(ErrorKind::degenerate_sample, "samples have zero variance");
    constexpr double d = 2.0;
    return sd * std::pow(4.0 / ((d + 2.0) * static_cast<double>(n)), 1.0 / (d + 4.0));
}

KdeSpec::KdeSpec(std::vector<Point2> samples, double bandwidth_x, double bandwidth_y)
    : samples_(std::move(samples)), hx_(bandwidth_x), hy_(bandwidth_y) {
    if (samples_.size() < 2) fail(ErrorKind::degenerate_sample, "KDE needs at least 2 samples");
    require(hx_ > 0.0 && hy_ > 0.0, "KDE bandwidths must be positive");
}

KdeSpec KdeSpec::silverman(std::vector<Point2> samples) {
    const double hx = silverman_bandwidth(samples, SampleAxis::x);
    const double hy = silverman_bandwidth(samples, SampleAxis::y);
    return KdeSpec(std::move(samples), hx, hy);
}

GridDensity2D kde_density(const KdeSpec& spec, const Grid2D& grid) {
    const std::size_t nx = grid.nx(), ny = grid.ny();
    const double hx = spec.bandwidth_x(), hy = spec.bandwidth_y();
    const double norm = 1.0 / (2.0 * std::numbers::pi * hx * hy * static_cast<double>(spec.samples().size()));
    GridField2D f(grid);
    auto acc = f.values();
    std::vector<double> kx(nx), ky(ny);
    // product kernel: accumulate the outer product of per-axis kernel vectors
    for (const auto& s : spec.samples()) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double u = (grid.x().node(i) - s.x) / hx;
            kx[i] = std::exp(-0.5 * u * u);
        }
        for (std::size_t j = 0; j < ny; ++j) {
            const double u = (grid.y().node(j) - s.y) / hy;
            ky[j] = std::exp(-0.5 * u * u);
        }
        for (std::size_t i = 0; i < nx; ++i) {
            const double a = kx[i];
            if (a == 0.0) continue;
            double* row = acc.data() + i * ny;
            for (std::size_t j = 0; j < ny; ++j) row[j] += a * ky[j];
        }
    }
    for (double& v : acc) v *= norm;
    return GridDensity2D::normalized(std::move(f));
}

PluginResult plugin_conditional(const GridDensity2D& rho_hat, double delta_floor) {
    require(delta_floor > 0.0, "delta_floor must be positive");
    const auto& g = rho_hat.grid();
    const auto m = marginal_y(rho_hat);
    GridField2D k(g);
    std::vector<std::size_t> flagged;
    for (std::size_t j = 0; j < g.ny(); ++j) {
        const double denom = std::max(m[j], delta_floor);
        if (m[j] < delta_floor) flagged.push_back(j);
        for (std::size_t i = 0; i < g.nx(); ++i) k(i, j) = rho_hat(i, j) / denom;
    }
    // floored slices: rescale by the slice peak, then to unit mass; zero slices go uniform
    const double uniform = 1.0 / g.x().length();
    std::vector<double> col(g.nx());
    for (std::size_t j : flagged) {
        double peak = 0.0;
        for (std::size_t i = 0; i < g.nx(); ++i) peak = std::max(peak, rho_hat(i, j));
        if (peak > 0.0)
            for (std::size_t i = 0; i < g.nx(); ++i) col[i] = rho_hat(i, j) / peak;
        const double mass = peak > 0.0 ? integrate1d(g.x(), col) : 0.0;
        for (std::size_t i = 0; i < g.nx(); ++i) k(i, j) = mass > 0.0 ? col[i] / mass : uniform;
    }
    return PluginResult{KernelField(std::move(k)), std::move(flagged)};
}

} // namespace condlab
