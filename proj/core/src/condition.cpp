#include "condlab/condition.hpp"

#include "condlab/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <string>

namespace condlab {

namespace {

void check_delta(const GridField1D& m, double delta_min) {
    require(delta_min > 0.0, "delta_min must be positive");
    for (std::size_t j = 0; j < m.size(); ++j)
        if (m[j] < delta_min)
            fail(ErrorKind::domain_violation,
                 "marginal " + std::to_string(m[j]) + " at y index " + std::to_string(j) +
                     " is below delta " + std::to_string(delta_min),
                 static_cast<long>(j));
}

// Locates y on the axis: returns (j, t) with y = (1 - t) y_j + t y_{j+1}, t in [0, 1).
// On a node t is exactly 0.
std::pair<std::size_t, double> locate(const Axis& axis, double y) {
    if (!(y >= axis.lo() && y <= axis.hi()))
        fail(ErrorKind::out_of_domain, "query y = " + std::to_string(y) + " lies outside the grid");
    const auto nodes = axis.nodes();
    auto it = std::upper_bound(nodes.begin(), nodes.end(), y);
    auto j = static_cast<std::size_t>(it - nodes.begin()) - 1;
    if (j + 1 >= nodes.size()) return {nodes.size() - 1, 0.0};
    if (nodes[j] == y) return {j, 0.0};
    return {j, (y - nodes[j]) / (nodes[j + 1] - nodes[j])};
}

// rho(., y) by linear interpolation between slices; exact column copy on nodes.
std::vector<double> slice_at(const GridField2D& f, std::size_t j, double t) {
    auto col = f.column(j);
    if (t == 0.0) return col;
    const auto next = f.column(j + 1);
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = (1.0 - t) * col[i] + t * next[i];
    return col;
}

std::vector<double> gaussian_taps(const Axis& axis, double eps) {
    const std::size_t n = axis.size();
    const double h = axis.spacing();
    std::vector<double> taps(2 * n - 1);
    for (std::size_t k = 0; k < taps.size(); ++k) {
        const double d = (static_cast<double>(k) - static_cast<double>(n - 1)) * h;
        taps[k] = std::exp(-d * d / (2.0 * eps));
    }
    return taps;
}

// FFTW's planner is not thread safe.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwDeleter {
    void operator()(double* p) const { fftw_free(p); }
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(p);
    }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// Smallest 7-smooth integer >= n.
std::size_t fast_fft_size(std::size_t n) {
    for (;; ++n) {
        std::size_t m = n;
        for (std::size_t p : {2u, 3u, 5u, 7u})
            while (m % p == 0) m /= p;
        if (m == 1) return n;
    }
}

GridField2D convolve_fft(const GridField2D& f, const std::vector<double>& kx, const std::vector<double>& ky) {
    const auto& g = f.grid();
    const std::size_t nx = g.nx(), ny = g.ny();
    // at least the full linear size, so no wrap-around reaches the cropped window
    const std::size_t px = fast_fft_size(nx + kx.size() - 1), py = fast_fft_size(ny + ky.size() - 1);
    const std::size_t pyc = py / 2 + 1;

    std::unique_ptr<double, FftwDeleter> a(fftw_alloc_real(px * py)), b(fftw_alloc_real(px * py));
    std::unique_ptr<fftw_complex, FftwDeleter> fa(fftw_alloc_complex(px * pyc)), fb(fftw_alloc_complex(px * pyc));
    PlanPtr fwd_a, fwd_b, inv;
    {
        std::lock_guard lock(fftw_planner_mutex());
        const int n0 = static_cast<int>(px), n1 = static_cast<int>(py);
        fwd_a.reset(fftw_plan_dft_r2c_2d(n0, n1, a.get(), fa.get(), FFTW_ESTIMATE));
        fwd_b.reset(fftw_plan_dft_r2c_2d(n0, n1, b.get(), fb.get(), FFTW_ESTIMATE));
        inv.reset(fftw_plan_dft_c2r_2d(n0, n1, fa.get(), a.get(), FFTW_ESTIMATE));
    }
    std::fill_n(a.get(), px * py, 0.0);
    std::fill_n(b.get(), px * py, 0.0);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) a.get()[i * py + j] = f(i, j);
    for (std::size_t i = 0; i < kx.size(); ++i)
        for (std::size_t j = 0; j < ky.size(); ++j) b.get()[i * py + j] = kx[i] * ky[j];
    fftw_execute(fwd_a.get());
    fftw_execute(fwd_b.get());
    for (std::size_t k = 0; k < px * pyc; ++k) {
        const std::complex<double> za(fa.get()[k][0], fa.get()[k][1]);
        const std::complex<double> zb(fb.get()[k][0], fb.get()[k][1]);
        const auto z = za * zb;
        fa.get()[k][0] = z.real();
        fa.get()[k][1] = z.imag();
    }
    fftw_execute(inv.get());
    // "same" crop: kernel centre sits at offset (n-1) in each tap vector
    const std::size_t ox = (kx.size() - 1) / 2, oy = (ky.size() - 1) / 2;
    const double scale = 1.0 / static_cast<double>(px * py);
    GridField2D out(g);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
            out(i, j) = std::max(0.0, a.get()[(i + ox) * py + (j + oy)] * scale);
    return out;
}

GridField2D convolve_direct(const GridField2D& f, const std::vector<double>& kx, const std::vector<double>& ky) {
    const auto& g = f.grid();
    const std::size_t nx = g.nx(), ny = g.ny();
    const auto cx = static_cast<std::ptrdiff_t>(nx - 1), cy = static_cast<std::ptrdiff_t>(ny - 1);
    GridField2D tmp(g), out(g);
    // along y
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < ny; ++l)
                s += f(i, l) * ky[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(l) + cy)];
            tmp(i, j) = s;
        }
    // along x
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < nx; ++l)
                s += tmp(l, j) * kx[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(l) + cx)];
            out(i, j) = s;
        }
    return out;
}

GridField2D mollify_field(const GridField2D& f, double eps, MollifyMethod method) {
    require(eps > 0.0 && std::isfinite(eps), "mollify: eps must be positive");
    const auto& g = f.grid();
    auto kx = gaussian_taps(g.x(), eps);
    auto ky = gaussian_taps(g.y(), eps);
    double sx = 0.0, sy = 0.0;
    for (double v : kx) sx += v;
    for (double v : ky) sy += v;
    for (double& v : kx) v /= sx;
    for (double& v : ky) v /= sy;
    return method == MollifyMethod::fft ? convolve_fft(f, kx, ky) : convolve_direct(f, kx, ky);
}

} // namespace

KernelField kernel_condition(const GridDensity2D& rho, double delta_min) {
    const auto m = marginal_y(rho);
    check_delta(m, delta_min);
    const auto& g = rho.grid();
    GridField2D k(g);
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) k(i, j) = rho(i, j) / m[j];
    return KernelField(std::move(k));
}

GridDensity1D incontext_condition(const GridDensity2D& rho, double y, double delta_min) {
    const auto& g = rho.grid();
    const auto [j, t] = locate(g.y(), y);
    check_delta(marginal_y(rho), delta_min);
    auto col = slice_at(rho.field(), j, t);
    double m;
    if (t == 0.0) {
        m = marginal_y(rho)[j];
    } else {
        m = integrate1d(g.x(), col);
    }
    for (double& v : col) v /= m;
    return GridDensity1D(GridField1D(g.x(), std::move(col)));
}

GridDensity2D mollify(const GridDensity2D& rho, double eps, MollifyMethod method) {
    return GridDensity2D::normalized(mollify_field(rho.field(), eps, method));
}

MollifierSchedule::MollifierSchedule(std::vector<double> epsilons) : eps_(std::move(epsilons)) {
    require(!eps_.empty(), "mollifier schedule is empty");
    for (std::size_t k = 0; k < eps_.size(); ++k) {
        require(eps_[k] > 0.0 && std::isfinite(eps_[k]), "mollifier epsilons must be positive");
        if (k > 0) require(eps_[k] < eps_[k - 1], "mollifier epsilons must be strictly decreasing");
    }
}

MollifierSchedule MollifierSchedule::default_schedule() {
    return MollifierSchedule({0.5, 0.2, 0.1, 0.05, 0.02});
}

ExtensionResult extension_limit(const GridDensity2D& rho, double y, const MollifierSchedule& schedule) {
    const auto& g = rho.grid();
    const auto [j, t] = locate(g.y(), y);
    std::vector<GridDensity1D> iterates;
    std::vector<double> steps;
    for (double eps : schedule.epsilons()) {
        // direct route: FFT round-off would swamp the marginal where it nearly vanishes
        const auto smooth = mollify_field(rho.field(), eps, MollifyMethod::direct);
        auto col = slice_at(smooth, j, t);
        const double m = integrate1d(g.x(), col);
        if (!(m >= 1e-300))
            fail(ErrorKind::degenerate_query,
                 "mollified marginal vanishes at y = " + std::to_string(y) + " (eps = " + std::to_string(eps) + ")");
        for (double& v : col) v /= m;
        iterates.emplace_back(GridField1D(g.x(), std::move(col)));
        if (iterates.size() > 1) {
            const auto& a = iterates[iterates.size() - 2];
            const auto& b = iterates.back();
            double d = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
            steps.push_back(d);
        }
    }
    GridDensity1D last = iterates.back();
    return ExtensionResult{std::move(last), std::move(iterates), std::move(steps)};
}

GridField2D truncate_tm(const GridField2D& f, double M) {
    if (!(M > 0.0)) fail(ErrorKind::invalid_argument, "truncation level M must be positive");
    GridField2D out = f;
    for (double& v : out.values()) v = std::clamp(v, -M, M);
    return out;
}

double truncate_relu(double z, double M) {
    return std::max(z + M, 0.0) - std::max(z - M, 0.0) - M;
}

GridField2D truncate_tm_relu(const GridField2D& f, double M) {
    if (!(M > 0.0)) fail(ErrorKind::invalid_argument, "truncation level M must be positive");
    GridField2D out = f;
    for (double& v : out.values()) v = truncate_relu(v, M);
    return out;
}

GridField2D zero_extend(const GridField2D& f, const Grid2D& target, const IndexBox& box) {
    const Grid2D sub = subgrid(target, box);
    if (!(f.grid() == sub)) fail(ErrorKind::invalid_argument, "zero_extend: field does not live on the box subgrid");
    GridField2D out(target);
    for (std::size_t i = 0; i < box.rows(); ++i)
        for (std::size_t j = 0; j < box.cols(); ++j) out(box.i0 + i, box.j0 + j) = f(i, j);
    return out;
}

GridField2D restrict_to(const GridField2D& f, const IndexBox& box) {
    const Grid2D sub = subgrid(f.grid(), box);
    GridField2D out(sub);
    for (std::size_t i = 0; i < box.rows(); ++i)
        for (std::size_t j = 0; j < box.cols(); ++j) out(i, j) = f(box.i0 + i, box.j0 + j);
    return out;
}

} // namespace condlab
