#include "condlab/error.hpp"
#include "condlab/mixture.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace condlab;

namespace {

double biv_pdf(double x, double y, const GaussianComponent& c) {
    const double zx = (x - c.mu_x) / c.sigma_x, zy = (y - c.mu_y) / c.sigma_y;
    const double q = (zx * zx - 2 * c.xi * zx * zy + zy * zy) / (1 - c.xi * c.xi);
    return std::exp(-0.5 * q) / (2 * std::numbers::pi * c.sigma_x * c.sigma_y * std::sqrt(1 - c.xi * c.xi));
}

MixtureParams one(double xi, double sx = 1, double sy = 1, double mx = 0, double my = 0) {
    return MixtureParams({{1.0, mx, my, sx, sy, xi}});
}

} // namespace

TEST(Mixture, ValidatesParameters) {
    EXPECT_THROW(MixtureParams({{0.5, 0, 0, 1, 1, 0}}), Error);
    EXPECT_THROW(MixtureParams({{1.0, 0, 0, 0, 1, 0}}), Error);
    EXPECT_THROW(MixtureParams({{1.0, 0, 0, 1, 1, 1.0}}), Error);
    EXPECT_THROW(MixtureParams({{1.2, 0, 0, 1, 1, 0}, {-0.2, 0, 0, 1, 1, 0}}), Error);
    EXPECT_THROW(MixtureParams(std::vector<GaussianComponent>{}), Error);
    EXPECT_NO_THROW(MixtureParams({{0.25, 0, 0, 1, 1, 0}, {0.75, 0, 0, 1, 1, 0}}));
}

TEST(Mixture, JointPdfOracles) {
    EXPECT_NEAR(gmm_joint_pdf(MixtureParams::standard_normal(), 0, 0), 1.0 / (2 * std::numbers::pi), 1e-15);
    const double a = 1.3;
    const MixtureParams sym({{0.5, -a, 0, 1, 1, 0}, {0.5, a, 0, 1, 1, 0}});
    const MixtureParams single({{1.0, a, 0, 1, 1, 0}});
    EXPECT_NEAR(gmm_joint_pdf(sym, 0, 0), gmm_joint_pdf(single, 0, 0), 1e-16);
    const auto p = one(0.5);
    EXPECT_NEAR(gmm_joint_pdf(p, 1, 1), biv_pdf(1, 1, p[0]), 1e-12 * biv_pdf(1, 1, p[0]));
}

TEST(Mixture, JointMatchesQuadraticFormOnRandomComponents) {
    auto rng = CounterRng::stream(9, 0);
    for (int t = 0; t < 50; ++t) {
        const auto p = sample_params(1, ParamRanges{}, rng);
        const double x = rng.uniform(-4, 4), y = rng.uniform(-4, 4);
        const double ref = biv_pdf(x, y, p[0]);
        EXPECT_NEAR(gmm_joint_pdf(p, x, y), ref, 1e-12 * ref + 1e-300);
    }
}

TEST(Mixture, MarginalY) {
    for (double y : {-3.0, 0.0, 0.7, 5.0}) EXPECT_NEAR(gmm_marginal_y(MixtureParams::standard_normal(0.4), y), normal_pdf(y, 0, 1), 1e-16);
    const MixtureParams p({{0.3, 1, -1, 0.8, 0.5, 0.2}, {0.7, -1, 2, 1.1, 1.3, -0.4}});
    for (double y : {-2.0, 0.1, 2.5})
        EXPECT_NEAR(gmm_marginal_y(p, y), 0.3 * normal_pdf(y, -1, 0.25) + 0.7 * normal_pdf(y, 2, 1.69), 1e-15);
}

TEST(Mixture, ConditionalClosedForm) {
    const auto p = one(0.5);
    for (double x : {-2.0, 0.0, 0.5, 1.7})
        EXPECT_NEAR(gmm_conditional_pdf(p, x, 1.0), normal_pdf(x, 0.5, 0.75), 1e-14);
    const auto ind = one(0.0, 0.7, 1.4, 0.3, -1.0);
    for (double y : {-5.0, 0.0, 3.0})
        for (double x : {-1.0, 0.3, 2.0}) EXPECT_NEAR(gmm_conditional_pdf(ind, x, y), normal_pdf(x, 0.3, 0.49), 1e-14);
}

TEST(Mixture, ConditionalMatchesFineQuadratureRatio) {
    auto rng = CounterRng::stream(10, 0);
    const auto p = sample_params(3, ParamRanges{}, rng);
    const std::size_t n = 4096;
    const double lo = -12, hi = 12, h = (hi - lo) / (n - 1);
    for (int t = 0; t < 20; ++t) {
        const double x = rng.uniform(-3, 3), y = rng.uniform(-3, 3);
        double mass = 0;
        for (std::size_t i = 0; i < n; ++i)
            mass += (i == 0 || i + 1 == n ? 0.5 : 1.0) * h * gmm_joint_pdf(p, lo + i * h, y);
        const double ref = gmm_joint_pdf(p, x, y) / mass;
        EXPECT_NEAR(gmm_conditional_pdf(p, x, y), ref, 1e-6);
    }
}

TEST(Mixture, ResponsibilitiesStayFiniteInTails) {
    const MixtureParams p({{0.5, 0, -3, 1, 0.3, 0}, {0.5, 0, 3, 1, 0.3, 0}});
    const auto r = responsibilities(p, 60.0);
    EXPECT_NEAR(r[0] + r[1], 1.0, 1e-15);
    EXPECT_NEAR(r[1], 1.0, 1e-15);
    EXPECT_TRUE(std::isfinite(gmm_conditional_logpdf(p, 0.0, 60.0)));
}

TEST(Mixture, SampleParamsDeterminismAndMoments) {
    auto a = CounterRng::stream(1, 0), b = CounterRng::stream(1, 0);
    EXPECT_EQ(sample_params(3, ParamRanges{}, a), sample_params(3, ParamRanges{}, b));
    auto r = CounterRng::stream(2, 0);
    for (int t = 0; t < 10; ++t) EXPECT_EQ(sample_params(1, ParamRanges{}, r)[0].weight, 1.0);

    const int n = 100000;
    double w[3] = {0, 0, 0}, mx = 0;
    for (int t = 0; t < n; ++t) {
        const auto p = sample_params(3, ParamRanges{}, r);
        for (int k = 0; k < 3; ++k) {
            w[k] += p[k].weight;
            mx += p[k].mu_x;
            EXPECT_GE(p[k].sigma_x, 0.3);
            EXPECT_LE(std::abs(p[k].xi), 0.7);
        }
    }
    for (double v : w) EXPECT_NEAR(v / n, 1.0 / 3.0, 0.01);
    EXPECT_NEAR(mx / (3.0 * n), 0.0, 0.02);
}

TEST(Mixture, SamplePointsCovariance) {
    for (double xi : {0.0, 0.9}) {
        auto r = CounterRng::stream(20, 0);
        const auto pts = sample_points(one(xi), 100000, r);
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (const auto& p : pts) {
            sx += p.x;
            sy += p.y;
            sxx += p.x * p.x;
            syy += p.y * p.y;
            sxy += p.x * p.y;
        }
        const double n = static_cast<double>(pts.size());
        const double vx = sxx / n - sx * sx / n / n, vy = syy / n - sy * sy / n / n, cxy = sxy / n - sx * sy / n / n;
        EXPECT_NEAR(vx, 1.0, 0.02);
        EXPECT_NEAR(vy, 1.0, 0.02);
        EXPECT_NEAR(cxy / std::sqrt(vx * vy), xi, 0.02);
    }
    auto a = CounterRng::stream(21, 0), b = CounterRng::stream(21, 0);
    EXPECT_EQ(sample_points(one(0.3), 500, a), sample_points(one(0.3), 500, b));
}

TEST(Mixture, RenderContracts) {
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    const auto joint = render_joint(MixtureParams::standard_normal(), g);
    EXPECT_NEAR(integrate2d(joint.field()), 1.0, 1e-8);

    auto r = CounterRng::stream(0, 0);
    for (int t = 0; t < 20; ++t) {
        const auto k = render_kernel(sample_params(3, ParamRanges{}, r), g);
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const auto col = k.field().column(j);
            EXPECT_NEAR(integrate1d(g.x(), col), 1.0, 1e-8);
        }
    }
}

TEST(Mixture, KernelSliceMatchesQuadratureRatio) {
    const auto g = make_grid(-6, 6, 65, -6, 6, 65);
    auto r = CounterRng::stream(0, 0);
    const auto p = sample_params(3, ParamRanges{}, r);
    const auto k = render_kernel(p, g);
    const std::size_t j0 = 32;  // y = 0
    ASSERT_EQ(g.y().node(j0), 0.0);
    std::vector<double> col(g.nx());
    for (std::size_t i = 0; i < g.nx(); ++i) col[i] = gmm_joint_pdf(p, g.x().node(i), 0.0);
    const double m = integrate1d(g.x(), col);
    for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_NEAR(k(i, j0), col[i] / m, 1e-6);
}

TEST(Mixture, RenderPairAgreesWithSeparateRenders) {
    const auto g = make_grid(-6, 6, 32, -6, 6, 32);
    auto r = CounterRng::stream(7, 0);
    const auto p = sample_params(3, ParamRanges{}, r);
    const auto pair = render_pair(p, g);
    const auto kj = render_joint(p, g);
    const auto kk = render_kernel(p, g);
    EXPECT_EQ(sup_distance(pair.joint.field(), kj.field()), 0.0);
    EXPECT_EQ(sup_distance(pair.kernel.field(), kk.field()), 0.0);
}
