#include "condlab/condition.hpp"
#include "condlab/error.hpp"
#include "condlab/mixture.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace condlab;

namespace {

GridField2D from_fn(const Grid2D& g, auto fn) {
    GridField2D f(g);
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) f(i, j) = fn(g.x().node(i), g.y().node(j));
    return f;
}

GridDensity2D product(const Grid2D& g, auto f, auto h) {
    return GridDensity2D::normalized(from_fn(g, [&](double x, double y) { return f(x) * h(y); }));
}

std::vector<double> normalized_column(const GridField2D& f, std::size_t j) {
    auto c = f.column(j);
    const double m = integrate1d(f.grid().x(), c);
    for (double& v : c) v /= m;
    return c;
}

double bump(double x) { return std::exp(-0.5 * (x - 0.4) * (x - 0.4) / 1.69) + 0.3 * std::exp(-0.5 * (x + 1) * (x + 1)); }

} // namespace

TEST(KernelCondition, UniformAndProduct) {
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    const auto k = kernel_condition(GridDensity2D(from_fn(g, [](double, double) { return 1.0 / 144.0; })), 1e-6);
    for (double v : k.values()) EXPECT_NEAR(v, 1.0 / 12.0, 1e-15);

    const auto rho = product(g, bump, [](double y) { return 1.0 + 0.5 * std::sin(y); });
    const auto kp = kernel_condition(rho, 1e-9);
    const auto ref = normalized_column(rho.field(), 0);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_NEAR(kp(i, j), ref[i], 1e-14);
}

TEST(KernelCondition, DomainViolationNamesSlice) {
    const auto g = make_grid(-6, 6, 16, -6, 6, 16);
    const auto rho = GridDensity2D::normalized(from_fn(g, [](double, double y) { return y > 5.5 ? 0.0 : 1.0; }));
    try {
        kernel_condition(rho, 1e-3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain_violation);
        EXPECT_EQ(e.index().value_or(-1), 15);
    }
}

TEST(KernelCondition, GaussianMatchesClosedFormAndConverges) {
    const auto p = MixtureParams::standard_normal(0.5);
    double prev = 0.0;
    for (std::size_t n : {128u, 256u}) {
        const auto g = make_grid(-6, 6, n, -6, 6, n);
        const auto k = kernel_condition(render_joint(p, g), 1e-12);
        double raw = 0.0, quad = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double y = g.y().node(j), mu = 0.5 * y, s = std::sqrt(0.75) * std::sqrt(2.0);
            // closed-form conditional mass inside [-6, 6]
            const double inside = 0.5 * (std::erf((6 - mu) / s) - std::erf((-6 - mu) / s));
            for (std::size_t i = 0; i < n; ++i) {
                const double c = gmm_conditional_pdf(p, g.x().node(i), y);
                raw = std::max(raw, std::abs(k(i, j) - c));
                quad = std::max(quad, std::abs(k(i, j) - c / inside));
            }
        }
        if (n == 256) {
            EXPECT_LE(raw, 2e-4);
            EXPECT_NEAR(prev / quad, 4.0, 0.2);
        }
        prev = quad;
    }
}

TEST(KernelCondition, ReconstructionIdentity) {
    const auto g = make_grid(-6, 6, 48, -6, 6, 48);
    auto r = CounterRng::stream(3, 0);
    for (int t = 0; t < 20; ++t) {
        const auto rho = render_joint(sample_params(3, ParamRanges{}, r), g);
        const auto k = kernel_condition(rho, 1e-300);
        const auto m = marginal_y(rho);
        for (std::size_t i = 0; i < g.nx(); ++i)
            for (std::size_t j = 0; j < g.ny(); ++j) {
                const double v = rho(i, j);
                EXPECT_LE(std::abs(k(i, j) * m[j] - v), 1e-12 * v + 1e-300);
            }
    }
}

TEST(KernelCondition, ComponentOrderDoesNotMatter) {
    const auto g = make_grid(-6, 6, 40, -6, 6, 40);
    auto r = CounterRng::stream(4, 0);
    const auto p = sample_params(3, ParamRanges{}, r);
    auto c = p.components();
    std::reverse(c.begin(), c.end());
    const auto k1 = kernel_condition(render_joint(p, g), 1e-12);
    const auto k2 = kernel_condition(render_joint(MixtureParams(c), g), 1e-12);
    for (std::size_t n = 0; n < k1.values().size(); ++n)
        EXPECT_LE(std::abs(k1.values()[n] - k2.values()[n]), 1e-12 * std::max(1.0, k1.values()[n]));
}

TEST(InContext, OnNodeEqualsKernelColumnExactly) {
    const auto g = make_grid(-6, 6, 32, -6, 6, 32);
    auto r = CounterRng::stream(5, 0);
    const auto rho = render_joint(sample_params(3, ParamRanges{}, r), g);
    const auto k = kernel_condition(rho, 1e-300);
    for (std::size_t j = 0; j < g.ny(); ++j) {
        const auto c = incontext_condition(rho, g.y().node(j), 1e-300);
        for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_EQ(c[i], k(i, j));
    }
}

TEST(InContext, ProductOffNodeAndErrors) {
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    const auto rho = product(g, bump, [](double y) { return 2.0 + std::cos(y); });
    const auto ref = normalized_column(rho.field(), 0);
    for (double y : {-5.9, 0.123, 3.3}) {
        const auto c = incontext_condition(rho, y, 1e-9);
        for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-14);
    }
    EXPECT_THROW(incontext_condition(rho, 6.01, 1e-9), Error);
    try {
        incontext_condition(rho, -7, 1e-9);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::out_of_domain);
    }
}

TEST(InContext, GaussianOffNodeClosedForm) {
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    const auto p = MixtureParams::standard_normal(0.5);
    const auto c = incontext_condition(render_joint(p, g), 0.5, 1e-12);
    double err = 0;
    for (std::size_t i = 0; i < g.nx(); ++i) err = std::max(err, std::abs(c[i] - gmm_conditional_pdf(p, g.x().node(i), 0.5)));
    EXPECT_LE(err, 1e-3);
}

TEST(Mollify, TinyEpsilonIsIdentity) {
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    auto r = CounterRng::stream(6, 0);
    const auto rho = render_joint(sample_params(3, ParamRanges{}, r), g);
    const double eps = std::pow(g.hx() / 10, 2);
    for (auto m : {MollifyMethod::fft, MollifyMethod::direct})
        EXPECT_LE(sup_distance(mollify(rho, eps, m).field(), rho.field()), 1e-6);
}

TEST(Mollify, SpikeSecondMomentAndContracts) {
    const auto g = make_grid(-6, 6, 65, -6, 6, 65);
    GridField2D spike(g);
    spike(32, 32) = 1.0;
    const auto rho = GridDensity2D::normalized(spike);
    const double eps = 0.3;
    for (auto m : {MollifyMethod::fft, MollifyMethod::direct}) {
        const auto out = mollify(rho, eps, m);
        EXPECT_NEAR(integrate2d(out.field()), 1.0, 1e-8);
        for (double v : out.values()) EXPECT_GE(v, 0.0);
        GridField2D x2(g);
        for (std::size_t i = 0; i < g.nx(); ++i)
            for (std::size_t j = 0; j < g.ny(); ++j) x2(i, j) = out(i, j) * g.x().node(i) * g.x().node(i);
        EXPECT_NEAR(integrate2d(x2) / eps, 1.0, 0.05);
    }
    EXPECT_THROW(mollify(rho, 0.0), Error);
}

TEST(Mollify, FftAndDirectAgree) {
    const auto g = make_grid(-6, 6, 48, -6, 6, 40);
    auto r = CounterRng::stream(7, 0);
    const auto rho = render_joint(sample_params(3, ParamRanges{}, r), g);
    for (double eps : {0.02, 0.5, 3.0})
        EXPECT_LE(sup_distance(mollify(rho, eps, MollifyMethod::fft).field(), mollify(rho, eps, MollifyMethod::direct).field()), 1e-12);
}

TEST(Schedule, Validation) {
    EXPECT_EQ(MollifierSchedule::default_schedule().epsilons(), (std::vector<double>{0.5, 0.2, 0.1, 0.05, 0.02}));
    EXPECT_THROW(MollifierSchedule({0.2, 0.2}), Error);
    EXPECT_THROW(MollifierSchedule({0.2, -0.1}), Error);
    EXPECT_THROW(MollifierSchedule(std::vector<double>{}), Error);
}

TEST(Extension, ProductWithVanishingMarginalRecoversF) {
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    auto f = [](double x) { return std::exp(-0.5 * (x - 0.3) * (x - 0.3) / 4.0); };
    const auto rho = product(g, f, [](double y) { return y > 0 ? y * y : 0.0; });
    const auto res = extension_limit(rho, -1.0, MollifierSchedule::default_schedule());
    const auto ref = normalized_column(product(g, f, [](double) { return 1.0; }).field(), 0);
    double err = 0;
    for (std::size_t i = 0; i < g.nx(); ++i) err = std::max(err, std::abs(res.conditional[i] - ref[i]));
    EXPECT_LE(err, 1e-3);
    ASSERT_EQ(res.iterates.size(), 5u);
    ASSERT_EQ(res.step_sup_distances.size(), 4u);
    EXPECT_LT(res.step_sup_distances[3], res.step_sup_distances[2]);
    EXPECT_LT(res.step_sup_distances[2], res.step_sup_distances[1]);
}

TEST(Extension, AgreesWithExactOperatorInsideXDelta) {
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    const auto rho = product(g, [](double x) { return std::exp(-x * x / 8.0); },
                             [](double y) { return 1.0 + 0.3 * std::cos(y); });
    const auto res = extension_limit(rho, 0.7, MollifierSchedule::default_schedule());
    const auto exact = incontext_condition(rho, 0.7, 1e-6);
    for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_NEAR(res.conditional[i], exact[i], 1e-3);
}

TEST(Extension, SingleEpsilonIsMollifiedConditioning) {
    const auto g = make_grid(-6, 6, 32, -6, 6, 32);
    auto r = CounterRng::stream(8, 0);
    const auto rho = render_joint(sample_params(3, ParamRanges{}, r), g);
    const auto res = extension_limit(rho, 1.0, MollifierSchedule({0.1}));
    const auto ref = incontext_condition(mollify(rho, 0.1, MollifyMethod::direct), 1.0, 1e-300);
    for (std::size_t i = 0; i < g.nx(); ++i) EXPECT_NEAR(res.conditional[i], ref[i], 1e-13);
    EXPECT_TRUE(res.step_sup_distances.empty());
}

TEST(Truncation, ClampContracts) {
    const auto g = make_grid(0, 1, 4, 0, 1, 4);
    auto r = CounterRng::stream(9, 0);
    GridField2D f(g);
    for (double& v : f.values()) v = r.uniform(-1, 1);
    EXPECT_EQ(sup_distance(truncate_tm(f, 1.0), f), 0.0);
    f(0, 0) = 4.0;
    f(1, 1) = -4.0;
    const auto t = truncate_tm(f, 2.0);
    EXPECT_EQ(t(0, 0), 2.0);
    EXPECT_EQ(t(1, 1), -2.0);
    EXPECT_THROW(truncate_tm(f, 0.0), Error);
    EXPECT_THROW(truncate_tm(f, -1.0), Error);
}

TEST(Truncation, ReluFormMatchesClamp) {
    auto r = CounterRng::stream(10, 0);
    const auto g = make_grid(0, 1, 32, 0, 1, 32);
    for (double M : {0.5, 1.0, 3.0}) {
        GridField2D f(g);
        for (double& v : f.values()) v = r.uniform(-3 * M, 3 * M);
        const auto a = truncate_tm(f, M), b = truncate_tm_relu(f, M);
        // the ReLU form rounds (z + M) before removing M, so it agrees to one ulp of M
        for (std::size_t n = 0; n < a.values().size(); ++n)
            EXPECT_LE(std::abs(a.values()[n] - b.values()[n]), std::nextafter(M, 2 * M) - M);
    }
    EXPECT_EQ(truncate_relu(5.0, 1.0), 1.0);
    EXPECT_EQ(truncate_relu(-5.0, 1.0), -1.0);
    EXPECT_EQ(truncate_relu(0.5, 1.0), 0.5);
}

TEST(Truncation, L1GapNonincreasingInM) {
    const auto g = make_grid(-2, 2, 24, -2, 2, 24);
    auto r = CounterRng::stream(11, 0);
    GridField2D f(g);
    for (double& v : f.values()) v = 3 * r.normal();
    double prev = INFINITY;
    for (double M : {0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 100.0}) {
        const auto t = truncate_tm(f, M);
        EXPECT_LE(sup_norm(t), M);
        const double gap = l1_distance(f, t);
        EXPECT_LE(gap, prev);
        prev = gap;
    }
    EXPECT_EQ(prev, 0.0);
}

TEST(ZeroExtend, RestrictIsLeftInverse) {
    const auto g = make_grid(-6, 6, 20, -6, 6, 16);
    const IndexBox box{3, 15, 2, 10};
    const auto sub = subgrid(g, box);
    auto r = CounterRng::stream(12, 0);
    GridField2D f(sub);
    for (double& v : f.values()) v = r.uniform();
    const auto ext = zero_extend(f, g, box);
    EXPECT_EQ(sup_distance(restrict_to(ext, box), f), 0.0);
    EXPECT_NEAR(l1_distance(ext, GridField2D(g), box), l1_distance(f, GridField2D(sub)), 1e-12);
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j)
            if (i < 3 || i >= 15 || j < 2 || j >= 10) EXPECT_EQ(ext(i, j), 0.0);

    GridField2D full(g);
    for (double& v : full.values()) v = r.uniform();
    EXPECT_EQ(sup_distance(zero_extend(full, g, IndexBox::full(g)), full), 0.0);
    EXPECT_THROW(restrict_to(full, IndexBox{0, 21, 0, 16}), Error);
    EXPECT_THROW(zero_extend(f, g, IndexBox{9, 21, 2, 10}), Error);
}
