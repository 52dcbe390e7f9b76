#include "condlab/audit/audit.hpp"
#include "condlab/audit/report.hpp"
#include "condlab/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace condlab;
using namespace condlab::audit;

namespace {

GridDensity2D uniform(const Grid2D& g) {
    return GridDensity2D::normalized(GridField2D(g, std::vector<double>(g.size(), 1.0)));
}

GridDensity2D with_bump(const GridDensity2D& base, double cx, double cy, double height) {
    const auto& g = base.grid();
    GridField2D f = base.field();
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const double dx = g.x().node(i) - cx, dy = g.y().node(j) - cy;
            f(i, j) += height * std::exp(-(dx * dx + dy * dy) / 0.5);
        }
    return GridDensity2D::normalized(std::move(f));
}

PairSampler fixed(DensityPair pair) {
    return [pair](CounterRng&) { return pair; };
}

AuditOptions small(std::size_t trials, std::uint64_t seed = 1) {
    AuditOptions o;
    o.trials = trials;
    o.seed = seed;
    return o;
}

MixtureSamplerConfig sampler_config(std::size_t n) {
    MixtureSamplerConfig c;
    c.grid = make_grid(-6, 6, n, -6, 6, n);
    return c;
}

} // namespace

TEST(Report, CountsSummaryAndCsvRoundTrip) {
    AuditReport r;
    r.name = "probe";
    r.tol = 1e-9;
    r.requested = 4;
    r.rejected = 2;
    r.config = {{"seed", "3"}, {"M_grid", "0.5 1 2"}};
    r.trials = {{0, 1.0, 2.0, 0.5, 0.1}, {1, 1.0, 1.0, 1.0 + 5e-10, 0.2},
                {2, 1.0, 0.5, 2.0, 1.0 / 3.0}, {3, 0.0, 0.0, 0.0, 0.0}};
    EXPECT_EQ(r.violations(), 1u);
    EXPECT_EQ(r.max_ratio(), 2.0);
    EXPECT_EQ(summary_line(r), "audit probe: trials=4 violations=1 max_ratio=2");
    const auto back = from_csv(to_csv(r));
    EXPECT_EQ(back, r);

    const auto path = std::filesystem::temp_directory_path() / "condlab_audit_probe.csv";
    write_report(path, r);
    EXPECT_EQ(read_report(path), r);
    std::filesystem::remove(path);
}

TEST(Report, NonFiniteRatioIsViolation) {
    AuditReport r;
    r.trials = {{0, 1.0, 0.0, INFINITY, 0.0}, {1, NAN, 1.0, NAN, 0.0}};
    EXPECT_EQ(r.violations(), 2u);
}

TEST(Report, MalformedCsvIsRejected) {
    EXPECT_THROW(from_csv("trial,lhs\n1,2\n"), Error);
    EXPECT_THROW(from_csv("# audit=x\n# tol=1e-9\ntrial,lhs,rhs,ratio,delta\n0,1,2,abc,0\n"), Error);
}

TEST(KernelLipschitz, IdenticalPairHasZeroRatio) {
    const auto g = make_grid(-6, 6, 24, -6, 6, 24);
    const auto p = with_bump(uniform(g), 0.5, -0.5, 0.05);
    const auto r = audit_kernel_lipschitz(fixed({p, p}), 1e-3, small(3));
    ASSERT_EQ(r.completed(), 3u);
    for (const auto& t : r.trials) {
        EXPECT_EQ(t.lhs, 0.0);
        EXPECT_EQ(t.ratio, 0.0);
    }
}

TEST(KernelLipschitz, SmallBumpOnUniformStaysBelowBound) {
    const auto g = make_grid(-6, 6, 32, -6, 6, 32);
    const auto p = uniform(g);
    const auto q = with_bump(p, 1.0, 2.0, 1e-3);
    EXPECT_NEAR(sup_distance(p.field(), q.field()), 1e-3, 2e-4);
    const auto r = audit_kernel_lipschitz(fixed({p, q}), 1e-3, small(1));
    ASSERT_EQ(r.completed(), 1u);
    EXPECT_GT(r.trials[0].lhs, 0.0);
    EXPECT_LT(r.trials[0].ratio, 1.0);
}

TEST(KernelLipschitz, RejectsPairsBelowDelta) {
    const auto g = make_grid(-6, 6, 16, -6, 6, 16);
    GridField2D f(g, std::vector<double>(g.size(), 1.0));
    for (std::size_t i = 0; i < g.nx(); ++i) f(i, 15) = 0.0;
    const auto p = GridDensity2D::normalized(f);
    auto o = small(2);
    o.max_attempts = 3;
    const auto r = audit_kernel_lipschitz(fixed({p, p}), 1e-3, o);
    EXPECT_EQ(r.completed(), 0u);
    EXPECT_EQ(r.rejected, 6u);
}

TEST(KernelLipschitz, RandomMixturesHoldAndAreDeterministic) {
    const auto s = mixture_pair_sampler(sampler_config(24));
    const auto a = audit_kernel_lipschitz(s, 1e-3, small(60, 5));
    EXPECT_EQ(a.completed(), 60u);
    EXPECT_EQ(a.violations(), 0u);
    EXPECT_GT(a.max_ratio(), 0.0);
    auto o = small(60, 5);
    o.threads = 3;
    EXPECT_EQ(audit_kernel_lipschitz(s, 1e-3, o), a);
}

TEST(L1Lipschitz, IdenticalAndOutsideBPairs) {
    const auto g = make_grid(-6, 6, 32, -6, 6, 32);
    const auto p = uniform(g);
    const auto same = audit_l1_lipschitz(fixed({p, p}), 1e-3, 8, 24, small(1));
    EXPECT_EQ(same.trials[0].ratio, 0.0);

    // bump confined to y near 5.5, well outside the B rows [8, 24)
    const auto q = with_bump(p, 0.0, 5.5, 0.02);
    const auto r = audit_l1_lipschitz(fixed({p, q}), 1e-3, 8, 24, small(1));
    ASSERT_EQ(r.completed(), 1u);
    EXPECT_GT(r.trials[0].lhs, 0.0);
    EXPECT_LT(r.trials[0].lhs, 0.1 * r.trials[0].rhs);
}

TEST(L1Lipschitz, RandomMixturesHold) {
    const auto r = audit_l1_lipschitz(mixture_pair_sampler(sampler_config(24)), 1e-3, 6, 18, small(60, 6));
    EXPECT_EQ(r.completed(), 60u);
    EXPECT_EQ(r.violations(), 0u);
}

TEST(Holder, SeminormOracles) {
    const auto g = make_grid(0, 3, 4, 0, 3, 4);
    GridField2D lin(g);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) lin(i, j) = 2.0 * g.x().node(i) + 0.0 * g.y().node(j);
    EXPECT_NEAR(holder_seminorm(lin, 1.0), 2.0, 1e-15);
    GridField2D step(g);
    step(3, 3) = 1.0;
    EXPECT_NEAR(holder_seminorm(step, 0.5), 1.0, 1e-15);
    auto rng = CounterRng::stream(1, 0);
    EXPECT_LE(holder_seminorm(lin, 1.0, 50, &rng), 2.0 + 1e-15);
    EXPECT_THROW(holder_seminorm(lin, 1.5), Error);
}

TEST(Holder, RandomMixturesHoldWithCertifiedR) {
    const auto r = audit_holder_incontext(mixture_pair_sampler(sampler_config(16)), 1.0, 10.0, 1e-3, 0, small(60, 7));
    EXPECT_EQ(r.completed(), 60u);
    EXPECT_EQ(r.violations(), 0u);
}

TEST(Holder, IdenticalPairQueryShift) {
    const auto g = make_grid(-6, 6, 16, -6, 6, 16);
    auto rng = CounterRng::stream(3, 0);
    const auto base = render_joint(sample_params(2, ParamRanges{}, rng), g);
    GridField2D f(g);
    for (std::size_t n = 0; n < g.size(); ++n) f.values()[n] = 0.7 * base.values()[n] + 0.3 / 144.0;
    const auto p = GridDensity2D::normalized(f);
    const auto r = audit_holder_incontext(fixed({p, p}), 1.0, 10.0, 1e-3, 0, small(40, 8));
    EXPECT_EQ(r.completed(), 40u);
    EXPECT_EQ(r.violations(), 0u);
}

TEST(Truncation, ConstantFieldClosedForm) {
    const auto g = make_grid(-6, 6, 16, -6, 6, 16);
    const double c = 2.5;
    GridField2D f(g, std::vector<double>(g.size(), c));
    for (double M : {0.5, 1.0, 2.0}) EXPECT_NEAR(l1_distance(f, truncate_tm(f, M)), (c - M) * 144.0, 1e-11);
}

TEST(Truncation, UnitSupFieldGapsDecreaseToZero) {
    const auto g = make_grid(-6, 6, 24, -6, 6, 24);
    GridField2D f(g);
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) f(i, j) = std::sin(g.x().node(i)) * std::cos(g.y().node(j) / 2);
    f.values()[0] = 1.0;
    double prev = INFINITY;
    for (double M : {0.5, 1.0, 2.0, 4.0}) {
        const double gap = l1_distance(f, truncate_tm(f, M));
        EXPECT_LT(gap, prev);
        if (M >= 1.0) EXPECT_EQ(gap, 0.0);
        prev = M >= 1.0 ? 1e-300 : gap;
    }
    const auto r = audit_truncation([&](CounterRng&) { return f; }, {0.5, 1, 2, 4}, small(1));
    EXPECT_LE(r.trials[0].ratio, 1.0);
}

TEST(Truncation, RandomFieldsHold) {
    const auto r = audit_truncation(bump_field_sampler(make_grid(-6, 6, 24, -6, 6, 24)), {0.5, 1, 2, 4}, small(100, 9));
    EXPECT_EQ(r.completed(), 100u);
    EXPECT_EQ(r.violations(), 0u);
    EXPECT_THROW(audit_truncation(bump_field_sampler(make_grid(-6, 6, 8, -6, 6, 8)), {1, 0.5}, small(1)), Error);
}

TEST(ProductExtension, UniformGRecoversF) {
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    ProductCase c;
    c.grid = g;
    c.f.resize(64);
    c.g.assign(64, 1.0);
    for (std::size_t i = 0; i < 64; ++i) c.f[i] = normal_pdf(g.x().node(i), 0.2, 1.69);
    c.y = 2.2;
    const auto r = audit_product_extension([c](CounterRng&) { return c; }, MollifierSchedule::default_schedule(), 5e-3, small(1));
    ASSERT_EQ(r.completed(), 1u);
    EXPECT_LE(r.trials[0].lhs, 5e-3);
    EXPECT_LE(r.trials[0].ratio, 1.0);
}

TEST(ProductExtension, VanishingRampQueryInZeroRegion) {
    const auto g = make_grid(-6, 6, 64, -6, 6, 64);
    ProductCase c;
    c.grid = g;
    c.f.resize(64);
    c.g.resize(64);
    for (std::size_t i = 0; i < 64; ++i) c.f[i] = normal_pdf(g.x().node(i), -0.5, 1.44) + 0.5 * normal_pdf(g.x().node(i), 0.8, 2.0);
    for (std::size_t j = 0; j < 64; ++j) c.g[j] = std::pow(std::max(0.0, g.y().node(j)), 2);
    c.y = -0.8;
    const auto r = audit_product_extension([c](CounterRng&) { return c; }, MollifierSchedule::default_schedule(), 5e-3, small(1));
    ASSERT_EQ(r.completed(), 1u);
    EXPECT_LE(r.trials[0].lhs, 5e-3);
    EXPECT_LE(r.trials[0].ratio, 1.0);
}

TEST(ProductExtension, RandomProductsHold) {
    const auto r = audit_product_extension(product_sampler(make_grid(-6, 6, 64, -6, 6, 64)),
                                           MollifierSchedule::default_schedule(), 5e-3, small(40, 10));
    EXPECT_EQ(r.completed(), 40u);
    EXPECT_EQ(r.violations(), 0u);
}
