#include "condlab/audit/audit.hpp"

#include "condlab/error.hpp"
#include "condlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace condlab::audit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ratio_of(double lhs, double rhs) {
    if (rhs > 0.0) return lhs / rhs;
    return lhs == 0.0 ? 0.0 : kInf;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

/// Runs opt.trials trials; `body` returns false to reject the current sample, which is
/// redrawn from the next child stream of the trial.
template <class Body>
AuditReport run_trials(std::string name, const AuditOptions& opt, Body body) {
    require(opt.trials >= 1, "audit: trials must be positive");
    require(opt.max_attempts >= 1, "audit: max_attempts must be positive");
    require(opt.tol >= 0.0, "audit: tol must be nonnegative");
    std::vector<std::optional<TrialRecord>> slots(opt.trials);
    std::vector<std::size_t> rejects(opt.trials, 0);
    parallel_for(opt.trials, opt.threads, [&](std::size_t t) {
        const auto base = CounterRng::stream(opt.seed, t);
        for (std::size_t a = 0; a < opt.max_attempts; ++a) {
            auto rng = base.split(a);
            TrialRecord rec;
            rec.trial = t;
            if (body(rng, rec)) {
                slots[t] = rec;
                return;
            }
            ++rejects[t];
        }
    });
    AuditReport r;
    r.name = std::move(name);
    r.tol = opt.tol;
    r.requested = opt.trials;
    for (std::size_t t = 0; t < opt.trials; ++t) {
        r.rejected += rejects[t];
        if (slots[t]) r.trials.push_back(*slots[t]);
    }
    r.config = {{"seed", std::to_string(opt.seed)}, {"trials", std::to_string(opt.trials)},
                {"max_attempts", std::to_string(opt.max_attempts)}};
    return r;
}

double sup_of(const GridDensity2D& p) { return sup_norm(p.field()); }

/// Conditional columns j in [j0, j1); zeros elsewhere.
GridField2D condition_columns(const GridDensity2D& rho, std::size_t j0, std::size_t j1) {
    const auto m = marginal_y(rho);
    const auto& g = rho.grid();
    GridField2D out(g);
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = j0; j < j1; ++j) out(i, j) = rho(i, j) / m[j];
    return out;
}

GridDensity2D blend_uniform(const GridDensity2D& rho, double lambda) {
    const auto& g = rho.grid();
    const double u = 1.0 / (g.x().length() * g.y().length());
    std::vector<double> v(rho.values().begin(), rho.values().end());
    for (double& x : v) x = (1.0 - lambda) * x + lambda * u;
    return GridDensity2D::normalized(GridField2D(g, std::move(v)));
}

} // namespace

void MixtureSamplerConfig::validate() const {
    require(grid.nx() >= 2 && grid.ny() >= 2, "sampler grid is unset");
    require(K >= 1, "sampler K must be positive");
    ranges.validate();
    require(floor_min >= 0.0 && floor_min <= floor_max && floor_max <= 1.0, "sampler floor range must lie in [0, 1]");
    require(perturb_probability >= 0.0 && perturb_probability <= 1.0, "perturb probability must lie in [0, 1]");
    require(perturb_size > 0.0 && perturb_size <= 1.0, "perturb size must lie in (0, 1]");
}

PairSampler mixture_pair_sampler(MixtureSamplerConfig config) {
    config.validate();
    return [config](CounterRng& rng) {
        auto draw = [&](CounterRng& r) {
            const double lambda = r.uniform(config.floor_min, config.floor_max);
            return blend_uniform(render_joint(sample_params(config.K, config.ranges, r), config.grid), lambda);
        };
        auto pr = rng.split(0);
        GridDensity2D p = draw(pr);
        if (rng.uniform() < config.perturb_probability) {
            auto br = rng.split(1);
            const double eta = config.perturb_size * (1.0 - br.uniform());
            const auto bump = render_joint(sample_params(1, config.ranges, br), config.grid);
            std::vector<double> v(p.values().size());
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = (1.0 - eta) * p.values()[k] + eta * bump.values()[k];
            GridDensity2D q = GridDensity2D::normalized(GridField2D(config.grid, std::move(v)));
            return DensityPair{std::move(p), std::move(q)};
        }
        auto qr = rng.split(2);
        GridDensity2D q = draw(qr);
        return DensityPair{std::move(p), std::move(q)};
    };
}

FieldSampler bump_field_sampler(Grid2D grid, double amplitude) {
    require(amplitude > 0.0, "field amplitude must be positive");
    return [grid, amplitude](CounterRng& rng) {
        GridField2D f(grid);
        if (rng.below(4) == 0) {
            const double c = rng.uniform(-amplitude, amplitude);
            for (double& v : f.values()) v = c;
            return f;
        }
        const auto nb = 1 + rng.below(3);
        for (std::uint64_t b = 0; b < nb; ++b) {
            const double a = rng.uniform(-amplitude, amplitude);
            const double cx = rng.uniform(grid.x().lo() / 2, grid.x().hi() / 2);
            const double cy = rng.uniform(grid.y().lo() / 2, grid.y().hi() / 2);
            const double s = rng.uniform(0.3, 1.5);
            for (std::size_t i = 0; i < grid.nx(); ++i)
                for (std::size_t j = 0; j < grid.ny(); ++j) {
                    const double dx = grid.x().node(i) - cx, dy = grid.y().node(j) - cy;
                    f(i, j) += a * std::exp(-(dx * dx + dy * dy) / (2 * s * s));
                }
        }
        return f;
    };
}

ProductSampler product_sampler(Grid2D grid) {
    return [grid](CounterRng& rng) {
        ProductCase c;
        c.grid = grid;
        const auto& ax = grid.x();
        const auto& ay = grid.y();
        const double xmid = 0.5 * (ax.lo() + ax.hi());
        const double ymid = 0.5 * (ay.lo() + ay.hi());
        const double yspan = ay.length();

        c.f.assign(ax.size(), 0.0);
        const auto nb = 1 + rng.below(2);
        for (std::uint64_t b = 0; b < nb; ++b) {
            const double w = rng.uniform(0.3, 1.0);
            const double mu = xmid + rng.uniform(-1.0, 1.0);
            const double s = rng.uniform(1.2, 1.5);
            for (std::size_t i = 0; i < ax.size(); ++i) c.f[i] += w * normal_pdf(ax.node(i), mu, s * s);
        }

        c.g.assign(ay.size(), 0.0);
        switch (rng.below(3)) {
        case 0:
            std::fill(c.g.begin(), c.g.end(), 1.0);
            c.y = rng.uniform(ay.lo(), ay.hi());
            break;
        case 1: {
            const double dir = rng.below(2) == 0 ? 1.0 : -1.0;
            const double edge = ymid + rng.uniform(-yspan / 6, yspan / 6);
            for (std::size_t j = 0; j < ay.size(); ++j) {
                const double r = std::max(0.0, dir * (ay.node(j) - edge));
                c.g[j] = r * r;
            }
            c.y = edge - dir * rng.uniform(0.3, 1.5);
            break;
        }
        default: {
            const double mu = ymid + rng.uniform(-yspan / 6, yspan / 6);
            const double s = rng.uniform(0.5, 2.0);
            for (std::size_t j = 0; j < ay.size(); ++j) c.g[j] = normal_pdf(ay.node(j), mu, s * s);
            c.y = rng.uniform(ay.lo(), ay.hi());
        }
        }
        return c;
    };
}

GridDensity2D product_density(const ProductCase& c) {
    const auto& grid = c.grid;
    require(c.f.size() == grid.nx() && c.g.size() == grid.ny(), "product factors do not match the grid");
    GridField2D rho(grid);
    for (std::size_t i = 0; i < grid.nx(); ++i)
        for (std::size_t j = 0; j < grid.ny(); ++j) rho(i, j) = c.f[i] * c.g[j];
    return GridDensity2D::normalized(std::move(rho));
}

std::vector<double> normalized_factor(const ProductCase& c) {
    const double mass = integrate1d(c.grid.x(), c.f);
    require(mass > 0.0, "product factor f has zero mass");
    std::vector<double> out(c.f);
    for (double& v : out) v /= mass;
    return out;
}

double holder_seminorm(const GridField2D& f, double alpha, std::size_t pairs, CounterRng* rng) {
    require(alpha > 0.0 && alpha <= 1.0, "holder exponent must lie in (0, 1]");
    const auto& g = f.grid();
    const std::size_t N = g.size();
    const auto v = f.values();
    auto coord = [&](std::size_t n, double& x, double& y) {
        x = g.x().node(n / g.ny());
        y = g.y().node(n % g.ny());
    };
    auto quotient = [&](std::size_t a, std::size_t b) {
        double xa, ya, xb, yb;
        coord(a, xa, ya);
        coord(b, xb, yb);
        const double d = std::hypot(xa - xb, ya - yb);
        const double diff = std::abs(v[a] - v[b]);
        return alpha == 1.0 ? diff / d : diff / std::pow(d, alpha);
    };
    double best = 0.0;
    if (pairs == 0) {
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = a + 1; b < N; ++b) best = std::max(best, quotient(a, b));
        return best;
    }
    require(rng != nullptr, "sampled seminorm needs a generator");
    for (std::size_t k = 0; k < pairs; ++k) {
        const auto a = rng->below(N);
        auto b = rng->below(N - 1);
        if (b >= a) ++b;
        best = std::max(best, quotient(a, b));
    }
    return best;
}

AuditReport audit_kernel_lipschitz(const PairSampler& sampler, double delta_min, const AuditOptions& opt) {
    require(delta_min > 0.0, "audit: delta_min must be positive");
    auto r = run_trials("kernel_lipschitz", opt, [&](CounterRng& rng, TrialRecord& rec) {
        const auto [p, q] = sampler(rng);
        const double delta = std::min(delta_of(p), delta_of(q));
        if (!(delta >= delta_min)) return false;
        const auto kp = kernel_condition(p, delta);
        const auto kq = kernel_condition(q, delta);
        const double D = p.grid().x().length();
        rec.delta = delta;
        rec.lhs = sup_distance(kp.field(), kq.field());
        rec.rhs = (1.0 / delta) * (1.0 + D * std::min(sup_of(p), sup_of(q)) / delta) *
                  sup_distance(p.field(), q.field());
        rec.ratio = ratio_of(rec.lhs, rec.rhs);
        return true;
    });
    r.config.emplace_back("delta_min", num(delta_min));
    return r;
}

AuditReport audit_l1_lipschitz(const PairSampler& sampler, double delta_min, std::size_t j0, std::size_t j1,
                               const AuditOptions& opt) {
    require(delta_min > 0.0, "audit: delta_min must be positive");
    require(j0 + 2 <= j1, "audit: the B range needs at least two y nodes");
    auto r = run_trials("l1_lipschitz", opt, [&](CounterRng& rng, TrialRecord& rec) {
        const auto [p, q] = sampler(rng);
        require(j1 <= p.grid().ny(), "audit: the B range leaves the grid");
        const double delta = std::min(delta_of(p, j0, j1), delta_of(q, j0, j1));
        if (!(delta >= delta_min)) return false;
        const IndexBox box{0, p.grid().nx(), j0, j1};
        rec.delta = delta;
        rec.lhs = l1_distance(condition_columns(p, j0, j1), condition_columns(q, j0, j1), box);
        rec.rhs = (2.0 / delta) * l1_distance(p.field(), q.field());
        rec.ratio = ratio_of(rec.lhs, rec.rhs);
        return true;
    });
    r.config.emplace_back("delta_min", num(delta_min));
    r.config.emplace_back("b_j0", std::to_string(j0));
    r.config.emplace_back("b_j1", std::to_string(j1));
    return r;
}

AuditReport audit_holder_incontext(const PairSampler& sampler, double alpha, double R, double delta_min,
                                   std::size_t holder_pairs, const AuditOptions& opt) {
    require(alpha > 0.0 && alpha <= 1.0, "audit: alpha must lie in (0, 1]");
    require(R > 0.0, "audit: R must be positive");
    require(delta_min > 0.0, "audit: delta_min must be positive");
    auto r = run_trials("holder_incontext", opt, [&](CounterRng& rng, TrialRecord& rec) {
        auto [p, q] = sampler(rng);
        const auto& g = p.grid();
        auto cert = rng.split(7);
        const auto variant = rng.below(4);  // 0: q = p, 1: y' = y, otherwise both differ
        if (variant == 0) q = p;
        if (sup_of(p) > R || sup_of(q) > R) return false;
        if (holder_seminorm(p.field(), alpha, holder_pairs, &cert) > R) return false;
        if (variant != 0 && holder_seminorm(q.field(), alpha, holder_pairs, &cert) > R) return false;
        const double delta = std::min(delta_of(p), delta_of(q));
        if (!(delta >= delta_min)) return false;
        const auto j = static_cast<std::size_t>(rng.below(g.ny()));
        const auto j2 = variant == 1 ? j : static_cast<std::size_t>(rng.below(g.ny()));
        const double y = g.y().node(j), y2 = g.y().node(j2);
        const auto a = incontext_condition(p, y, delta);
        const auto b = incontext_condition(q, y2, delta);
        double lhs = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) lhs = std::max(lhs, std::abs(a[i] - b[i]));
        const double D = g.x().length();
        const double dist = std::max(sup_distance(p.field(), q.field()), std::abs(y - y2));
        rec.delta = delta;
        rec.lhs = lhs;
        rec.rhs = ((1.0 + 2.0 * R) / delta) * (1.0 + D * R / delta) * std::pow(dist, alpha);
        rec.ratio = ratio_of(rec.lhs, rec.rhs);
        return true;
    });
    r.config.emplace_back("alpha", num(alpha));
    r.config.emplace_back("R", num(R));
    r.config.emplace_back("delta_min", num(delta_min));
    r.config.emplace_back("holder_pairs", std::to_string(holder_pairs));
    return r;
}

AuditReport audit_truncation(const FieldSampler& sampler, const std::vector<double>& M_grid,
                             const AuditOptions& opt) {
    require(!M_grid.empty(), "audit: M grid is empty");
    for (std::size_t k = 0; k < M_grid.size(); ++k) {
        require(M_grid[k] > 0.0, "audit: M values must be positive");
        require(k == 0 || M_grid[k] > M_grid[k - 1], "audit: M values must be increasing");
    }
    constexpr double kSaturatedGap = 1e-12;
    auto r = run_trials("truncation", opt, [&](CounterRng& rng, TrialRecord& rec) {
        const auto f = sampler(rng);
        const double s = sup_norm(f);
        double prev_gap = kInf;
        double worst = -1.0;
        auto consider = [&](double lhs, double rhs) {
            const double q = ratio_of(lhs, rhs);
            if (q > worst) {
                worst = q;
                rec.lhs = lhs;
                rec.rhs = rhs;
            }
        };
        for (double M : M_grid) {
            const auto t = truncate_tm(f, M);
            const double gap = l1_distance(f, t);
            consider(sup_norm(t), M);
            if (prev_gap != kInf) consider(gap, prev_gap);
            if (M >= s) consider(gap, kSaturatedGap);
            prev_gap = gap;
        }
        rec.ratio = worst;
        return true;
    });
    std::ostringstream ms;
    for (std::size_t k = 0; k < M_grid.size(); ++k) ms << (k ? " " : "") << num(M_grid[k]);
    r.config.emplace_back("M_grid", ms.str());
    return r;
}

AuditReport audit_product_extension(const ProductSampler& sampler, const MollifierSchedule& schedule,
                                    double threshold, const AuditOptions& opt) {
    require(threshold > 0.0, "audit: threshold must be positive");
    auto r = run_trials("product_extension", opt, [&](CounterRng& rng, TrialRecord& rec) {
        const auto c = sampler(rng);
        const auto rho = product_density(c);
        const auto oracle = normalized_factor(c);
        std::optional<ExtensionResult> res;
        try {
            res = extension_limit(rho, c.y, schedule);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::degenerate_query) return false;
            throw;
        }
        std::vector<double> err;
        for (const auto& it : res->iterates) {
            double e = 0.0;
            for (std::size_t i = 0; i < oracle.size(); ++i) e = std::max(e, std::abs(it[i] - oracle[i]));
            err.push_back(e);
        }
        rec.lhs = err.back();
        rec.rhs = threshold;
        double worst = ratio_of(rec.lhs, rec.rhs);
        for (std::size_t k = err.size() >= 3 ? err.size() - 2 : 1; k < err.size(); ++k) {
            // strict decrease: equal consecutive errors count as a violation
            const double q = err[k] < err[k - 1] ? err[k] / err[k - 1] : kInf;
            worst = std::max(worst, q);
        }
        rec.ratio = worst;
        return true;
    });
    r.config.emplace_back("threshold", num(threshold));
    std::ostringstream es;
    for (std::size_t k = 0; k < schedule.size(); ++k) es << (k ? " " : "") << num(schedule.epsilons()[k]);
    r.config.emplace_back("schedule", es.str());
    return r;
}

} // namespace condlab::audit
