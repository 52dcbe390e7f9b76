#pragma once

#include "condlab/audit/report.hpp"
#include "condlab/condition.hpp"
#include "condlab/grid.hpp"
#include "condlab/mixture.hpp"
#include "condlab/rng.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace condlab::audit {

using DensityPair = std::pair<GridDensity2D, GridDensity2D>;
using PairSampler = std::function<DensityPair(CounterRng&)>;
using FieldSampler = std::function<GridField2D(CounterRng&)>;

/// A separable joint f(x) g(y) and a query; the exact extension of the conditional at
/// any y is f normalized.
struct ProductCase {
    Grid2D grid;
    std::vector<double> f;  // on grid.x()
    std::vector<double> g;  // on grid.y()
    double y = 0.0;
};
using ProductSampler = std::function<ProductCase(CounterRng&)>;

/// Random mixture joints blended with a uniform floor: rho = (1 - lambda) gmm + lambda / |D x E|,
/// lambda uniform in [floor_min, floor_max]. The second member of a pair is either an
/// independent draw or the first blended with a fresh single-component bump at weight
/// eta in (0, perturb_size].
struct MixtureSamplerConfig {
    Grid2D grid;
    std::size_t K = 3;
    ParamRanges ranges;
    double floor_min = 0.05;
    double floor_max = 0.5;
    double perturb_probability = 0.5;
    double perturb_size = 0.05;

    void validate() const;
};
PairSampler mixture_pair_sampler(MixtureSamplerConfig config);

/// Signed sums of one to three Gaussian bumps with amplitudes in [-amplitude, amplitude],
/// plus a constant field in a quarter of the draws.
FieldSampler bump_field_sampler(Grid2D grid, double amplitude = 3.0);

/// f: one or two broad Gaussian bumps in x (std in [1.2, 1.5]); g: uniform, a one-sided
/// square ramp with a zero region, or a Gaussian. Queries sit in the zero region of g
/// whenever it has one.
ProductSampler product_sampler(Grid2D grid);
GridDensity2D product_density(const ProductCase& c);
/// f divided by its trapezoid mass.
std::vector<double> normalized_factor(const ProductCase& c);

struct AuditOptions {
    std::size_t trials = 1000;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::size_t max_attempts = 50;  // samples tried per trial before the trial is abandoned
};

/// sup|G(p) - G(q)| <= (1/delta)(1 + |D| min(|p|, |q|) / delta) sup|p - q|, delta the
/// smaller measured marginal minimum of the pair. Pairs below delta_min are rejected.
AuditReport audit_kernel_lipschitz(const PairSampler& sampler, double delta_min, const AuditOptions& opt);

/// ||G(p) - G(q)||_{L1(D x B)} <= (2/delta) ||p - q||_{L1(D x E)} with B the y-index range
/// [j0, j1) and delta the measured marginal minimum over B.
AuditReport audit_l1_lipschitz(const PairSampler& sampler, double delta_min, std::size_t j0, std::size_t j1,
                               const AuditOptions& opt);

/// Hölder stability of in-context conditioning at node queries:
/// sup|Psi(p, y) - Psi(q, y')| <= ((1 + 2R)/delta)(1 + |D| R / delta) max(sup|p - q|, |y - y'|)^alpha.
/// Each density is certified to have max(sup, alpha-seminorm) <= R; the seminorm runs over
/// all node pairs when holder_pairs == 0, else over that many random pairs.
AuditReport audit_holder_incontext(const PairSampler& sampler, double alpha, double R, double delta_min,
                                   std::size_t holder_pairs, const AuditOptions& opt);

/// For each M in the increasing grid: sup|T_M f| <= M, the L1 gap ||f - T_M f|| is
/// nonincreasing in M, and the gap is below 1e-12 once M >= sup|f|. The trial ratio is the
/// largest of sup|T_M f| / M, gap_k / gap_{k-1}, and gap / 1e-12 on the saturated tail.
AuditReport audit_truncation(const FieldSampler& sampler, const std::vector<double>& M_grid,
                             const AuditOptions& opt);

/// Extension limit on product densities: lhs is the final sup-error against normalized f,
/// rhs the threshold. The ratio also carries e_k / e_{k-1} over the last three schedule
/// steps, so a trial passes only when the error is below threshold and decreasing there.
/// Degenerate queries are counted as rejections.
AuditReport audit_product_extension(const ProductSampler& sampler, const MollifierSchedule& schedule,
                                    double threshold, const AuditOptions& opt);

/// Empirical alpha-Hölder seminorm over node pairs (Euclidean node distance).
double holder_seminorm(const GridField2D& f, double alpha, std::size_t pairs = 0, CounterRng* rng = nullptr);

} // namespace condlab::audit
