#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace condlab::nop {

/// Bias-corrected Adam.
class Adam {
public:
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grads, double lr);
    std::uint64_t steps() const noexcept { return t_; }

private:
    std::vector<double> m_, v_;
    std::uint64_t t_ = 0;
};

/// Reduce-on-plateau in "min" mode with a relative threshold: an epoch improves when
/// loss < best * (1 - threshold). After more than `patience` consecutive epochs
/// without improvement the rate is multiplied by `factor` (floored at min_lr) and
/// the counter restarts.
class PlateauScheduler {
public:
    PlateauScheduler(double lr, std::size_t patience, double factor, double threshold, double min_lr)
        : lr_(lr), patience_(patience), factor_(factor), threshold_(threshold), min_lr_(min_lr) {}

    /// Feeds one validation loss; returns the rate for the next epoch.
    double step(double loss);

    double lr() const noexcept { return lr_; }
    double best() const noexcept { return best_; }
    std::size_t bad_epochs() const noexcept { return bad_; }
    std::size_t reductions() const noexcept { return reductions_; }

private:
    double lr_;
    std::size_t patience_;
    double factor_;
    double threshold_;
    double min_lr_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t bad_ = 0;
    std::size_t reductions_ = 0;
};

} // namespace condlab::nop
