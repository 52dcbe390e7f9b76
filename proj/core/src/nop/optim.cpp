#include "condlab/nop/optim.hpp"

#include "condlab/error.hpp"

#include <algorithm>
#include <cmath>

namespace condlab::nop {

void Adam::step(std::span<double> params, std::span<const double> grads, double lr) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        fail(ErrorKind::invalid_argument, "adam: parameter/gradient size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        m_[k] = beta1 * m_[k] + (1.0 - beta1) * grads[k];
        v_[k] = beta2 * v_[k] + (1.0 - beta2) * grads[k] * grads[k];
        const double mhat = m_[k] / c1;
        const double vhat = v_[k] / c2;
        params[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

double PlateauScheduler::step(double loss) {
    if (loss < best_ * (1.0 - threshold_)) {
        best_ = loss;
        bad_ = 0;
    } else {
        ++bad_;
    }
    if (bad_ > patience_) {
        const double next = std::max(lr_ * factor_, min_lr_);
        if (lr_ - next > 1e-12 * lr_) {
            lr_ = next;
            ++reductions_;
        }
        bad_ = 0;
    }
    return lr_;
}

} // namespace condlab::nop
