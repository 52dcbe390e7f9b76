#include "condlab/kernel_field.hpp"

#include "condlab/error.hpp"

#include <cmath>
#include <string>

namespace condlab {

KernelField::KernelField(GridField2D field) : field_(std::move(field)) {
    for (double v : field_.values())
        if (v < 0.0) fail(ErrorKind::invalid_argument, "kernel holds a negative value");
    const auto m = marginal_y(field_);
    for (std::size_t j = 0; j < m.size(); ++j)
        if (std::abs(m[j] - 1.0) > slice_tolerance)
            fail(ErrorKind::invalid_argument,
                 "kernel slice " + std::to_string(j) + " has mass " + std::to_string(m[j]),
                 static_cast<long>(j));
}

KernelField normalize_slices(GridField2D f, std::vector<std::size_t>* zero_slices) {
    const auto& g = f.grid();
    const auto m = marginal_y(f);
    const double uniform = 1.0 / g.x().length();
    for (std::size_t j = 0; j < g.ny(); ++j) {
        if (m[j] > 0.0) {
            for (std::size_t i = 0; i < g.nx(); ++i) f(i, j) /= m[j];
        } else {
            for (std::size_t i = 0; i < g.nx(); ++i) f(i, j) = uniform;
            if (zero_slices) zero_slices->push_back(j);
        }
    }
    return KernelField(std::move(f));
}

} // namespace condlab
