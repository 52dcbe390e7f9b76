#include "condlab/nop/spec.hpp"

#include "condlab/error.hpp"

#include <cmath>

namespace condlab::nop {

const char* to_string(Activation a) {
    switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::gelu: return "gelu";
    case Activation::gelu_tanh: return "gelu_tanh";
    }
    return "?";
}

Activation parse_activation(const std::string& s) {
    if (s == "identity") return Activation::identity;
    if (s == "relu") return Activation::relu;
    if (s == "gelu") return Activation::gelu;
    if (s == "gelu_tanh") return Activation::gelu_tanh;
    fail(ErrorKind::invalid_argument, "unknown activation '" + s + "'");
}

const char* to_string(Basis b) { return b == Basis::fourier ? "fourier" : "learned"; }

Basis parse_basis(const std::string& s) {
    if (s == "fourier") return Basis::fourier;
    if (s == "learned") return Basis::learned;
    fail(ErrorKind::invalid_argument, "unknown basis '" + s + "'");
}

void ModelSpec::validate() const {
    require(grid.nx() >= 2 && grid.ny() >= 2, "model grid needs at least 2 nodes per axis");
    require(in_channels >= 1 && out_channels >= 1, "channel counts must be positive");
    require(lifting_width >= 1, "lifting width must be positive");
    for (auto w : lifting.hidden) require(w >= 1, "lifting hidden widths must be positive");
    for (auto w : projection.hidden) require(w >= 1, "projection hidden widths must be positive");
    for (const auto& h : hidden) require(h.width >= 1, "hidden layer width must be positive");
    if (vec2fun && !vec2fun->psi_identity)
        for (auto w : vec2fun->psi.hidden) require(w >= 1, "vec2fun psi widths must be positive");
}

ModelSpec ModelSpec::spectral(const Grid2D& grid, std::size_t width, std::size_t modes, std::size_t depth,
                              std::size_t projection_width) {
    ModelSpec s;
    s.grid = grid;
    s.lifting_width = width;
    for (std::size_t l = 0; l < depth; ++l)
        s.hidden.push_back({width, modes, Basis::fourier, l + 1 == depth ? Activation::identity : Activation::gelu});
    s.projection = {{projection_width}, Activation::gelu};
    s.validate();
    return s;
}

void TrainConfig::validate() const {
    require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning rate must be positive");
    require(batch_size >= 1, "batch size must be positive");
    require(max_epochs >= 1, "max epochs must be positive");
    require(factor > 0.0 && factor < 1.0, "scheduler factor must lie in (0, 1)");
    require(min_lr >= 0.0 && min_lr <= learning_rate, "min_lr must lie in [0, learning_rate]");
    require(threshold >= 0.0, "scheduler threshold must be nonnegative");
}

} // namespace condlab::nop
