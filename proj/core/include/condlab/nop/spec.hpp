#pragma once

#include "condlab/grid.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace condlab::nop {

enum class Activation : std::uint8_t { identity = 0, relu = 1, gelu = 2, gelu_tanh = 3 };
enum class Basis : std::uint8_t { fourier = 0, learned = 1 };

const char* to_string(Activation a);
Activation parse_activation(const std::string& s);
const char* to_string(Basis b);
Basis parse_basis(const std::string& s);

/// Pointwise network acting on (x, y, f(x, y)): hidden widths between the fixed in/out sizes.
struct MlpSpec {
    std::vector<std::size_t> hidden;
    Activation activation = Activation::gelu;

    bool operator==(const MlpSpec&) const = default;
};

/// Hidden layer d_{l-1} -> width. `rank` is the number of retained Fourier modes per
/// axis (fourier basis) or the number of learned encoder/decoder pairs (learned basis).
struct HiddenSpec {
    std::size_t width = 16;
    std::size_t rank = 8;
    Basis basis = Basis::fourier;
    Activation activation = Activation::gelu;

    bool operator==(const HiddenSpec&) const = default;
};

/// V(z)(x) = h(x) psi(z) for a scalar query z.
struct Vec2FunSpec {
    bool learn_h = false;        // h == 1 when false
    bool psi_identity = true;    // psi(z) = z when true, else a pointwise net 1 -> ... -> 1
    MlpSpec psi;

    bool operator==(const Vec2FunSpec&) const = default;
};

struct ModelSpec {
    Grid2D grid;
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t lifting_width = 16;
    MlpSpec lifting{{}, Activation::gelu};
    std::vector<HiddenSpec> hidden;
    MlpSpec projection{{32}, Activation::gelu};
    std::optional<Vec2FunSpec> vec2fun;

    void validate() const;
    bool operator==(const ModelSpec& o) const {
        return grid == o.grid && in_channels == o.in_channels && out_channels == o.out_channels &&
               lifting_width == o.lifting_width && lifting == o.lifting && hidden == o.hidden &&
               projection == o.projection && vec2fun == o.vec2fun;
    }

    /// Spectral model: `depth` fourier layers of `width` with `modes` per axis; the last
    /// hidden layer has no nonlinearity.
    static ModelSpec spectral(const Grid2D& grid, std::size_t width, std::size_t modes, std::size_t depth,
                              std::size_t projection_width);
};

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 50;
    std::size_t patience = 5;
    double factor = 0.5;
    double min_lr = 0.0;
    double threshold = 1e-4;          // relative improvement that counts for the scheduler
    std::size_t early_stop_patience = 0;  // 0 disables early stopping
    std::uint64_t seed = 0;
    std::size_t threads = 0;          // 0 = serial reference mode
    bool verbose = false;

    void validate() const;
};

} // namespace condlab::nop
