#pragma once

#include "condlab/grid.hpp"
#include "condlab/nop/spec.hpp"
#include "condlab/rng.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace condlab::nop {

/// Channel-major activations: row = channel, column = node (i * ny + j).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstParams = std::span<const double>;
using Grads = std::span<double>;

/// Hands out offsets into the model's flat parameter vector.
class ParamAllocator {
public:
    std::size_t take(std::size_t n) {
        const std::size_t off = total_;
        total_ += n;
        return off;
    }
    std::size_t total() const noexcept { return total_; }

private:
    std::size_t total_ = 0;
};

Mat activate(Activation a, const Mat& u);
/// dY * sigma'(u), with sigma'(0) = 0 for relu.
Mat activate_backward(Activation a, const Mat& u, const Mat& dy);

/// Stack of dense layers applied independently at every node.
class PointwiseMlp {
public:
    struct Dense {
        std::size_t in, out, w, b;  // w: out x in row-major, b: out
    };
    struct Cache {
        std::vector<Mat> inputs;  // input of each dense layer
        std::vector<Mat> pre;     // pre-activation of each dense layer
    };

    PointwiseMlp() = default;
    /// sizes = {in, hidden..., out}; `activation` follows every layer but the last.
    PointwiseMlp(const std::vector<std::size_t>& sizes, Activation activation, ParamAllocator& alloc);

    std::size_t in() const noexcept { return layers_.front().in; }
    std::size_t out() const noexcept { return layers_.back().out; }
    const std::vector<Dense>& layers() const noexcept { return layers_; }
    Activation activation() const noexcept { return act_; }

    Mat forward(ConstParams p, const Mat& x, Cache* cache = nullptr) const;
    /// Accumulates parameter gradients, returns dL/dx.
    Mat backward(ConstParams p, const Cache& cache, const Mat& dy, Grads g) const;
    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
    void initialize(std::span<double> p, CounterRng& rng) const;

private:
    std::vector<Dense> layers_;
    Activation act_ = Activation::identity;
};

/// Separable DFT tables for the retained modes of one grid.
struct FourierTables {
    std::size_t nx = 0, ny = 0, nkx = 0, nky = 0;
    std::vector<long> kx;  // signed retained x-frequencies
    Mat cx, sx;            // nkx x nx: cos / sin(2 pi kx i / nx)
    Mat cy, sy;            // ny x nky: cos / sin(2 pi ky j / ny)
    Eigen::RowVectorXd cweight;  // nky: 1 for ky = 0 (and Nyquist), 2 otherwise

    FourierTables() = default;
    FourierTables(std::size_t nx, std::size_t ny, std::size_t modes);
    std::size_t modes() const noexcept { return nkx * nky; }
};

/// sigma(W f + b + nonlocal(f)). The nonlocal term is sum_m <T_m f, psi_m> phi_m:
///  - fourier basis: psi/phi are the retained separable Fourier modes, T a complex
///    per-mode channel mixer; the pairing is the discrete (periodic) inner product, so
///    the term is a truncated spectral multiplier.
///  - learned basis: T_m (in x in), psi_m (in x N), phi_m (out x N) are parameters and
///    the pairing is trapezoid quadrature on the grid.
class HiddenLayer {
public:
    struct Cache {
        Mat input;
        Mat pre;
        Mat fr, fi;                  // fourier: input coefficients, in x modes
        std::vector<double> coeffs;  // learned: pairings <T_m f, psi_m>
        std::vector<Mat> tf;         // learned: T_m f
    };

    HiddenLayer() = default;
    HiddenLayer(std::size_t in, const HiddenSpec& spec, const Grid2D& grid, ParamAllocator& alloc);

    std::size_t in() const noexcept { return in_; }
    std::size_t out() const noexcept { return spec_.width; }
    const HiddenSpec& spec() const noexcept { return spec_; }

    // parameter offsets
    std::size_t w_offset() const noexcept { return w_; }
    std::size_t b_offset() const noexcept { return b_; }
    /// fourier: real and imaginary multiplier blocks, index [c][o][k]
    std::size_t spectral_re_offset() const noexcept { return kr_; }
    std::size_t spectral_im_offset() const noexcept { return ki_; }
    /// learned: T (rank x in x in), psi (rank x in x N), phi (rank x out x N)
    std::size_t t_offset() const noexcept { return t_; }
    std::size_t psi_offset() const noexcept { return psi_; }
    std::size_t phi_offset() const noexcept { return phi_; }
    const FourierTables& tables() const noexcept { return tables_; }

    Mat forward(ConstParams p, const Mat& x, Cache* cache = nullptr) const;
    Mat backward(ConstParams p, const Cache& cache, const Mat& dy, Grads g) const;
    void initialize(std::span<double> p, CounterRng& rng) const;

    /// The nonlocal term alone (no W, b, sigma); exposed for tests.
    Mat nonlocal(ConstParams p, const Mat& x, Cache* cache = nullptr) const;

private:
    Mat nonlocal_backward(ConstParams p, const Cache& cache, const Mat& du, Grads g) const;

    std::size_t in_ = 0;
    HiddenSpec spec_;
    std::size_t nx_ = 0, ny_ = 0;
    std::vector<double> quad_;  // trapezoid node weights, learned basis
    FourierTables tables_;
    std::size_t w_ = 0, b_ = 0, kr_ = 0, ki_ = 0, t_ = 0, psi_ = 0, phi_ = 0;
};

/// V(z)(x) = h(x) psi(z).
class Vec2FunLayer {
public:
    struct Cache {
        double z = 0.0;
        double psi = 0.0;
        PointwiseMlp::Cache mlp;
    };

    Vec2FunLayer() = default;
    Vec2FunLayer(const Vec2FunSpec& spec, std::size_t channels, std::size_t nodes, ParamAllocator& alloc);

    const Vec2FunSpec& spec() const noexcept { return spec_; }
    std::size_t h_offset() const noexcept { return h_; }
    const PointwiseMlp& psi_net() const noexcept { return psi_; }

    double psi(ConstParams p, double z, Cache* cache = nullptr) const;
    Mat forward(ConstParams p, double z, Cache* cache = nullptr) const;
    void backward(ConstParams p, const Cache& cache, const Mat& dv, Grads g) const;
    void initialize(std::span<double> p, CounterRng& rng) const;

private:
    Vec2FunSpec spec_;
    std::size_t channels_ = 0, nodes_ = 0;
    std::size_t h_ = 0;
    PointwiseMlp psi_;
};

} // namespace condlab::nop
