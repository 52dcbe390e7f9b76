#pragma once

#include "condlab/grid.hpp"
#include "condlab/kernel_field.hpp"
#include "condlab/nop/layers.hpp"
#include "condlab/nop/spec.hpp"

#include <span>
#include <vector>

namespace condlab::nop {

/// Neural operator Q o L_L o ... o L_1 o R bound to one grid, with an optional
/// vector-to-function layer for the augmented form. All parameters live in one flat
/// vector; layers address it by offset.
///
/// Lifting and projection nets see (x, y, f(x, y)) at each node, so their inputs carry
/// two coordinate channels ahead of the function channels.
class NOModel {
public:
    /// Everything recorded by a forward pass that backward needs.
    struct Tape {
        Mat lift_in;
        PointwiseMlp::Cache lifting;
        std::vector<HiddenLayer::Cache> hidden;
        Mat proj_in;
        PointwiseMlp::Cache projection;
        bool augmented = false;
        Vec2FunLayer::Cache vec2fun;
    };

    explicit NOModel(ModelSpec spec);

    const ModelSpec& spec() const noexcept { return spec_; }
    const Grid2D& grid() const noexcept { return spec_.grid; }
    std::size_t num_params() const noexcept { return params_.size(); }
    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }

    const PointwiseMlp& lifting() const noexcept { return lifting_; }
    const std::vector<HiddenLayer>& hidden() const noexcept { return hidden_; }
    const PointwiseMlp& projection() const noexcept { return projection_; }
    bool has_vec2fun() const noexcept { return spec_.vec2fun.has_value(); }
    const Vec2FunLayer& vec2fun() const noexcept { return vec2fun_; }

    /// Default initialization from a seed (deterministic).
    void initialize(std::uint64_t seed);

    /// Coordinate channels (x, y), 2 x N.
    const Mat& coordinates() const noexcept { return coords_; }

    /// f: in_channels x N  ->  out_channels x N.
    Mat forward(const Mat& f, Tape* tape = nullptr) const;
    /// Augmented form: the NO applied to f (+) V(z).
    Mat forward_augmented(const Mat& f, double z, Tape* tape = nullptr) const;
    /// Accumulates dLoss/dparams into `grads` (size num_params()). Returns dLoss/df.
    /// Throws numerical (index = layer, 0 lifting .. L+1 projection) on non-finite values.
    Mat backward(const Tape& tape, const Mat& d_out, std::span<double> grads) const;

private:
    Mat run(const Mat& data, Tape* tape) const;

    ModelSpec spec_;
    std::vector<double> params_;
    PointwiseMlp lifting_;
    std::vector<HiddenLayer> hidden_;
    PointwiseMlp projection_;
    Vec2FunLayer vec2fun_;
    Mat coords_;
};

/// Single-channel field helpers.
Mat as_channels(const GridField2D& f);
GridField2D as_field(const Grid2D& grid, const Mat& m, std::size_t channel = 0);

/// no_forward: the operator applied to a joint density, first output channel.
GridField2D no_forward(const NOModel& model, const GridDensity2D& rho);
/// augno_forward: model applied to rho (+) V(y).
GridField2D augno_forward(const NOModel& model, const GridDensity2D& rho, double y);
/// In-context reading of the augmented output: the output slice at y (linear in y between nodes).
GridField1D augno_incontext(const NOModel& model, const GridDensity2D& rho, double y);

/// Restriction to omega, pointwise clamp t_M, inner NO, zero extension from omega_out.
/// The inner model is bound to subgrid(grid, omega); omega_out must have the same shape.
struct FullNOSpec {
    const NOModel* inner = nullptr;
    IndexBox omega;
    IndexBox omega_out;
    double M = 1.0;

    void validate(const Grid2D& grid) const;
};

GridField2D fullno_forward(const FullNOSpec& spec, const GridField2D& f);

} // namespace condlab::nop
