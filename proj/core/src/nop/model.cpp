#include "condlab/nop/model.hpp"

#include "condlab/condition.hpp"
#include "condlab/error.hpp"

#include <algorithm>
#include <string>

namespace condlab::nop {

namespace {

void check_finite(const Mat& m, long layer, const char* stage) {
    if (!m.allFinite())
        fail(ErrorKind::numerical, std::string("non-finite ") + stage + " at layer " + std::to_string(layer), layer);
}

Mat stack(const Mat& top, const Mat& bottom) {
    Mat out(top.rows() + bottom.rows(), top.cols());
    out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

} // namespace

NOModel::NOModel(ModelSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    ParamAllocator alloc;
    const std::size_t nodes = spec_.grid.size();
    const std::size_t fn_channels = spec_.in_channels * (spec_.vec2fun ? 2 : 1);
    if (spec_.vec2fun) vec2fun_ = Vec2FunLayer(*spec_.vec2fun, spec_.in_channels, nodes, alloc);

    std::vector<std::size_t> lsizes{2 + fn_channels};
    lsizes.insert(lsizes.end(), spec_.lifting.hidden.begin(), spec_.lifting.hidden.end());
    lsizes.push_back(spec_.lifting_width);
    lifting_ = PointwiseMlp(lsizes, spec_.lifting.activation, alloc);

    std::size_t width = spec_.lifting_width;
    for (const auto& h : spec_.hidden) {
        hidden_.emplace_back(width, h, spec_.grid, alloc);
        width = h.width;
    }
    std::vector<std::size_t> psizes{2 + width};
    psizes.insert(psizes.end(), spec_.projection.hidden.begin(), spec_.projection.hidden.end());
    psizes.push_back(spec_.out_channels);
    projection_ = PointwiseMlp(psizes, spec_.projection.activation, alloc);

    params_.assign(alloc.total(), 0.0);

    const auto& g = spec_.grid;
    coords_.resize(2, static_cast<Eigen::Index>(nodes));
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const auto n = static_cast<Eigen::Index>(g.index(i, j));
            coords_(0, n) = g.x().node(i);
            coords_(1, n) = g.y().node(j);
        }
}

void NOModel::initialize(std::uint64_t seed) {
    // one stream per layer keeps a layer's init independent of the others' sizes
    std::uint64_t id = 0;
    {
        auto rng = CounterRng::stream(seed, id++);
        lifting_.initialize(params_, rng);
    }
    for (const auto& h : hidden_) {
        auto rng = CounterRng::stream(seed, id++);
        h.initialize(params_, rng);
    }
    {
        auto rng = CounterRng::stream(seed, id++);
        projection_.initialize(params_, rng);
    }
    if (spec_.vec2fun) {
        auto rng = CounterRng::stream(seed, id++);
        vec2fun_.initialize(params_, rng);
    }
}

Mat NOModel::run(const Mat& data, Tape* tape) const {
    const auto N = static_cast<Eigen::Index>(spec_.grid.size());
    if (data.cols() != N) fail(ErrorKind::invalid_argument, "input does not match the model grid");
    Mat lift_in = stack(coords_, data);
    Mat h = lifting_.forward(params_, lift_in, tape ? &tape->lifting : nullptr);
    check_finite(h, 0, "lifting output");
    if (tape) {
        tape->lift_in = std::move(lift_in);
        tape->hidden.resize(hidden_.size());
    }
    for (std::size_t l = 0; l < hidden_.size(); ++l) {
        h = hidden_[l].forward(params_, h, tape ? &tape->hidden[l] : nullptr);
        check_finite(h, static_cast<long>(l + 1), "hidden output");
    }
    Mat proj_in = stack(coords_, h);
    Mat out = projection_.forward(params_, proj_in, tape ? &tape->projection : nullptr);
    check_finite(out, static_cast<long>(hidden_.size() + 1), "projection output");
    if (tape) tape->proj_in = std::move(proj_in);
    return out;
}

Mat NOModel::forward(const Mat& f, Tape* tape) const {
    if (spec_.vec2fun) fail(ErrorKind::invalid_argument, "augmented model needs a query; use forward_augmented");
    if (static_cast<std::size_t>(f.rows()) != spec_.in_channels)
        fail(ErrorKind::invalid_argument, "input channel count mismatch");
    if (tape) tape->augmented = false;
    return run(f, tape);
}

Mat NOModel::forward_augmented(const Mat& f, double z, Tape* tape) const {
    if (!spec_.vec2fun) fail(ErrorKind::invalid_argument, "model has no vector-to-function layer");
    if (static_cast<std::size_t>(f.rows()) != spec_.in_channels)
        fail(ErrorKind::invalid_argument, "input channel count mismatch");
    Mat v = vec2fun_.forward(params_, z, tape ? &tape->vec2fun : nullptr);
    if (tape) tape->augmented = true;
    return run(stack(f, v), tape);
}

Mat NOModel::backward(const Tape& tape, const Mat& d_out, std::span<double> grads) const {
    if (grads.size() != params_.size()) fail(ErrorKind::invalid_argument, "gradient buffer size mismatch");
    const long last = static_cast<long>(hidden_.size() + 1);
    check_finite(d_out, last, "output gradient");
    Mat d = projection_.backward(params_, tape.projection, d_out, grads);
    Mat dh = d.bottomRows(d.rows() - 2);
    check_finite(dh, last, "projection input gradient");
    for (std::size_t l = hidden_.size(); l-- > 0;) {
        dh = hidden_[l].backward(params_, tape.hidden[l], dh, grads);
        check_finite(dh, static_cast<long>(l + 1), "hidden input gradient");
    }
    Mat dl = lifting_.backward(params_, tape.lifting, dh, grads);
    Mat dfn = dl.bottomRows(dl.rows() - 2);
    check_finite(dfn, 0, "lifting input gradient");
    if (!tape.augmented) return dfn;
    const auto C = static_cast<Eigen::Index>(spec_.in_channels);
    vec2fun_.backward(params_, tape.vec2fun, dfn.bottomRows(C), grads);
    return dfn.topRows(C);
}

Mat as_channels(const GridField2D& f) {
    const auto v = f.values();
    Mat m(1, static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), m.data());
    return m;
}

GridField2D as_field(const Grid2D& grid, const Mat& m, std::size_t channel) {
    const auto row = m.row(static_cast<Eigen::Index>(channel));
    return GridField2D(grid, std::vector<double>(row.data(), row.data() + row.size()));
}

GridField2D no_forward(const NOModel& model, const GridDensity2D& rho) {
    if (!(rho.grid() == model.grid())) fail(ErrorKind::invalid_argument, "density grid does not match the model grid");
    return as_field(model.grid(), model.forward(as_channels(rho.field())));
}

GridField2D augno_forward(const NOModel& model, const GridDensity2D& rho, double y) {
    if (!(rho.grid() == model.grid())) fail(ErrorKind::invalid_argument, "density grid does not match the model grid");
    return as_field(model.grid(), model.forward_augmented(as_channels(rho.field()), y));
}

GridField1D augno_incontext(const NOModel& model, const GridDensity2D& rho, double y) {
    const auto out = augno_forward(model, rho, y);
    const auto& ax = model.grid().y();
    if (!(y >= ax.lo() && y <= ax.hi())) fail(ErrorKind::out_of_domain, "query y lies outside the grid");
    const auto nodes = ax.nodes();
    auto j = static_cast<std::size_t>(std::upper_bound(nodes.begin(), nodes.end(), y) - nodes.begin()) - 1;
    j = std::min(j, ax.size() - 1);
    auto col = out.column(j);
    if (j + 1 < ax.size() && nodes[j] != y) {
        const double t = (y - nodes[j]) / (nodes[j + 1] - nodes[j]);
        const auto next = out.column(j + 1);
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = (1.0 - t) * col[i] + t * next[i];
    }
    return GridField1D(model.grid().x(), std::move(col));
}

void FullNOSpec::validate(const Grid2D& grid) const {
    require(inner != nullptr, "FullNO: inner operator missing");
    require(M > 0.0, "FullNO: clamp level M must be positive");
    const Grid2D in_grid = subgrid(grid, omega);
    (void)subgrid(grid, omega_out);
    require(omega.rows() == omega_out.rows() && omega.cols() == omega_out.cols(),
            "FullNO: input and output boxes must have the same shape");
    require(inner->grid() == in_grid, "FullNO: inner operator is not bound to the input box grid");
    require(!inner->has_vec2fun() && inner->spec().in_channels == 1, "FullNO: inner operator must map one channel");
}

GridField2D fullno_forward(const FullNOSpec& spec, const GridField2D& f) {
    spec.validate(f.grid());
    const auto clamped = truncate_tm(restrict_to(f, spec.omega), spec.M);
    const Mat out = spec.inner->forward(as_channels(clamped));
    const auto inner_out = as_field(subgrid(f.grid(), spec.omega_out), out);
    return zero_extend(inner_out, f.grid(), spec.omega_out);
}

} // namespace condlab::nop
