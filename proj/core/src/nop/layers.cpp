#include "condlab/nop/layers.hpp"

#include "condlab/error.hpp"

#include <cmath>
#include <numbers>

namespace condlab::nop {

using CMap = Eigen::Map<const Mat>;
using MMap = Eigen::Map<Mat>;
using CRow = Eigen::Map<const Eigen::RowVectorXd>;
using MRow = Eigen::Map<Eigen::RowVectorXd>;
using CVec = Eigen::Map<const Eigen::VectorXd>;
using MVec = Eigen::Map<Eigen::VectorXd>;

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kTanhC = 0.79788456080286535588;  // sqrt(2/pi)

double act(Activation a, double u) {
    switch (a) {
    case Activation::identity: return u;
    case Activation::relu: return u > 0.0 ? u : 0.0;
    case Activation::gelu: return 0.5 * u * (1.0 + std::erf(u * kInvSqrt2));
    case Activation::gelu_tanh: {
        const double t = std::tanh(kTanhC * (u + 0.044715 * u * u * u));
        return 0.5 * u * (1.0 + t);
    }
    }
    return u;
}

double act_deriv(Activation a, double u) {
    switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return u > 0.0 ? 1.0 : 0.0;
    case Activation::gelu: return 0.5 * (1.0 + std::erf(u * kInvSqrt2)) + u * kInvSqrt2Pi * std::exp(-0.5 * u * u);
    case Activation::gelu_tanh: {
        const double inner = kTanhC * (u + 0.044715 * u * u * u);
        const double t = std::tanh(inner);
        const double dinner = kTanhC * (1.0 + 3.0 * 0.044715 * u * u);
        return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * dinner;
    }
    }
    return 1.0;
}

void fill_uniform(std::span<double> p, std::size_t off, std::size_t n, double lo, double hi, CounterRng& rng) {
    for (std::size_t k = 0; k < n; ++k) p[off + k] = rng.uniform(lo, hi);
}

} // namespace

Mat activate(Activation a, const Mat& u) {
    if (a == Activation::identity) return u;
    return u.unaryExpr([a](double v) { return act(a, v); });
}

Mat activate_backward(Activation a, const Mat& u, const Mat& dy) {
    if (a == Activation::identity) return dy;
    return dy.cwiseProduct(u.unaryExpr([a](double v) { return act_deriv(a, v); }));
}

// ---------------------------------------------------------------------------
// PointwiseMlp

PointwiseMlp::PointwiseMlp(const std::vector<std::size_t>& sizes, Activation activation, ParamAllocator& alloc)
    : act_(activation) {
    require(sizes.size() >= 2, "pointwise net needs input and output sizes");
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        require(sizes[l] >= 1 && sizes[l + 1] >= 1, "pointwise net widths must be positive");
        Dense d{sizes[l], sizes[l + 1], 0, 0};
        d.w = alloc.take(d.in * d.out);
        d.b = alloc.take(d.out);
        layers_.push_back(d);
    }
}

Mat PointwiseMlp::forward(ConstParams p, const Mat& x, Cache* cache) const {
    if (static_cast<std::size_t>(x.rows()) != in())
        fail(ErrorKind::invalid_argument, "pointwise net: input channel count mismatch");
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
    }
    Mat h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& d = layers_[l];
        CMap w(p.data() + d.w, static_cast<Eigen::Index>(d.out), static_cast<Eigen::Index>(d.in));
        CVec b(p.data() + d.b, static_cast<Eigen::Index>(d.out));
        Mat u = w * h;
        u.colwise() += b;
        if (cache) cache->inputs.push_back(std::move(h));
        const bool last = l + 1 == layers_.size();
        h = last ? u : activate(act_, u);
        if (cache) cache->pre.push_back(std::move(u));
    }
    return h;
}

Mat PointwiseMlp::backward(ConstParams p, const Cache& cache, const Mat& dy, Grads g) const {
    Mat d = dy;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& L = layers_[l];
        const bool last = l + 1 == layers_.size();
        Mat du = last ? d : activate_backward(act_, cache.pre[l], d);
        MMap gw(g.data() + L.w, static_cast<Eigen::Index>(L.out), static_cast<Eigen::Index>(L.in));
        MVec gb(g.data() + L.b, static_cast<Eigen::Index>(L.out));
        gw.noalias() += du * cache.inputs[l].transpose();
        gb += du.rowwise().sum();
        CMap w(p.data() + L.w, static_cast<Eigen::Index>(L.out), static_cast<Eigen::Index>(L.in));
        d = w.transpose() * du;
    }
    return d;
}

void PointwiseMlp::initialize(std::span<double> p, CounterRng& rng) const {
    for (const auto& d : layers_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(d.in));
        fill_uniform(p, d.w, d.in * d.out, -bound, bound, rng);
        fill_uniform(p, d.b, d.out, -bound, bound, rng);
    }
}

// ---------------------------------------------------------------------------
// FourierTables

FourierTables::FourierTables(std::size_t nx_, std::size_t ny_, std::size_t modes) : nx(nx_), ny(ny_) {
    require(modes >= 1, "fourier layer needs at least one mode");
    if (2 * modes >= nx) {
        for (std::size_t k = 0; k < nx; ++k)
            kx.push_back(k < (nx + 1) / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(nx));
    } else {
        for (std::size_t k = 0; k < modes; ++k) kx.push_back(static_cast<long>(k));
        for (std::size_t k = modes; k > 0; --k) kx.push_back(-static_cast<long>(k));
    }
    nkx = kx.size();
    nky = std::min(modes, ny / 2 + 1);
    const double two_pi = 2.0 * std::numbers::pi;
    cx.resize(static_cast<Eigen::Index>(nkx), static_cast<Eigen::Index>(nx));
    sx.resize(static_cast<Eigen::Index>(nkx), static_cast<Eigen::Index>(nx));
    for (std::size_t a = 0; a < nkx; ++a)
        for (std::size_t i = 0; i < nx; ++i) {
            // reduce k*i mod nx before scaling so the angle stays exact-ish for large grids
            const long r = (kx[a] * static_cast<long>(i)) % static_cast<long>(nx);
            const double th = two_pi * static_cast<double>(r) / static_cast<double>(nx);
            cx(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) = std::cos(th);
            sx(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) = std::sin(th);
        }
    cy.resize(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nky));
    sy.resize(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nky));
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t k = 0; k < nky; ++k) {
            const std::size_t r = (k * j) % ny;
            const double th = two_pi * static_cast<double>(r) / static_cast<double>(ny);
            cy(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = std::cos(th);
            sy(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = std::sin(th);
        }
    cweight.resize(static_cast<Eigen::Index>(nky));
    for (std::size_t k = 0; k < nky; ++k)
        cweight(static_cast<Eigen::Index>(k)) = (k == 0 || (ny % 2 == 0 && 2 * k == ny)) ? 1.0 : 2.0;
}

// ---------------------------------------------------------------------------
// HiddenLayer

HiddenLayer::HiddenLayer(std::size_t in, const HiddenSpec& spec, const Grid2D& grid, ParamAllocator& alloc)
    : in_(in), spec_(spec), nx_(grid.nx()), ny_(grid.ny()) {
    require(in >= 1 && spec.width >= 1, "hidden layer widths must be positive");
    const std::size_t out = spec.width;
    w_ = alloc.take(out * in);
    b_ = alloc.take(out);
    if (spec.rank == 0) return;
    if (spec.basis == Basis::fourier) {
        tables_ = FourierTables(nx_, ny_, spec.rank);
        kr_ = alloc.take(in * out * tables_.modes());
        ki_ = alloc.take(in * out * tables_.modes());
    } else {
        const std::size_t n = nx_ * ny_;
        t_ = alloc.take(spec.rank * in * in);
        psi_ = alloc.take(spec.rank * in * n);
        phi_ = alloc.take(spec.rank * out * n);
        quad_.resize(n);
        for (std::size_t i = 0; i < nx_; ++i)
            for (std::size_t j = 0; j < ny_; ++j) quad_[i * ny_ + j] = grid.x().weights()[i] * grid.y().weights()[j];
    }
}

Mat HiddenLayer::nonlocal(ConstParams p, const Mat& x, Cache* cache) const {
    const auto C = static_cast<Eigen::Index>(in_);
    const auto O = static_cast<Eigen::Index>(spec_.width);
    const auto N = static_cast<Eigen::Index>(nx_ * ny_);
    Mat y = Mat::Zero(O, N);
    if (spec_.rank == 0) return y;

    if (spec_.basis == Basis::learned) {
        const Eigen::Map<const Eigen::RowVectorXd> w(quad_.data(), N);
        if (cache) {
            cache->coeffs.assign(spec_.rank, 0.0);
            cache->tf.clear();
        }
        for (std::size_t m = 0; m < spec_.rank; ++m) {
            CMap T(p.data() + t_ + m * in_ * in_, C, C);
            CMap psi(p.data() + psi_ + m * in_ * static_cast<std::size_t>(N), C, N);
            CMap phi(p.data() + phi_ + m * spec_.width * static_cast<std::size_t>(N), O, N);
            Mat tf = T * x;
            const double s = (tf.cwiseProduct(psi).array().rowwise() * w.array()).sum();
            y += s * phi;
            if (cache) {
                cache->coeffs[m] = s;
                cache->tf.push_back(std::move(tf));
            }
        }
        return y;
    }

    const auto& T = tables_;
    const auto nx = static_cast<Eigen::Index>(nx_), ny = static_cast<Eigen::Index>(ny_);
    const auto nkx = static_cast<Eigen::Index>(T.nkx), nky = static_cast<Eigen::Index>(T.nky);
    const auto nk = nkx * nky;

    // forward transform along y, then x
    CMap x2(x.data(), C * nx, ny);
    const Mat ar = x2 * T.cy;
    const Mat ai = -(x2 * T.sy);
    Mat fr(C, nk), fi(C, nk);
    for (Eigen::Index c = 0; c < C; ++c) {
        const auto arc = ar.middleRows(c * nx, nx);
        const auto aic = ai.middleRows(c * nx, nx);
        MMap(fr.row(c).data(), nkx, nky).noalias() = T.cx * arc + T.sx * aic;
        MMap(fi.row(c).data(), nkx, nky).noalias() = T.cx * aic - T.sx * arc;
    }
    // per-mode channel mixing
    Mat gr = Mat::Zero(O, nk), gi = Mat::Zero(O, nk);
    for (Eigen::Index c = 0; c < C; ++c)
        for (Eigen::Index o = 0; o < O; ++o) {
            const std::size_t off = static_cast<std::size_t>((c * O + o) * nk);
            CRow wr(p.data() + kr_ + off, nk), wi(p.data() + ki_ + off, nk);
            gr.row(o).array() += wr.array() * fr.row(c).array() - wi.array() * fi.row(c).array();
            gi.row(o).array() += wr.array() * fi.row(c).array() + wi.array() * fr.row(c).array();
        }
    // inverse transform along x, then real part along y
    Mat br(O * nx, nky), bi(O * nx, nky);
    for (Eigen::Index o = 0; o < O; ++o) {
        CMap gro(gr.row(o).data(), nkx, nky), gio(gi.row(o).data(), nkx, nky);
        br.middleRows(o * nx, nx).noalias() = T.cx.transpose() * gro - T.sx.transpose() * gio;
        bi.middleRows(o * nx, nx).noalias() = T.cx.transpose() * gio + T.sx.transpose() * gro;
    }
    br.array().rowwise() *= T.cweight.array();
    bi.array().rowwise() *= T.cweight.array();
    MMap y2(y.data(), O * nx, ny);
    y2.noalias() = br * T.cy.transpose() - bi * T.sy.transpose();
    y /= static_cast<double>(N);
    if (cache) {
        cache->fr = std::move(fr);
        cache->fi = std::move(fi);
    }
    return y;
}

Mat HiddenLayer::nonlocal_backward(ConstParams p, const Cache& cache, const Mat& du, Grads g) const {
    const auto C = static_cast<Eigen::Index>(in_);
    const auto O = static_cast<Eigen::Index>(spec_.width);
    const auto N = static_cast<Eigen::Index>(nx_ * ny_);
    Mat dx = Mat::Zero(C, N);
    if (spec_.rank == 0) return dx;
    const Mat& x = cache.input;

    if (spec_.basis == Basis::learned) {
        const Eigen::Map<const Eigen::RowVectorXd> w(quad_.data(), N);
        for (std::size_t m = 0; m < spec_.rank; ++m) {
            const std::size_t toff = t_ + m * in_ * in_;
            const std::size_t psioff = psi_ + m * in_ * static_cast<std::size_t>(N);
            const std::size_t phioff = phi_ + m * spec_.width * static_cast<std::size_t>(N);
            CMap T(p.data() + toff, C, C);
            CMap psi(p.data() + psioff, C, N);
            CMap phi(p.data() + phioff, O, N);
            const Mat& tf = cache.tf[m];
            const double s = cache.coeffs[m];
            const double gs = du.cwiseProduct(phi).sum();
            MMap(g.data() + phioff, O, N) += s * du;
            MMap(g.data() + psioff, C, N).array() += gs * (tf.array().rowwise() * w.array());
            Mat gtf = gs * (psi.array().rowwise() * w.array()).matrix();
            MMap(g.data() + toff, C, C).noalias() += gtf * x.transpose();
            dx.noalias() += T.transpose() * gtf;
        }
        return dx;
    }

    const auto& T = tables_;
    const auto nx = static_cast<Eigen::Index>(nx_), ny = static_cast<Eigen::Index>(ny_);
    const auto nkx = static_cast<Eigen::Index>(T.nkx), nky = static_cast<Eigen::Index>(T.nky);
    const auto nk = nkx * nky;
    const double invN = 1.0 / static_cast<double>(N);

    CMap du2(du.data(), O * nx, ny);
    Mat gbr = du2 * T.cy;
    Mat gbi = -(du2 * T.sy);
    gbr.array().rowwise() *= T.cweight.array() * invN;
    gbi.array().rowwise() *= T.cweight.array() * invN;
    Mat ggr(O, nk), ggi(O, nk);
    for (Eigen::Index o = 0; o < O; ++o) {
        const auto r = gbr.middleRows(o * nx, nx);
        const auto i = gbi.middleRows(o * nx, nx);
        MMap(ggr.row(o).data(), nkx, nky).noalias() = T.cx * r + T.sx * i;
        MMap(ggi.row(o).data(), nkx, nky).noalias() = T.cx * i - T.sx * r;
    }
    Mat gfr = Mat::Zero(C, nk), gfi = Mat::Zero(C, nk);
    for (Eigen::Index c = 0; c < C; ++c)
        for (Eigen::Index o = 0; o < O; ++o) {
            const std::size_t off = static_cast<std::size_t>((c * O + o) * nk);
            CRow wr(p.data() + kr_ + off, nk), wi(p.data() + ki_ + off, nk);
            MRow gwr(g.data() + kr_ + off, nk), gwi(g.data() + ki_ + off, nk);
            gwr.array() += ggr.row(o).array() * cache.fr.row(c).array() + ggi.row(o).array() * cache.fi.row(c).array();
            gwi.array() += ggi.row(o).array() * cache.fr.row(c).array() - ggr.row(o).array() * cache.fi.row(c).array();
            gfr.row(c).array() += ggr.row(o).array() * wr.array() + ggi.row(o).array() * wi.array();
            gfi.row(c).array() += ggi.row(o).array() * wr.array() - ggr.row(o).array() * wi.array();
        }
    Mat gar(C * nx, nky), gai(C * nx, nky);
    for (Eigen::Index c = 0; c < C; ++c) {
        CMap r(gfr.row(c).data(), nkx, nky), i(gfi.row(c).data(), nkx, nky);
        gar.middleRows(c * nx, nx).noalias() = T.cx.transpose() * r - T.sx.transpose() * i;
        gai.middleRows(c * nx, nx).noalias() = T.cx.transpose() * i + T.sx.transpose() * r;
    }
    MMap dx2(dx.data(), C * nx, ny);
    dx2.noalias() = gar * T.cy.transpose() - gai * T.sy.transpose();
    return dx;
}

Mat HiddenLayer::forward(ConstParams p, const Mat& x, Cache* cache) const {
    if (static_cast<std::size_t>(x.rows()) != in_ || static_cast<std::size_t>(x.cols()) != nx_ * ny_)
        fail(ErrorKind::invalid_argument, "hidden layer: input shape mismatch");
    const auto C = static_cast<Eigen::Index>(in_);
    const auto O = static_cast<Eigen::Index>(spec_.width);
    CMap w(p.data() + w_, O, C);
    CVec b(p.data() + b_, O);
    Mat u = nonlocal(p, x, cache);
    u.noalias() += w * x;
    u.colwise() += b;
    Mat y = activate(spec_.activation, u);
    if (cache) {
        cache->input = x;
        cache->pre = std::move(u);
    }
    return y;
}

Mat HiddenLayer::backward(ConstParams p, const Cache& cache, const Mat& dy, Grads g) const {
    const auto C = static_cast<Eigen::Index>(in_);
    const auto O = static_cast<Eigen::Index>(spec_.width);
    const Mat du = activate_backward(spec_.activation, cache.pre, dy);
    MMap(g.data() + w_, O, C).noalias() += du * cache.input.transpose();
    MVec(g.data() + b_, O) += du.rowwise().sum();
    Mat dx = nonlocal_backward(p, cache, du, g);
    dx.noalias() += CMap(p.data() + w_, O, C).transpose() * du;
    return dx;
}

void HiddenLayer::initialize(std::span<double> p, CounterRng& rng) const {
    const std::size_t out = spec_.width;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
    fill_uniform(p, w_, out * in_, -bound, bound, rng);
    fill_uniform(p, b_, out, -bound, bound, rng);
    if (spec_.rank == 0) return;
    if (spec_.basis == Basis::fourier) {
        const double scale = 1.0 / static_cast<double>(in_ * out);
        const std::size_t n = in_ * out * tables_.modes();
        fill_uniform(p, kr_, n, 0.0, scale, rng);
        fill_uniform(p, ki_, n, 0.0, scale, rng);
    } else {
        const std::size_t n = nx_ * ny_;
        double area = 0.0;
        for (double w : quad_) area += w;
        fill_uniform(p, t_, spec_.rank * in_ * in_, -bound, bound, rng);
        fill_uniform(p, psi_, spec_.rank * in_ * n, -1.0 / area, 1.0 / area, rng);
        const double pb = 1.0 / std::sqrt(static_cast<double>(spec_.rank));
        fill_uniform(p, phi_, spec_.rank * out * n, -pb, pb, rng);
    }
}

// ---------------------------------------------------------------------------
// Vec2FunLayer

Vec2FunLayer::Vec2FunLayer(const Vec2FunSpec& spec, std::size_t channels, std::size_t nodes, ParamAllocator& alloc)
    : spec_(spec), channels_(channels), nodes_(nodes) {
    if (spec.learn_h) h_ = alloc.take(channels * nodes);
    if (!spec.psi_identity) {
        std::vector<std::size_t> sizes{1};
        sizes.insert(sizes.end(), spec.psi.hidden.begin(), spec.psi.hidden.end());
        sizes.push_back(1);
        psi_ = PointwiseMlp(sizes, spec.psi.activation, alloc);
    }
}

double Vec2FunLayer::psi(ConstParams p, double z, Cache* cache) const {
    if (cache) cache->z = z;
    double v = z;
    if (!spec_.psi_identity) {
        Mat in(1, 1);
        in(0, 0) = z;
        v = psi_.forward(p, in, cache ? &cache->mlp : nullptr)(0, 0);
    }
    if (cache) cache->psi = v;
    return v;
}

Mat Vec2FunLayer::forward(ConstParams p, double z, Cache* cache) const {
    const double s = psi(p, z, cache);
    const auto C = static_cast<Eigen::Index>(channels_), N = static_cast<Eigen::Index>(nodes_);
    if (!spec_.learn_h) return Mat::Constant(C, N, s);
    return s * CMap(p.data() + h_, C, N);
}

void Vec2FunLayer::backward(ConstParams p, const Cache& cache, const Mat& dv, Grads g) const {
    const auto C = static_cast<Eigen::Index>(channels_), N = static_cast<Eigen::Index>(nodes_);
    double gpsi;
    if (spec_.learn_h) {
        CMap h(p.data() + h_, C, N);
        gpsi = dv.cwiseProduct(h).sum();
        MMap(g.data() + h_, C, N) += cache.psi * dv;
    } else {
        gpsi = dv.sum();
    }
    if (!spec_.psi_identity) {
        Mat d(1, 1);
        d(0, 0) = gpsi;
        psi_.backward(p, cache.mlp, d, g);
    }
}

void Vec2FunLayer::initialize(std::span<double> p, CounterRng& rng) const {
    if (spec_.learn_h)
        for (std::size_t k = 0; k < channels_ * nodes_; ++k) p[h_ + k] = 1.0;
    if (!spec_.psi_identity) psi_.initialize(p, rng);
}

} // namespace condlab::nop
