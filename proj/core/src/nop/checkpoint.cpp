#include "condlab/nop/checkpoint.hpp"

#include "condlab/error.hpp"

#include <cmath>

namespace condlab::nop {

namespace {

constexpr std::uint32_t kMaxCount = 1u << 20;

void write_mlp(ByteWriter& w, const MlpSpec& m) {
    w.put_u32(static_cast<std::uint32_t>(m.hidden.size()));
    for (auto h : m.hidden) w.put_u32(static_cast<std::uint32_t>(h));
    w.put_u8(static_cast<std::uint8_t>(m.activation));
}

Activation read_activation(ByteReader& r) {
    const auto a = r.u8();
    if (a > static_cast<std::uint8_t>(Activation::gelu_tanh)) fail(ErrorKind::format, "unknown activation tag");
    return static_cast<Activation>(a);
}

std::uint32_t read_count(ByteReader& r, const char* what) {
    const auto n = r.u32();
    if (n > kMaxCount) fail(ErrorKind::format, std::string("implausible ") + what);
    return n;
}

MlpSpec read_mlp(ByteReader& r) {
    MlpSpec m;
    const auto n = read_count(r, "layer count");
    for (std::uint32_t k = 0; k < n; ++k) m.hidden.push_back(read_count(r, "width"));
    m.activation = read_activation(r);
    return m;
}

} // namespace

Checkpoint Checkpoint::of(NOModel model) {
    Checkpoint c;
    c.kind = CheckpointKind::model;
    c.grid = model.grid();
    c.model.emplace(std::move(model));
    return c;
}

Checkpoint Checkpoint::oracle(const Grid2D& grid) {
    Checkpoint c;
    c.kind = CheckpointKind::oracle;
    c.grid = grid;
    return c;
}

void write_grid(ByteWriter& w, const Grid2D& g) {
    for (const Axis* a : {&g.x(), &g.y()}) {
        w.put_f64(a->lo());
        w.put_f64(a->hi());
        w.put_u32(static_cast<std::uint32_t>(a->size()));
    }
}

Grid2D read_grid(ByteReader& r) {
    const double x0 = r.f64(), x1 = r.f64();
    const auto nx = r.u32();
    const double y0 = r.f64(), y1 = r.f64();
    const auto ny = r.u32();
    if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(y0) || !std::isfinite(y1) || nx > kMaxCount ||
        ny > kMaxCount)
        fail(ErrorKind::format, "invalid grid header");
    try {
        return make_grid(x0, x1, nx, y0, y1, ny);
    } catch (const Error& e) {
        fail(ErrorKind::format, std::string("invalid grid header: ") + e.what());
    }
}

void write_spec(ByteWriter& w, const ModelSpec& s) {
    write_grid(w, s.grid);
    w.put_u32(static_cast<std::uint32_t>(s.in_channels));
    w.put_u32(static_cast<std::uint32_t>(s.out_channels));
    w.put_u32(static_cast<std::uint32_t>(s.lifting_width));
    write_mlp(w, s.lifting);
    w.put_u32(static_cast<std::uint32_t>(s.hidden.size()));
    for (const auto& h : s.hidden) {
        w.put_u32(static_cast<std::uint32_t>(h.width));
        w.put_u32(static_cast<std::uint32_t>(h.rank));
        w.put_u8(static_cast<std::uint8_t>(h.basis));
        w.put_u8(static_cast<std::uint8_t>(h.activation));
    }
    write_mlp(w, s.projection);
    w.put_u8(s.vec2fun ? 1 : 0);
    if (s.vec2fun) {
        w.put_u8(s.vec2fun->learn_h ? 1 : 0);
        w.put_u8(s.vec2fun->psi_identity ? 1 : 0);
        write_mlp(w, s.vec2fun->psi);
    }
}

ModelSpec read_spec(ByteReader& r) {
    ModelSpec s;
    s.grid = read_grid(r);
    s.in_channels = read_count(r, "channel count");
    s.out_channels = read_count(r, "channel count");
    s.lifting_width = read_count(r, "width");
    s.lifting = read_mlp(r);
    const auto depth = read_count(r, "depth");
    for (std::uint32_t l = 0; l < depth; ++l) {
        HiddenSpec h;
        h.width = read_count(r, "width");
        h.rank = read_count(r, "rank");
        const auto basis = r.u8();
        if (basis > 1) fail(ErrorKind::format, "unknown basis tag");
        h.basis = static_cast<Basis>(basis);
        h.activation = read_activation(r);
        s.hidden.push_back(h);
    }
    s.projection = read_mlp(r);
    if (r.u8() != 0) {
        Vec2FunSpec v;
        v.learn_h = r.u8() != 0;
        v.psi_identity = r.u8() != 0;
        v.psi = read_mlp(r);
        s.vec2fun = v;
    }
    try {
        s.validate();
    } catch (const Error& e) {
        fail(ErrorKind::format, std::string("invalid model spec: ") + e.what());
    }
    return s;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
    ByteWriter w;
    w.put_magic("CNOP");
    w.put_u32(checkpoint_version);
    w.put_u32(static_cast<std::uint32_t>(c.kind));
    write_grid(w, c.grid);
    if (c.kind == CheckpointKind::model) {
        require(c.model.has_value(), "model checkpoint without a model");
        write_spec(w, c.model->spec());
        const auto p = c.model->params();
        w.put_u64(p.size());
        w.put_f64s(p);
    }
    w.put_crc();
    return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& what) {
    const auto payload = verify_crc(bytes, what);
    ByteReader r(payload, what);
    r.expect_magic("CNOP");
    const auto version = r.u32();
    if (version != checkpoint_version)
        fail(ErrorKind::format, what + ": unsupported version " + std::to_string(version));
    const auto kind = r.u32();
    if (kind > 1) fail(ErrorKind::format, what + ": unknown checkpoint kind");
    Checkpoint c;
    c.kind = static_cast<CheckpointKind>(kind);
    c.grid = read_grid(r);
    if (c.kind == CheckpointKind::model) {
        ModelSpec spec = read_spec(r);
        if (!(spec.grid == c.grid)) fail(ErrorKind::format, what + ": model grid disagrees with header grid");
        NOModel model(std::move(spec));
        const auto n = r.u64();
        if (n != model.num_params())
            fail(ErrorKind::format, what + ": parameter count " + std::to_string(n) + " does not match the model layout (" +
                                        std::to_string(model.num_params()) + ")");
        r.f64s(model.params());
        for (double v : model.params())
            if (!std::isfinite(v)) fail(ErrorKind::format, what + ": non-finite parameter");
        c.model.emplace(std::move(model));
    }
    if (r.remaining() != 0) fail(ErrorKind::format, what + ": trailing bytes");
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    write_file(path, encode_checkpoint(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(read_file(path), path.string());
}

} // namespace condlab::nop
