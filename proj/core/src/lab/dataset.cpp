#include "condlab/lab/dataset.hpp"

#include "condlab/binio.hpp"
#include "condlab/error.hpp"
#include "condlab/estimator.hpp"
#include "condlab/kernel_field.hpp"
#include "condlab/nop/checkpoint.hpp"
#include "condlab/parallel.hpp"

#include <cmath>
#include <sstream>

namespace condlab::lab {

namespace {

constexpr std::size_t kHeaderBytes = 4 + 4 * 3 + 8 + 8 * 6 + 8 + (8 + 8 + 4) * 2 + 8;

void put_ranges(ByteWriter& w, const ParamRanges& r) {
    for (const Interval* i : {&r.mean, &r.sigma, &r.corr}) {
        w.put_f64(i->lo);
        w.put_f64(i->hi);
    }
}

void write_header(ByteWriter& w, const DatasetHeader& h) {
    w.put_magic("CNDD");
    w.put_u32(h.version);
    w.put_u32(static_cast<std::uint32_t>(h.family));
    w.put_u32(h.K);
    w.put_u64(h.seed);
    put_ranges(w, h.ranges);
    w.put_u64(h.kde_samples);
    nop::write_grid(w, h.grid);
    w.put_u64(h.count);
}

void write_record(ByteWriter& w, const DatasetHeader& h, const Record& r) {
    require(r.params.size() == h.K, "record component count does not match the header");
    require(r.joint.size() == h.grid.size() && r.kernel.size() == h.grid.size(),
            "record field size does not match the header grid");
    for (const auto& c : r.params) {
        w.put_f64(c.weight);
        w.put_f64(c.mu_x);
        w.put_f64(c.mu_y);
        w.put_f64(c.sigma_x);
        w.put_f64(c.sigma_y);
        w.put_f64(c.xi);
    }
    w.put_f64s(r.joint);
    w.put_f64s(r.kernel);
}

DatasetHeader read_header(ByteReader& r, const std::string& what) {
    r.expect_magic("CNDD");
    DatasetHeader h;
    h.version = r.u32();
    if (h.version != dataset_version)
        fail(ErrorKind::format, what + ": unsupported version " + std::to_string(h.version));
    const auto fam = r.u32();
    if (fam > 2) fail(ErrorKind::format, what + ": unknown family tag " + std::to_string(fam));
    h.family = static_cast<Family>(fam);
    h.K = r.u32();
    if (h.K < 1 || h.K > 64) fail(ErrorKind::format, what + ": implausible component count");
    h.seed = r.u64();
    for (Interval* i : {&h.ranges.mean, &h.ranges.sigma, &h.ranges.corr}) {
        i->lo = r.f64();
        i->hi = r.f64();
    }
    h.kde_samples = r.u64();
    h.grid = nop::read_grid(r);
    h.count = r.u64();
    return h;
}

std::string range_text(const Interval& i) {
    std::ostringstream os;
    os << '[' << i.lo << ", " << i.hi << ']';
    return os.str();
}

} // namespace

bool DatasetHeader::operator==(const DatasetHeader& o) const {
    auto same = [](const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; };
    return version == o.version && family == o.family && K == o.K && seed == o.seed &&
           same(ranges.mean, o.ranges.mean) && same(ranges.sigma, o.ranges.sigma) &&
           same(ranges.corr, o.ranges.corr) && kde_samples == o.kde_samples && grid == o.grid && count == o.count;
}

std::string DatasetHeader::describe() const {
    std::ostringstream os;
    os << "CNDD v" << version << " family=" << to_string(family) << " K=" << K << " seed=" << seed
       << " records=" << count << " grid=" << grid.nx() << "x" << grid.ny() << " on [" << grid.x().lo() << ", "
       << grid.x().hi() << "]x[" << grid.y().lo() << ", " << grid.y().hi() << "]"
       << " mean=" << range_text(ranges.mean) << " sigma=" << range_text(ranges.sigma)
       << " corr=" << range_text(ranges.corr);
    if (family == Family::kde) os << " kde_samples=" << kde_samples;
    return os.str();
}

Record make_record(const DatasetHeader& h, std::uint64_t index) {
    try {
        auto rng = CounterRng::stream(h.seed, index);
        auto prng = rng.split(0);
        const auto params = sample_params(h.K, h.ranges, prng);
        Record r;
        r.params = params.components();
        const auto kernel = render_kernel(params, h.grid);
        r.kernel.assign(kernel.values().begin(), kernel.values().end());
        if (h.family == Family::kde) {
            auto srng = rng.split(1);
            const auto pts = sample_points(params, h.kde_samples, srng);
            const auto joint = kde_density(KdeSpec::silverman(pts), h.grid);
            r.joint.assign(joint.values().begin(), joint.values().end());
        } else {
            const auto joint = render_joint(params, h.grid);
            r.joint.assign(joint.values().begin(), joint.values().end());
        }
        return r;
    } catch (const Error& e) {
        throw Error(e.kind(), "record " + std::to_string(index) + ": " + e.what(), static_cast<long>(index));
    }
}

Dataset generate(const DatasetHeader& h, std::size_t threads) {
    h.ranges.validate();
    if (h.family == Family::kde) require(h.kde_samples >= 1, "KDE datasets need at least one sample per record");
    Dataset d;
    d.header = h;
    d.records.resize(h.count);
    parallel_for(h.count, threads, [&](std::size_t k) { d.records[k] = make_record(h, k); });
    return d;
}

std::vector<std::uint8_t> encode(const Dataset& d) {
    require(d.records.size() == d.header.count, "record count does not match the header");
    ByteWriter w;
    write_header(w, d.header);
    for (const auto& r : d.records) write_record(w, d.header, r);
    w.put_crc();
    return w.take();
}

std::vector<std::uint8_t> encode_record(const DatasetHeader& h, const Record& r) {
    ByteWriter w;
    write_record(w, h, r);
    return w.take();
}

std::size_t record_offset(const DatasetHeader& h, std::uint64_t index) {
    const std::size_t per = 8 * (6 * h.K + 2 * h.grid.size());
    return kHeaderBytes + static_cast<std::size_t>(index) * per;
}

DatasetHeader decode_header(std::span<const std::uint8_t> bytes, const std::string& what) {
    ByteReader r(bytes, what);
    return read_header(r, what);
}

Dataset decode(std::span<const std::uint8_t> bytes, bool strict, const std::string& what) {
    const auto payload = verify_crc(bytes, what);
    ByteReader r(payload, what);
    Dataset d;
    d.header = read_header(r, what);
    const auto& h = d.header;
    const std::size_t N = h.grid.size();
    const std::size_t per = 8 * (6 * h.K + 2 * N);
    if (r.remaining() != per * h.count)
        fail(ErrorKind::format, what + ": payload size does not match " + std::to_string(h.count) + " records");
    d.records.resize(h.count);
    for (std::uint64_t k = 0; k < h.count; ++k) {
        auto& rec = d.records[k];
        rec.params.resize(h.K);
        for (auto& c : rec.params) {
            c.weight = r.f64();
            c.mu_x = r.f64();
            c.mu_y = r.f64();
            c.sigma_x = r.f64();
            c.sigma_y = r.f64();
            c.xi = r.f64();
        }
        rec.joint.resize(N);
        rec.kernel.resize(N);
        r.f64s(rec.joint);
        r.f64s(rec.kernel);
        const auto idx = static_cast<long>(k);
        for (std::size_t n = 0; n < N; ++n)
            if (!std::isfinite(rec.joint[n]) || !std::isfinite(rec.kernel[n]))
                fail(ErrorKind::format, what + ": record " + std::to_string(k) + " holds non-finite values", idx);
        if (strict) {
            try {
                (void)MixtureParams(rec.params);
                (void)GridDensity2D(GridField2D(h.grid, rec.joint));
                (void)KernelField(GridField2D(h.grid, rec.kernel));
            } catch (const Error& e) {
                fail(ErrorKind::format, what + ": record " + std::to_string(k) + " fails strict checks: " + e.what(),
                     idx);
            }
        }
    }
    return d;
}

void save(const std::filesystem::path& path, const Dataset& d) { write_file(path, encode(d)); }

Dataset load(const std::filesystem::path& path, bool strict) { return decode(read_file(path), strict, path.string()); }

nop::PairSet to_pairs(const Dataset& d, std::size_t limit) {
    nop::PairSet ps{d.header.grid, {}, {}};
    const std::size_t n = limit == 0 ? d.records.size() : std::min(limit, d.records.size());
    ps.inputs.reserve(n);
    ps.targets.reserve(n);
    for (std::size_t k = 0; k < n; ++k) ps.add(d.records[k].joint, d.records[k].kernel);
    return ps;
}

DatasetHeader header_for(const ExperimentConfig& c, const std::string& split) {
    DatasetHeader h;
    h.K = static_cast<std::uint32_t>(c.data.K);
    h.family = c.data.K == 1 ? Family::gmm_k1 : Family::gmm_k3;
    h.ranges = c.data.ranges;
    h.grid = c.data.grid();
    if (split == "train") {
        h.seed = c.data.seed_train;
        h.count = c.data.n_train;
    } else if (split == "val") {
        h.seed = c.data.seed_val;
        h.count = c.data.n_val;
    } else if (split == "test") {
        h.seed = c.data.seed_test;
        h.count = c.data.n_test;
    } else if (split == "kde") {
        h.family = Family::kde;
        h.seed = c.data.kde_seed;
        h.count = c.data.kde_records;
        h.kde_samples = c.data.kde_samples;
    } else {
        fail(ErrorKind::invalid_argument, "unknown split '" + split + "'");
    }
    return h;
}

} // namespace condlab::lab
