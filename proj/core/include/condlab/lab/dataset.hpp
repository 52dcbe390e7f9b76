#pragma once

#include "condlab/grid.hpp"
#include "condlab/lab/config.hpp"
#include "condlab/mixture.hpp"
#include "condlab/nop/train.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace condlab::lab {

inline constexpr std::uint32_t dataset_version = 1;

/// CNDD header. Record k of a file is a pure function of (header, k): its generator is
/// CounterRng::stream(seed, k), so any single record can be regenerated.
struct DatasetHeader {
    std::uint32_t version = dataset_version;
    Family family = Family::gmm_k1;
    std::uint32_t K = 1;
    std::uint64_t seed = 0;
    ParamRanges ranges;
    std::uint64_t kde_samples = 0;  // samples per KDE record; 0 for analytic joints
    Grid2D grid;
    std::uint64_t count = 0;

    bool operator==(const DatasetHeader& o) const;
    std::string describe() const;
};

/// Joint (input) and kernel (target) values in node order i * ny + j.
struct Record {
    std::vector<GaussianComponent> params;
    std::vector<double> joint;
    std::vector<double> kernel;

    bool operator==(const Record&) const = default;
};

struct Dataset {
    DatasetHeader header;
    std::vector<Record> records;
};

/// Builds record `index` from scratch. KDE records draw kde_samples points from the
/// mixture and store the estimated joint; the target is always the analytic kernel.
/// Errors carry the record index.
Record make_record(const DatasetHeader& h, std::uint64_t index);
/// All header.count records; threads = 0 is serial, and every thread count gives the same bytes.
Dataset generate(const DatasetHeader& h, std::size_t threads);

/// Layout: magic "CNDD"; u32 version, family, K; u64 seed; f64 mean/sigma/corr ranges
/// (lo, hi each); u64 kde_samples; grid as (f64 min, f64 max, u32 n) for x then y;
/// u64 record count; then per record K x (w, mu_x, mu_y, sigma_x, sigma_y, xi), the
/// joint and the kernel as f64 blocks; CRC-32 trailer over everything before it.
std::vector<std::uint8_t> encode(const Dataset& d);
std::vector<std::uint8_t> encode_record(const DatasetHeader& h, const Record& r);
/// strict: every joint must be a valid GridDensity2D and every kernel slice a density.
Dataset decode(std::span<const std::uint8_t> bytes, bool strict, const std::string& what = "dataset");
DatasetHeader decode_header(std::span<const std::uint8_t> bytes, const std::string& what = "dataset");

void save(const std::filesystem::path& path, const Dataset& d);
Dataset load(const std::filesystem::path& path, bool strict);

/// Byte offset of record `index` within an encoded file.
std::size_t record_offset(const DatasetHeader& h, std::uint64_t index);

nop::PairSet to_pairs(const Dataset& d, std::size_t limit = 0);

DatasetHeader header_for(const ExperimentConfig& c, const std::string& split);

} // namespace condlab::lab
