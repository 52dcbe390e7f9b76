#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace condlab {

/// zlib CRC-32 of a byte range.
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Little-endian byte sink. Floats are stored as their IEEE-754 bit patterns.
class ByteWriter {
public:
    void put_u8(std::uint8_t v) { buf_.push_back(v); }
    void put_u32(std::uint32_t v);
    void put_u64(std::uint64_t v);
    void put_f64(double v);
    void put_f64s(std::span<const double> v);
    void put_bytes(std::span<const std::uint8_t> v) { buf_.insert(buf_.end(), v.begin(), v.end()); }
    void put_magic(const char (&m)[5]) { for (int k = 0; k < 4; ++k) put_u8(static_cast<std::uint8_t>(m[k])); }
    /// Appends the CRC-32 of everything written so far.
    void put_crc();

    const std::vector<std::uint8_t>& bytes() const noexcept { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const noexcept { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian reader. Reading past the end throws a format error
/// naming `what`.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string what) : data_(bytes), what_(std::move(what)) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    void f64s(std::span<double> out);
    void expect_magic(const char (&m)[5]);

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    void seek(std::size_t pos);

private:
    void need(std::size_t n);

    std::span<const std::uint8_t> data_;
    std::string what_;
    std::size_t pos_ = 0;
};

/// Checks the 4-byte CRC trailer; returns the payload (without trailer) on success.
std::span<const std::uint8_t> verify_crc(std::span<const std::uint8_t> bytes, const std::string& what);

/// Whole-file I/O; failures throw io errors naming the path.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames, so readers never see a partial file.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace condlab
