#include "condlab/binio.hpp"

#include "condlab/error.hpp"

#include <zlib.h>

#include <bit>
#include <fstream>
#include <limits>
#include <system_error>

namespace condlab {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    const std::uint8_t* p = bytes.data();
    std::size_t left = bytes.size();
    while (left > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, std::numeric_limits<uInt>::max()));
        crc = ::crc32(crc, p, chunk);
        p += chunk;
        left -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

void ByteWriter::put_u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void ByteWriter::put_u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_f64s(std::span<const double> v) {
    buf_.reserve(buf_.size() + 8 * v.size());
    for (double x : v) put_f64(x);
}

void ByteWriter::put_crc() { put_u32(crc32(buf_)); }

void ByteReader::need(std::size_t n) {
    if (n > remaining())
        fail(ErrorKind::format, what_ + ": truncated (need " + std::to_string(n) + " bytes at offset " +
                                    std::to_string(pos_) + ")");
}

std::uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(data_[pos_ + k]) << (8 * k);
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(data_[pos_ + k]) << (8 * k);
    pos_ += 8;
    return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void ByteReader::f64s(std::span<double> out) {
    need(8 * out.size());
    for (double& x : out) x = f64();
}

void ByteReader::expect_magic(const char (&m)[5]) {
    need(4);
    for (int k = 0; k < 4; ++k)
        if (data_[pos_ + k] != static_cast<std::uint8_t>(m[k]))
            fail(ErrorKind::format, what_ + ": bad magic (expected " + std::string(m, 4) + ")");
    pos_ += 4;
}

void ByteReader::seek(std::size_t pos) {
    if (pos > data_.size()) fail(ErrorKind::format, what_ + ": seek past end");
    pos_ = pos;
}

std::span<const std::uint8_t> verify_crc(std::span<const std::uint8_t> bytes, const std::string& what) {
    if (bytes.size() < 4) fail(ErrorKind::format, what + ": too short for a CRC trailer");
    const auto payload = bytes.first(bytes.size() - 4);
    ByteReader tail(bytes.last(4), what);
    const std::uint32_t stored = tail.u32();
    const std::uint32_t actual = crc32(payload);
    if (stored != actual) fail(ErrorKind::format, what + ": CRC mismatch (file is corrupted)");
    return payload;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    if (size < 0) fail(ErrorKind::io, "cannot determine size of '" + path.string() + "'");
    in.seekg(0, std::ios::beg);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    if (!bytes.empty() && !in.read(reinterpret_cast<char*>(bytes.data()), size))
        fail(ErrorKind::io, "read failed for '" + path.string() + "'");
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) fail(ErrorKind::io, "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot open '" + tmp.string() + "' for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out.flush()) fail(ErrorKind::io, "write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::io, "cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

} // namespace condlab
