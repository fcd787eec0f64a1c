#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace grf::bin {

// Little-endian binary encoding helpers shared by all file formats.
// Serialization goes through an in-memory buffer so round-trip tests and
// content hashing can work on bytes without touching the filesystem.

class Writer {
public:
    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f64(double v);
    void bytes(const void* p, std::size_t n);
    // u32 length prefix + raw UTF-8 bytes
    void str(std::string_view s);

    const std::string& buffer() const { return buf_; }
    std::string take() { return std::move(buf_); }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    void bytes(void* out, std::size_t n);
    std::string str();

    std::size_t remaining() const { return data_.size() - pos_; }
    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const;

    std::string_view data_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Reads a 4-byte magic and compares; throws DataError naming the format.
void expect_magic(Reader& r, const char magic[4], const char* what);

std::uint64_t fnv1a64(std::string_view data);

} // namespace grf::bin
