#include "fcprune/tensor_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "fcprune/errors.hpp"

namespace fcprune {

namespace {

constexpr char kMagic[4] = {'F', 'T', 'A', '1'};

void put_u64_le(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

// Serializes via the bit pattern so output is identical regardless of host
// float environment. Host is little-endian in practice; the byte swap below
// keeps the format well-defined either way.
void put_f64_le(std::vector<unsigned char>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64_le(out, bits);
}

void put_f32_le(std::vector<unsigned char>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFF));
}

} // namespace

void write_fta1(const std::string& path, const Matrix& m, Dtype dtype) {
    std::vector<unsigned char> buf;
    buf.reserve(16 + m.size() * 8);
    buf.insert(buf.end(), kMagic, kMagic + 4);
    buf.push_back(static_cast<unsigned char>(dtype));
    buf.push_back(2); // ndim
    buf.push_back(0);
    buf.push_back(0);
    put_u64_le(buf, m.rows());
    put_u64_le(buf, m.cols());
    if (dtype == Dtype::f64) {
        for (double v : m.values()) put_f64_le(buf, v);
    } else {
        for (double v : m.values()) put_f32_le(buf, static_cast<float>(v));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw io_error("short write: " + path);
}

Matrix read_fta1(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open: " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 8) throw io_error("FTA1: truncated header: " + path);
    if (std::memcmp(buf.data(), kMagic, 4) != 0) throw io_error("FTA1: bad magic: " + path);
    const unsigned char dtype = buf[4];
    if (dtype != 1 && dtype != 2) {
        throw io_error("FTA1: unknown dtype code " + std::to_string(int(dtype)) + ": " + path);
    }
    const unsigned char ndim = buf[5];
    if (ndim != 2) throw io_error("FTA1: expected ndim 2, got " + std::to_string(int(ndim)));
    if (buf[6] != 0 || buf[7] != 0) throw io_error("FTA1: reserved bytes not zero: " + path);
    const std::size_t head = 8 + std::size_t(ndim) * 8;
    if (buf.size() < head) throw io_error("FTA1: truncated dims: " + path);
    const std::uint64_t rows = get_u64_le(buf.data() + 8);
    const std::uint64_t cols = get_u64_le(buf.data() + 16);
    const std::size_t elem = (dtype == 2) ? 8 : 4;
    const std::uint64_t count = rows * cols;
    if (buf.size() - head != count * elem) {
        throw io_error("FTA1: payload length mismatch (have " + std::to_string(buf.size() - head) +
                       " bytes, expect " + std::to_string(count * elem) + "): " + path);
    }
    std::vector<double> vals(count);
    const unsigned char* p = buf.data() + head;
    if (dtype == 2) {
        for (std::uint64_t i = 0; i < count; ++i) {
            std::uint64_t bits = get_u64_le(p + i * 8);
            double v;
            std::memcpy(&v, &bits, 8);
            vals[i] = v;
        }
    } else {
        for (std::uint64_t i = 0; i < count; ++i) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b)
                bits |= std::uint32_t(p[i * 4 + b]) << (8 * b);
            float v;
            std::memcpy(&v, &bits, 4);
            vals[i] = static_cast<double>(v);
        }
    }
    for (double v : vals) {
        if (!std::isfinite(v)) throw io_error("FTA1: non-finite payload entry: " + path);
    }
    return Matrix(rows, cols, std::move(vals));
}

} // namespace fcprune
