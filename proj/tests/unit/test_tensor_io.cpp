#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "fcprune/errors.hpp"
#include "fcprune/rng.hpp"
#include "fcprune/tensor_io.hpp"
#include "support/oracles.hpp"

using namespace fcprune;
namespace fs = std::filesystem;

namespace {

std::string temp_file(const char* name) {
    return (fs::temp_directory_path() / name).string();
}

std::vector<unsigned char> slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

} // namespace

TEST_CASE("float64 round trip is exact") {
    Rng rng(2);
    const Matrix m = oracles::random_matrix(5, 7, rng);
    const std::string path = temp_file("fcprune_t64.fta1");
    write_fta1(path, m);
    CHECK(read_fta1(path) == m);
    std::remove(path.c_str());
}

TEST_CASE("float32 payloads are widened on load") {
    Rng rng(3);
    const Matrix m = oracles::random_matrix(4, 3, rng);
    const std::string path = temp_file("fcprune_t32.fta1");
    write_fta1(path, m, Dtype::f32);
    const Matrix back = read_fta1(path);
    REQUIRE(back.rows() == 4);
    for (std::size_t i = 0; i < m.size(); ++i)
        CHECK(back.values()[i] ==
              doctest::Approx(m.values()[i]).epsilon(1e-6)); // f32 precision
    std::remove(path.c_str());
}

TEST_CASE("header layout is exactly as specified") {
    const Matrix m{{1.0, 2.0}, {3.0, 4.0}};
    const std::string path = temp_file("fcprune_hdr.fta1");
    write_fta1(path, m);
    const auto bytes = slurp(path);
    REQUIRE(bytes.size() == 8 + 16 + 4 * 8);
    CHECK(bytes[0] == 'F');
    CHECK(bytes[1] == 'T');
    CHECK(bytes[2] == 'A');
    CHECK(bytes[3] == '1');
    CHECK(bytes[4] == 2); // f64
    CHECK(bytes[5] == 2); // ndim
    CHECK(bytes[6] == 0);
    CHECK(bytes[7] == 0);
    CHECK(bytes[8] == 2); // rows, little-endian u64
    CHECK(bytes[16] == 2); // cols
    std::remove(path.c_str());
}

TEST_CASE("reader rejects malformed containers") {
    const Matrix m{{1.0, 2.0}, {3.0, 4.0}};
    const std::string path = temp_file("fcprune_bad.fta1");
    write_fta1(path, m);
    const auto good = slurp(path);

    auto corrupt = good;
    corrupt[0] = 'X';
    spit(path, corrupt);
    CHECK_THROWS_AS(read_fta1(path), io_error);

    corrupt = good;
    corrupt[4] = 9; // unknown dtype
    spit(path, corrupt);
    CHECK_THROWS_AS(read_fta1(path), io_error);

    corrupt = good;
    corrupt[6] = 1; // reserved byte
    spit(path, corrupt);
    CHECK_THROWS_AS(read_fta1(path), io_error);

    corrupt = good;
    corrupt.pop_back(); // payload length mismatch
    spit(path, corrupt);
    CHECK_THROWS_AS(read_fta1(path), io_error);

    CHECK_THROWS_AS(read_fta1(temp_file("fcprune_missing.fta1")), io_error);
    std::remove(path.c_str());
}

TEST_CASE("reader rejects non-finite payloads") {
    const Matrix m{{1.0}};
    const std::string path = temp_file("fcprune_nan.fta1");
    write_fta1(path, m);
    auto bytes = slurp(path);
    // Overwrite the payload with a quiet NaN bit pattern.
    const unsigned char nan_bytes[8] = {0, 0, 0, 0, 0, 0, 0xF8, 0x7F};
    for (int i = 0; i < 8; ++i) bytes[bytes.size() - 8 + std::size_t(i)] = nan_bytes[i];
    spit(path, bytes);
    CHECK_THROWS_AS(read_fta1(path), io_error);
    std::remove(path.c_str());
}
