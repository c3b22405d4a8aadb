#pragma once

#include <string>

#include "fcprune/matrix.hpp"

namespace fcprune {

/// FTA1 tensor container.
///
/// Layout (little-endian):
///   bytes 0-3   magic "FTA1"
///   byte  4     dtype code: 1 = IEEE-754 float32, 2 = float64
///   byte  5     ndim (always 2 here)
///   bytes 6-7   reserved, zero
///   next ndim*8 dims as u64
///   then        row-major payload
///
/// Readers reject wrong magic, unknown dtype, nonzero reserved bytes and
/// payload-length mismatches. Float32 payloads are widened to float64 in
/// memory; non-finite payload entries are rejected.
enum class Dtype : unsigned char { f32 = 1, f64 = 2 };

void write_fta1(const std::string& path, const Matrix& m, Dtype dtype = Dtype::f64);
Matrix read_fta1(const std::string& path);

} // namespace fcprune
