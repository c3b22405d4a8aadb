#pragma once

#include <cstdint>
#include <string>

namespace fcprune {

/// FNV-1a 64-bit over a byte buffer. Used for artifact fingerprints in run
/// manifests and determinism checks (not a cryptographic hash).
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_str(const std::string& s);

/// Hash of a file's bytes; throws io_error when unreadable.
std::uint64_t hash_file(const std::string& path);

std::string hex64(std::uint64_t v);

} // namespace fcprune
