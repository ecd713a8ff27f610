#ifndef SWRM_HASHING_H_
#define SWRM_HASHING_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace swrm {

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent seed for a named component from the root seed, so
// that every component draws from its own stream.
std::uint64_t derive_seed(std::uint64_t root, std::string_view component);

// Lower-case, zero-padded 16 digit hex.
std::string to_hex64(std::uint64_t value);

// Key used by language-model candidate tables: the tokens with `position`
// replaced by "[MASK]", joined by single spaces, hashed with FNV-1a, then
// "<hex>:<position>".
std::string masked_context_key(std::span<const std::string> tokens,
                               std::size_t position);

}  // namespace swrm

#endif  // SWRM_HASHING_H_
