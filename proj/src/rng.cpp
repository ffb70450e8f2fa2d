#include "absorb/rng.hpp"

#include <numeric>
#include <stdexcept>

#include "absorb/hash.hpp"

namespace absorb {

Stream::Stream(std::uint64_t key, std::uint64_t substream) noexcept
    : key_(key), base_(mix64(key ^ mix64(substream + 0x5851F42D4C957F2DULL))) {}

std::uint64_t Stream::next() noexcept { return mix64(base_ + 0xD1B54A32D192ED03ULL * counter_++); }

std::uint64_t Stream::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Stream::below: bound must be positive");
  // Lemire's multiply-shift with rejection; exact and portable.
  std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

std::vector<std::size_t> Stream::sample_indices(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("Stream::sample_indices: k > n");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::uint64_t document_key(std::uint64_t seed, std::string_view doc_id) noexcept {
  return mix64(seed ^ mix64(fnv1a64(doc_id)));
}

}  // namespace absorb
