#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace absorb {

// Counter-based random stream. Output i of substream s is a pure function of
// (key, s, i), so draws never depend on how many numbers other consumers took.
class Stream {
 public:
  Stream(std::uint64_t key, std::uint64_t substream) noexcept;

  std::uint64_t next() noexcept;
  /// Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  std::uint64_t key() const noexcept { return key_; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct indices from [0, n) in the order drawn.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::uint64_t key_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Key of the per-document stream: mixes the corpus seed with the doc id.
std::uint64_t document_key(std::uint64_t seed, std::string_view doc_id) noexcept;

}  // namespace absorb
