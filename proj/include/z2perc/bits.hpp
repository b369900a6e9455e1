#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace z2perc {

// Packed bit array used for spin configurations: bit set == tau = -1.
// Padding bits in the last word are kept zero so equality and byte export
// are well defined.
class BitArray {
 public:
  BitArray() = default;
  explicit BitArray(std::size_t n, bool ones = false)
      : n_(n), w_((n + 63) / 64, ones ? ~0ull : 0ull) {
    trim();
  }

  std::size_t size() const { return n_; }

  bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1ull; }

  void set(std::size_t i, bool v) {
    const std::uint64_t m = 1ull << (i & 63);
    if (v)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }

  void flip(std::size_t i) { w_[i >> 6] ^= 1ull << (i & 63); }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : w_) c += std::popcount(w);
    return c;
  }

  bool operator==(const BitArray&) const = default;

  // Little-endian byte export/import, ceil(n/8) bytes, bit i of the stream is
  // bit (i%8) of byte (i/8).  This is the on-disk snapshot payload layout.
  std::size_t byte_size() const { return (n_ + 7) / 8; }

  void to_bytes(std::uint8_t* out) const {
    for (std::size_t b = 0; b < byte_size(); ++b)
      out[b] = static_cast<std::uint8_t>(w_[b >> 3] >> ((b & 7) * 8));
  }

  static BitArray from_bytes(const std::uint8_t* in, std::size_t n_bits) {
    BitArray a(n_bits);
    for (std::size_t b = 0; b < a.byte_size(); ++b)
      a.w_[b >> 3] |= static_cast<std::uint64_t>(in[b]) << ((b & 7) * 8);
    a.trim();  // stray padding bits in the stream are ignored
    return a;
  }

 private:
  void trim() {
    if (n_ & 63) w_.back() &= (~0ull >> (64 - (n_ & 63)));
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

}  // namespace z2perc
