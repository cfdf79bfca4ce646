#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace invopt {

// Counter-based generator: the value at (key, counter) is a pure function of
// both, so independent streams can be carved out of one master seed and any
// draw can be reproduced without replaying the sequence.
//
// word(key, i) = mix64(key + i * 0x9E3779B97F4A7C15), where mix64 is the
// splitmix64 finalizer. Documented here because other implementations must
// reproduce the exact stream.
class Rng {
 public:
  explicit Rng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
  }

  static std::uint64_t word(std::uint64_t key, std::uint64_t counter) {
    return mix64(key + counter * 0x9E3779B97F4A7C15ULL);
  }

  // FNV-1a over the tag, folded with the parent key. Used to derive disjoint
  // substreams ("train", "test", ...) from one master seed.
  static std::uint64_t derive_key(std::uint64_t key, std::string_view tag) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ULL;
    }
    return mix64(key ^ mix64(h));
  }

  Rng substream(std::string_view tag) const {
    return Rng(derive_key(key_, tag));
  }

  std::uint64_t next_u64() { return word(key_, counter_++); }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols,
                                 double lo, double hi) {
    // Row-major fill so the stream layout is unambiguous.
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace invopt
