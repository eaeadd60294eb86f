#pragma once

#include <cstdint>
#include <random>

namespace qvp {

/// One independent random stream. Streams are keyed by (seed, stream_id):
/// equal keys reproduce the same sequence, distinct stream ids are seeded
/// through std::seed_seq so they are decorrelated.
///
/// A stream is owned by exactly one chain / path; it is not thread safe.
class RngStream {
 public:
  using engine_type = std::mt19937_64;
  using result_type = engine_type::result_type;

  explicit RngStream(std::uint64_t seed = 0, std::uint32_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32), stream_id,
                      0x51564bu};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t stream_id() const noexcept { return stream_id_; }

  // UniformRandomBitGenerator interface so std:: distributions accept it.
  static constexpr result_type min() { return engine_type::min(); }
  static constexpr result_type max() { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    double u;
    do {
      u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    } while (u == 0.0);
    return u;
  }

  double normal() { return normal_(*this); }

  /// Gamma with the given shape and unit scale.
  double gamma(double shape) {
    return std::gamma_distribution<double>(shape, 1.0)(*this);
  }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(*this);
  }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::uint64_t seed_;
  std::uint32_t stream_id_;
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qvp
