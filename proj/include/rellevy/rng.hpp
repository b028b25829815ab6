#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace rellevy {

/// xoshiro256++ stream keyed by (seed, experiment id, path index). The key is
/// mixed through splitmix64, so distinct keys give unrelated streams and a
/// given key reproduces the same numbers on every run and thread.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t experiment_id, std::uint64_t path_index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  long poisson(double mean);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t experiment_id() const noexcept { return experiment_id_; }
  std::uint64_t path_index() const noexcept { return path_index_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_, experiment_id_, path_index_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace rellevy
