#pragma once

#include <cstdint>
#include <string_view>

namespace uwc {

/// Counter-based generator: draw i of a stream is splitmix64_mix(key + i * golden).
/// Streams are keyed by (master seed, name, index) so any component can be
/// regenerated independently of the others.
class CounterRng {
 public:
  static constexpr const char* algorithm_id = "splitmix64-counter/v1+box-muller";

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0,1).
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  CounterRng substream(std::string_view name, std::uint64_t index = 0) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);
std::uint64_t fnv1a64(std::string_view s);

}  // namespace uwc
