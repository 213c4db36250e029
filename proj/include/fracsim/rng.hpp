#pragma once

// Counter-based random streams (Philox4x32-10). A stream is addressed by
// (seed, sample_id, stream_id) so every Monte Carlo sample and every mode
// draws the same numbers no matter which worker thread evaluates it.

#include <array>
#include <cstdint>
#include <span>

namespace fracsim {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Ten-round Philox4x32 bijection.
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept;

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint32_t sample_id, std::uint32_t stream_id) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal via Box-Muller.
  double normal() noexcept;
  void fill_normal(std::span<double> out) noexcept;

 private:
  void refill() noexcept;

  PhiloxKey key_;
  std::uint32_t sample_id_;
  std::uint32_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Handle for one Monte Carlo sample; hands out per-purpose substreams.
class SampleRng {
 public:
  SampleRng(std::uint64_t seed, std::uint32_t sample_id) noexcept
      : seed_(seed), sample_id_(sample_id) {}

  RngStream stream(std::uint32_t stream_id) const noexcept {
    return RngStream(seed_, sample_id_, stream_id);
  }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t sample_id() const noexcept { return sample_id_; }

 private:
  std::uint64_t seed_;
  std::uint32_t sample_id_;
};

}  // namespace fracsim
