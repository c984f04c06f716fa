#pragma once

#include <array>
#include <cstdint>

namespace causal {

// Philox4x32-10 counter-based generator (Salmon et al., Random123 layout).
// A (seed, stream) pair fully determines the output sequence, so independent
// substreams are cheap: one per data block, one per experiment replicate.
class Philox {
  public:
    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1), 53 usable bits.
    double next_double();
    // Standard normal via Box-Muller; the paired draw is cached.
    double next_normal();
    // Uniform integer in [0, n); n must be positive.
    std::uint64_t next_below(std::uint64_t n);

    // One raw Philox4x32-10 block; exposed for the known-answer tests.
    static std::array<std::uint32_t, 4> raw_block(
        const std::array<std::uint32_t, 4>& counter,
        const std::array<std::uint32_t, 2>& key);

    template <typename T>
    void shuffle(T& seq) {
        for (std::size_t k = seq.size(); k > 1; --k) {
            const std::size_t j = static_cast<std::size_t>(next_below(k));
            std::swap(seq[k - 1], seq[j]);
        }
    }

  private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_{};
    int block_pos_ = 4;  // exhausted
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

// SplitMix64 step; used to derive replicate seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace causal
