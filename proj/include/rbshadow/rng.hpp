#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace rbshadow {

// Philox4x32-10 (Salmon et al. 2011). Output depends only on key and counter.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{M0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{M1} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

// Identifies one independent substream.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint32_t protocol = 0;
    std::uint32_t point = 0;   // sweep point / purpose tag
    std::uint32_t length = 0;  // length index
    std::uint32_t shot = 0;
};

class Rng {
public:
    using result_type = std::uint32_t;

    explicit Rng(const StreamKey& k)
        : key_{static_cast<std::uint32_t>(k.seed), static_cast<std::uint32_t>(k.seed >> 32)},
          c1_(k.shot), c2_((k.protocol << 24) ^ k.length), c3_(k.point) {
        if (k.protocol >= 256 || k.length >= (1u << 24)) throw std::invalid_argument("stream key field out of range");
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = (*this)();
        return (hi << 32) | (*this)();
    }

    // 53-bit uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("below(0)");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        for (;;) {
            const std::uint64_t v = next_u64();
            if (v < limit) return v % n;
        }
    }

    std::uint64_t bits(int count) {
        if (count <= 0) return 0;
        const std::uint64_t v = next_u64();
        return count >= 64 ? v : (v & ((std::uint64_t{1} << count) - 1));
    }

    bool coin() { return bits(1) != 0; }

private:
    void refill() {
        buf_ = philox4x32({block_, c1_, c2_, c3_}, key_);
        ++block_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t c1_, c2_, c3_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

}  // namespace rbshadow
