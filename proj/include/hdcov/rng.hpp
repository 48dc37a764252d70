#pragma once

#include <array>
#include <cstdint>

#include "hdcov/types.hpp"

namespace hdcov {

/// Philox4x32-10 counter-based block cipher (Salmon et al., Random123).
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter encrypt(Counter counter, Key key);
};

/// Distinguishes independent uses of one master seed (calibration draws,
/// alternative draws, ...). Each purpose gets its own Philox key.
enum class StreamPurpose : std::uint64_t {
    Sample = 1,
    NullCalibration = 2,
    Alternative = 3,
    Dispersion = 4,
    CltEvaluation = 5,
    CltCalibration = 6,
    WishartMoments = 7,
    InverseMoment = 8,
    FourthMoment = 9,
    TraceTail = 10,
    Verification = 11,
};

/// Substream for one replicate: key from (seed, purpose), counter from
/// (replicate, block). Streams for distinct replicates never share a counter
/// and streams for distinct purposes never share a key, so results depend only
/// on (seed, purpose, replicate) and not on scheduling.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t replicate);

    std::uint64_t next_u64();

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();

    /// Standard normal via the Box-Muller transform.
    double normal();

private:
    void refill();

    Philox4x32::Key key_{};
    std::uint64_t replicate_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive keys and disjoint seeds.
std::uint64_t mix64(std::uint64_t x);

/// A seed that is a deterministic function of (seed, salt) and unrelated to
/// it as a Philox key.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

/// rows x cols matrix of independent N(0,1) entries, filled one observation
/// (row) at a time.
Matrix standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, RandomStream& stream);

}  // namespace hdcov
