#ifndef RELAYSIM_RNG_HPP
#define RELAYSIM_RNG_HPP

#include <cstdint>
#include <random>

namespace relaysim {

// Well-known substream ids so that paired runs (same seed, different relaying
// mode) consume identical draws from each stream slot by slot.
enum class StreamId : std::uint64_t {
    kLinkBsRelay = 1,
    kLinkRelayUser = 2,
    kTraffic = 3,
};

// Seeded pseudorandom stream. A simulation owns one stream per purpose
// (per link, traffic); streams derived from the same master seed but
// different ids are statistically independent.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : engine_(derive(master_seed, stream_id)) {}

    RngStream(std::uint64_t master_seed, StreamId id)
        : RngStream(master_seed, static_cast<std::uint64_t>(id)) {}

    std::mt19937_64& engine() { return engine_; }

    double uniform01() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::mt19937_64 derive(std::uint64_t master_seed, std::uint64_t stream_id) {
        return std::mt19937_64(splitmix64(splitmix64(master_seed) ^ splitmix64(~stream_id)));
    }

    std::mt19937_64 engine_;
};

} // namespace relaysim

#endif
