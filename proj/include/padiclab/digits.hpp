#pragma once

#include <cstdint>
#include <initializer_list>

namespace padiclab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Order-sensitive combination of key material into one 64-bit seed.
inline std::uint64_t mix_keys(std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = 0x6a09e667f3bcc909ull;
    for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k));
    return h;
}

/// Deterministic stream of base-p digits. The digit at a given position
/// depends only on (seed, position), so streams are replayable and
/// independent of evaluation schedule.
class DigitSource {
public:
    DigitSource(unsigned long p, std::uint64_t seed) : p_(p), seed_(seed) {}

    /// A source that emits 0 forever, for tests that need unperturbed fill.
    static DigitSource zeros(unsigned long p) {
        DigitSource d(p, 0);
        d.zero_ = true;
        return d;
    }

    unsigned long prime() const { return p_; }
    std::uint64_t position() const { return pos_; }

    unsigned draw() {
        std::uint64_t r = splitmix64(mix_keys({seed_, pos_}));
        ++pos_;
        return zero_ ? 0u : static_cast<unsigned>(r % p_);
    }

private:
    unsigned long p_;
    std::uint64_t seed_;
    std::uint64_t pos_ = 0;
    bool zero_ = false;
};

}  // namespace padiclab
