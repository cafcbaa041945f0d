#pragma once

#include <cstdint>
#include <vector>

namespace scs {

// splitmix64. Chosen because the stream is a pure function of the 64-bit
// seed on every platform, which the checkpoint/metrics reproducibility
// contract depends on. Single-consumer: do not share across threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // [0, bound). Plain modulo; the bias is irrelevant at these bound sizes
    // and keeping the mapping trivial keeps it portable.
    std::size_t next_index(std::size_t bound) {
        return static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(bound));
    }

    // Fisher-Yates, back to front.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = next_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Deterministic sub-stream seed, independent of generator state.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        Rng r(seed ^ (0xD1B54A32D192ED03ull * (stream + 1)));
        return r.next_u64();
    }

private:
    std::uint64_t state_;
};

}  // namespace scs
