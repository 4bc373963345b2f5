#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace collabjudge {

// Seeded generator with a fixed algorithm (xoshiro256**, seeded through
// splitmix64) and hand-written distributions, so a given seed yields the same
// stream on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    bool bernoulli(double p) { return uniform() < p; }
    double normal(double mean = 0.0, double stddev = 1.0);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Stable 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s);

// Folds a sequence of words into one seed; order-sensitive.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words);

}  // namespace collabjudge
