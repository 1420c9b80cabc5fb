#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace drainwatch {

// Exit-code categories: 1 usage, 2 data, 3 training.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The burn/mint sentinel. Configurable at call sites; this is the default.
inline const std::string kNullAccount = "0x0000000000000000000000000000000000000000";

constexpr double kSecondsPerDay = 86400.0;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}
inline int64_t uniform_int(Rng& rng, int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}
inline double normal(Rng& rng, double mean, double std) {
    return std::normal_distribution<double>(mean, std)(rng);
}

}  // namespace drainwatch
