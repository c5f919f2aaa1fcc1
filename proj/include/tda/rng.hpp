#pragma once

#include <cstdint>
#include <random>

namespace tda {

using Rng = std::mt19937_64;

/// Independent generator for stream `stream` of a master seed. Streams are
/// keyed by (seed, stream) so results do not depend on execution order.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x7464u};
    return Rng(seq);
}

inline double std_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

/// Uniform on the open interval (0, 1).
inline double open_uniform(Rng& rng) {
    double u;
    do {
        u = std::generate_canonical<double, 53>(rng);
    } while (u <= 0.0 || u >= 1.0);
    return u;
}

} // namespace tda
