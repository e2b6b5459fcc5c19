#include "trackimpute/random.hpp"

#include <array>

namespace trackimpute {

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t a = mix64(seed);
    const std::uint64_t b = mix64(a ^ mix64(stream + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

double standard_normal(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    return normal(rng);
}

double open_uniform(Rng& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double u = 0.0;
    do {
        u = uniform(rng);
    } while (u <= 0.0);
    return u;
}

}  // namespace trackimpute
