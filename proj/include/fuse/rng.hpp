#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "fuse/common.hpp"
#include "fuse/matrix.hpp"

namespace fuse {

// Deterministic random source. The engine (mt19937_64) is fully specified by
// the standard, and all value transforms below are written out explicitly, so
// a given seed yields the same draw sequence on every platform. The standard
// library distributions are deliberately not used: their algorithms are
// implementation-defined.
class Rng {
public:
    // Tag recorded in model files so runs are attributable.
    static constexpr const char* kAlgorithm = "mt19937_64/box-muller";

    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Standard normal via Box-Muller; consumes exactly two uniforms per draw.
    double gaussian() {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double gaussian(double sigma) { return sigma * gaussian(); }

    // Unbiased integer in [0, n) by rejection on the modulo bias region.
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw parameter_error("Rng::bounded: n must be positive");
        std::uint64_t x, r;
        do {
            x = engine_();
            r = x % n;
        } while (x - r > UINT64_MAX - (n - 1));
        return r;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct elements of `pool`, drawn without replacement.
    std::vector<std::size_t> sample_without_replacement(const std::vector<std::size_t>& pool,
                                                        std::size_t k) {
        if (k > pool.size())
            throw contract_error("sample_without_replacement: k exceeds pool size");
        std::vector<std::size_t> copy = pool;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(bounded(copy.size() - i));
            std::swap(copy[i], copy[j]);
            out.push_back(copy[i]);
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

// n x d matrix of i.i.d. N(0, sigma^2) draws.
inline Matrix rng_gaussian(Rng& rng, std::size_t n, std::size_t d, double sigma) {
    if (!(sigma > 0.0)) throw parameter_error("rng_gaussian: sigma must be positive");
    Matrix m(n, d);
    for (double& v : m.data) v = rng.gaussian(sigma);
    return m;
}

}  // namespace fuse
