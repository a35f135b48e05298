#pragma once

// Shared plumbing: seed derivation, RNG streams, extended-real arithmetic
// conventions and a small replicate farm that honours GIBBSBOX_THREADS.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gibbsbox {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Difference of extended reals with the convention inf - inf = 0, used when
// both a configuration and its extension are forbidden.
inline double ext_minus(double a, double b) {
    if (std::isinf(a) && std::isinf(b) && a > 0 && b > 0) return 0.0;
    return a - b;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive a child seed from a base seed and one or more stream tags, so chains,
// replicates and per-call quadrature draws never share a stream by accident.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    return splitmix64(base ^ splitmix64(tag + 0x71c67e4a9d3b5f21ULL));
}
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag1, std::uint64_t tag2) {
    return derive_seed(derive_seed(base, tag1), tag2);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    double uniform() {  // in [0,1)
        return (eng_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Poisson and normal via the standard library; deterministic per platform.
    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        std::poisson_distribution<long> d(mean);
        return d(eng_);
    }
    double normal(double mu = 0.0, double sigma = 1.0) {
        std::normal_distribution<double> d(mu, sigma);
        return d(eng_);
    }
    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        std::uniform_int_distribution<std::size_t> d(0, n - 1);
        return d(eng_);
    }
    bool bernoulli(double p) { return uniform() < p; }
    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

inline unsigned max_threads() {
    if (const char* env = std::getenv("GIBBSBOX_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Run fn(i) for i in [0,n) on up to max_threads() workers and collect results
// in index order, so output is independent of the scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    unsigned nt = std::min<std::size_t>(max_threads(), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += nt) out[i] = fn(i);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

struct GibbsboxError : std::runtime_error {
    explicit GibbsboxError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gibbsbox
