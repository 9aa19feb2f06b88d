#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sequest {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// State lies outside the model's declared domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// update_statistic called on a state already at the truncation horizon.
class HorizonError : public Error {
public:
    using Error::Error;
};

/// A density row has nonpositive total mass and cannot be renormalized.
class DegenerateDensityError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ArtifactError : public Error {
public:
    using Error::Error;
};

inline unsigned default_thread_count() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : n;
}

/// Runs body(begin, end) over contiguous shards of [0, count).
/// Shard boundaries depend only on (count, threads), never on scheduling.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    if (threads == 0) threads = default_thread_count();
    if (count == 0) return;
    if (threads <= 1 || count < 2 * threads) {
        body(0, count);
        return;
    }
    const std::size_t chunk = (count + threads - 1) / threads;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(threads);
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = t * chunk;
        if (b >= count) break;
        const std::size_t e = std::min(count, b + chunk);
        pool.emplace_back([&body, &errs, t, b, e]() {
            try {
                body(b, e);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errs)
        if (err) std::rethrow_exception(err);
}

// exp/log replacements for quadrature-heavy inner loops. Branch-free on the
// common path so the surrounding loops vectorize; accuracy is a few ulp
// (tested against the libm versions).

inline double fast_exp(double x) {
    if (x > 709.0) return std::numeric_limits<double>::infinity();
    if (x < -700.0) return x < -746.0 ? 0.0 : std::exp(x);
    constexpr double log2e = 1.4426950408889634074;
    constexpr double ln2_hi = 6.93147180369123816490e-01;
    constexpr double ln2_lo = 1.90821492927058770002e-10;
    const double fk = std::floor(x * log2e + 0.5);
    const double r = (x - fk * ln2_hi) - fk * ln2_lo;
    // Taylor to degree 13; |r| <= ln2/2 keeps the truncation below 1 ulp.
    double p = 1.0 / 6227020800.0;
    p = p * r + 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    const auto k = static_cast<std::int64_t>(fk);
    std::uint64_t bits = static_cast<std::uint64_t>(1023 + k) << 52;
    double scale;
    std::memcpy(&scale, &bits, sizeof scale);
    return p * scale;
}

inline double fast_log(double x) {
    if (!(x > 0.0))
        return x == 0.0 ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::quiet_NaN();
    if (x < 2.3e-308 || !std::isfinite(x)) return std::log(x);
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    std::int64_t e = static_cast<std::int64_t>(bits >> 52) - 1023;
    bits = (bits & 0x000FFFFFFFFFFFFFULL) | 0x3FF0000000000000ULL;
    double m;
    std::memcpy(&m, &bits, sizeof m);
    if (m > 1.4142135623730951) {
        m *= 0.5;
        e += 1;
    }
    const double s = (m - 1.0) / (m + 1.0);
    const double z = s * s;
    // atanh series; |s| <= 0.1716 so ten odd terms reach full precision.
    double p = 1.0 / 19.0;
    p = p * z + 1.0 / 17.0;
    p = p * z + 1.0 / 15.0;
    p = p * z + 1.0 / 13.0;
    p = p * z + 1.0 / 11.0;
    p = p * z + 1.0 / 9.0;
    p = p * z + 1.0 / 7.0;
    p = p * z + 1.0 / 5.0;
    p = p * z + 1.0 / 3.0;
    p = p * z + 1.0;
    const double lm = 2.0 * s * p;
    constexpr double ln2_hi = 6.93147180369123816490e-01;
    constexpr double ln2_lo = 1.90821492927058770002e-10;
    const double ed = static_cast<double>(e);
    return ed * ln2_hi + (ed * ln2_lo + lm);
}

/// log(sum exp(v)) with the usual max shift; -inf inputs are allowed.
inline double log_sum_exp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

}  // namespace sequest
