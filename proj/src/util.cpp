#include "mackeyk/util.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <thread>

#include "mackeyk/errors.hpp"

namespace mackeyk {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MACKEYK_THREADS")) {
        long v = std::atol(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(std::uint64_t n, unsigned threads,
                  const std::function<void(std::uint64_t, std::uint64_t)>& fn) {
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2 * threads) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::uint64_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::uint64_t b = t * chunk;
        std::uint64_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

AtomicBitset::AtomicBitset(std::uint64_t bits)
    : bits_(bits), words_((bits + 63) / 64) {
    for (auto& w : words_) w.store(0, std::memory_order_relaxed);
}

bool AtomicBitset::test(std::uint64_t i) const {
    return (words_[i >> 6].load(std::memory_order_relaxed) >> (i & 63)) & 1u;
}

void AtomicBitset::set(std::uint64_t i) {
    words_[i >> 6].fetch_or(std::uint64_t(1) << (i & 63),
                            std::memory_order_relaxed);
}

std::uint64_t AtomicBitset::count() const {
    std::uint64_t c = 0;
    for (const auto& w : words_)
        c += std::popcount(w.load(std::memory_order_relaxed));
    return c;
}

std::vector<std::uint64_t> AtomicBitset::to_indices() const {
    std::vector<std::uint64_t> out;
    out.reserve(count());
    for (std::uint64_t i = 0; i < words_.size(); ++i) {
        std::uint64_t w = words_[i].load(std::memory_order_relaxed);
        while (w) {
            unsigned b = std::countr_zero(w);
            out.push_back(i * 64 + b);
            w &= w - 1;
        }
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

std::uint64_t checked_pow(std::uint64_t base, std::uint32_t exp) {
    std::uint64_t r = 1;
    for (std::uint32_t i = 0; i < exp; ++i) {
        if (base != 0 && r > UINT64_MAX / base)
            throw ConfigError("integer overflow in power computation");
        r *= base;
    }
    return r;
}

} // namespace mackeyk
