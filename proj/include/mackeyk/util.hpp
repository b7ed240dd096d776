#ifndef MACKEYK_UTIL_HPP
#define MACKEYK_UTIL_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mackeyk {

// Worker count resolution: explicit request > MACKEYK_THREADS env > hardware.
unsigned resolve_threads(unsigned requested);

// Runs fn(begin, end) on disjoint chunks of [0, n).  Results must be merged
// order-independently by the caller (atomic bitsets, per-chunk buffers).
void parallel_for(std::uint64_t n, unsigned threads,
                  const std::function<void(std::uint64_t, std::uint64_t)>& fn);

// Fixed-size bitset writable from several workers at once.
class AtomicBitset {
public:
    explicit AtomicBitset(std::uint64_t bits);
    std::uint64_t size() const { return bits_; }
    bool test(std::uint64_t i) const;
    void set(std::uint64_t i);
    std::uint64_t count() const;
    std::vector<std::uint64_t> to_indices() const; // ascending

private:
    std::uint64_t bits_;
    std::vector<std::atomic<std::uint64_t>> words_;
};

// FNV-1a, used for artifact hashes in reports.
std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

// base^exp as u64; throws ConfigError on overflow.
std::uint64_t checked_pow(std::uint64_t base, std::uint32_t exp);

} // namespace mackeyk

#endif
