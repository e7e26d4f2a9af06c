// Analytical page/TLB model plus a live pointer-chase microbenchmark.
//
// pages_touched and the LRU simulator capture the page-coverage argument:
// with a fixed entry budget, larger pages cover the same access sequence with
// fewer translations, so misses can only go down when the page size grows by
// an integer factor.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace thp::tlb {

// Byte addresses in access order; need not be sorted or distinct.
using AccessTrace = std::vector<std::uint64_t>;

struct TlbModel {
    std::size_t entries = 1;          // >= 1; SIZE_MAX behaves as unbounded
    std::uint64_t page_size = 4096;   // power of two
};

struct SimResult {
    std::uint64_t distinct_pages = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
};

// Number of distinct addr / page_size values. page_size must be a power of two.
std::uint64_t pages_touched(const AccessTrace& trace, std::uint64_t page_size);

// LRU translation-cache simulation: an access hits iff its page is resident;
// on a miss with a full cache the least-recently-used entry is evicted.
SimResult simulate(const AccessTrace& trace, const TlbModel& model);

// Single-cycle random permutation over footprint/64 cache-line slots
// (Sattolo), deterministic per seed. Index i chases to cycle[i].
std::vector<std::uint32_t> chase_cycle(std::uint64_t slot_count, std::uint64_t seed);

// Addresses a pointer chase over the given footprint would touch, starting at
// slot 0, for `steps` accesses. Every slot is visited at most once per cycle.
AccessTrace gen_chase_trace(std::uint64_t footprint_bytes, std::uint64_t steps,
                            std::uint64_t seed);

// Trace files: one decimal address per line, '#' starts a comment.
AccessTrace read_trace(std::istream& in);
void write_trace(const AccessTrace& trace, std::ostream& out);

enum class ChaseAllocator { HugePage, Baseline };

struct ChaseResult {
    double seconds = 0;
    std::uint64_t accesses = 0;
    std::optional<std::uint64_t> dtlb_load_misses;  // unavailable on perf-less hosts
    std::uint64_t advised_bytes = 0;   // allocator diagnostics while the buffer was live
    std::uint64_t anon_huge_bytes = 0; // kernel page accounting while the buffer was live
    std::uint64_t checksum = 0;        // final pointer value, keeps the chase honest
};

// Materializes the chase in real memory from the chosen allocation path and
// executes it pinned to one CPU. Counters degrade to a time-only result.
ChaseResult run_chase_live(std::uint64_t footprint_bytes, std::uint64_t steps,
                           std::uint64_t seed, ChaseAllocator which);

}  // namespace thp::tlb
