#include "thp/tlb.hpp"

#include <bit>
#include <charconv>
#include <chrono>
#include <istream>
#include <list>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "thp/alloc.hpp"
#include "thp/perf.hpp"

#if defined(__linux__)
#include <sched.h>
#endif

namespace thp::tlb {

namespace {

void require_page_size(std::uint64_t page_size) {
    if (page_size == 0 || !std::has_single_bit(page_size))
        throw std::invalid_argument("page_size must be a power of two");
}

}  // namespace

std::uint64_t pages_touched(const AccessTrace& trace, std::uint64_t page_size) {
    require_page_size(page_size);
    const unsigned shift = static_cast<unsigned>(std::countr_zero(page_size));
    std::unordered_set<std::uint64_t> pages;
    pages.reserve(trace.size());
    for (const std::uint64_t addr : trace) pages.insert(addr >> shift);
    return pages.size();
}

SimResult simulate(const AccessTrace& trace, const TlbModel& model) {
    require_page_size(model.page_size);
    if (model.entries < 1) throw std::invalid_argument("entries must be >= 1");
    const unsigned shift = static_cast<unsigned>(std::countr_zero(model.page_size));

    SimResult result;
    std::list<std::uint64_t> lru;  // front = most recently used
    std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> resident;
    std::unordered_set<std::uint64_t> ever_seen;

    for (const std::uint64_t addr : trace) {
        const std::uint64_t page = addr >> shift;
        const auto it = resident.find(page);
        if (it != resident.end()) {
            ++result.hits;
            lru.splice(lru.begin(), lru, it->second);
        } else {
            ++result.misses;
            ever_seen.insert(page);
            if (resident.size() == model.entries) {
                resident.erase(lru.back());
                lru.pop_back();
            }
            lru.push_front(page);
            resident[page] = lru.begin();
        }
    }
    result.distinct_pages = ever_seen.size();
    return result;
}

std::vector<std::uint32_t> chase_cycle(std::uint64_t slot_count, std::uint64_t seed) {
    if (slot_count == 0) throw std::invalid_argument("slot_count must be positive");
    if (slot_count > 0xFFFFFFFFull) throw std::invalid_argument("slot_count too large");
    std::vector<std::uint32_t> cycle(slot_count);
    for (std::uint64_t i = 0; i < slot_count; ++i) cycle[i] = static_cast<std::uint32_t>(i);
    // Sattolo's shuffle: the result, read as i -> cycle[i], is one n-cycle,
    // so a chase visits every slot exactly once per lap.
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = slot_count - 1; i >= 1; --i) {
        std::uniform_int_distribution<std::uint64_t> pick(0, i - 1);
        std::swap(cycle[i], cycle[pick(rng)]);
    }
    return cycle;
}

AccessTrace gen_chase_trace(std::uint64_t footprint_bytes, std::uint64_t steps,
                            std::uint64_t seed) {
    if (footprint_bytes == 0) throw std::invalid_argument("footprint must be positive");
    const std::uint64_t slots = std::max<std::uint64_t>(1, footprint_bytes / 64);
    const auto cycle = chase_cycle(slots, seed);
    AccessTrace trace;
    trace.reserve(steps);
    std::uint32_t current = 0;
    for (std::uint64_t s = 0; s < steps; ++s) {
        trace.push_back(std::uint64_t{current} * 64);
        current = cycle[current];
    }
    return trace;
}

AccessTrace read_trace(std::istream& in) {
    AccessTrace trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r") + 1;
        std::uint64_t addr = 0;
        const auto* first = line.data() + begin;
        const auto* last = line.data() + end;
        const auto [ptr, ec] = std::from_chars(first, last, addr);
        if (ec != std::errc{} || ptr != last)
            throw std::runtime_error("trace line " + std::to_string(line_no) +
                                     ": expected a decimal address");
        trace.push_back(addr);
    }
    return trace;
}

void write_trace(const AccessTrace& trace, std::ostream& out) {
    for (const std::uint64_t addr : trace) out << addr << '\n';
}

namespace {

struct ChaseNode {
    ChaseNode* next;
    char pad[64 - sizeof(ChaseNode*)];
};
static_assert(sizeof(ChaseNode) == 64);

void pin_to_current_cpu() {
#if defined(__linux__)
    const int cpu = ::sched_getcpu();
    if (cpu < 0) return;
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(cpu, &set);
    ::sched_setaffinity(0, sizeof(set), &set);  // best effort
#endif
}

}  // namespace

ChaseResult run_chase_live(std::uint64_t footprint_bytes, std::uint64_t steps,
                           std::uint64_t seed, ChaseAllocator which) {
    if (footprint_bytes == 0) throw std::invalid_argument("footprint must be positive");
    const std::uint64_t slots = std::max<std::uint64_t>(1, footprint_bytes / 64);

    alloc::AllocConfig config;
    config.enabled = which == ChaseAllocator::HugePage;
    alloc::HugePageAllocator allocator(config);

    auto* nodes = static_cast<ChaseNode*>(allocator.alloc(slots * sizeof(ChaseNode)));
    const auto cycle = chase_cycle(slots, seed);
    for (std::uint64_t i = 0; i < slots; ++i) nodes[i].next = &nodes[cycle[i]];

    pin_to_current_cpu();

    ChaseResult result;
    result.accesses = steps;
    result.advised_bytes = allocator.snapshot().advised_bytes;
    result.anon_huge_bytes = alloc::anon_huge_bytes();

    auto counter = metrics::DtlbLoadMissCounter::open(0, false, false);
    if (counter) counter->enable();

    const auto start = std::chrono::steady_clock::now();
    ChaseNode* p = nodes;
    for (std::uint64_t s = 0; s < steps; ++s) p = p->next;
    asm volatile("" : "+r"(p));  // the chain must not be elided
    const auto stop = std::chrono::steady_clock::now();

    if (counter) {
        counter->disable();
        result.dtlb_load_misses = counter->read();
    }
    result.seconds = std::chrono::duration<double>(stop - start).count();
    result.checksum = reinterpret_cast<std::uint64_t>(p);
    allocator.free(nodes);
    return result;
}

}  // namespace thp::tlb
