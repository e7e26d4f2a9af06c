#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>
#include <unordered_set>

#include "thp/tlb.hpp"

using namespace thp::tlb;

namespace {

// Stack-distance LRU oracle: an access hits iff the number of distinct pages
// seen since the previous access to its page is below the entry count.
SimResult simulate_reference(const AccessTrace& trace, const TlbModel& model) {
    SimResult r;
    std::vector<std::uint64_t> pages;
    pages.reserve(trace.size());
    for (const auto addr : trace) pages.push_back(addr / model.page_size);
    std::unordered_set<std::uint64_t> distinct_all(pages.begin(), pages.end());
    r.distinct_pages = distinct_all.size();
    for (std::size_t i = 0; i < pages.size(); ++i) {
        std::size_t last = i;
        bool seen_before = false;
        for (std::size_t k = i; k-- > 0;) {
            if (pages[k] == pages[i]) {
                last = k;
                seen_before = true;
                break;
            }
        }
        if (!seen_before) {
            ++r.misses;
            continue;
        }
        std::unordered_set<std::uint64_t> between;
        for (std::size_t k = last + 1; k < i; ++k) between.insert(pages[k]);
        if (between.size() < model.entries) ++r.hits;
        else ++r.misses;
    }
    return r;
}

// Seven small pages spread over three large-page extents, with page 0 reused
// after four other pages went through a 4-entry TLB.
AccessTrace locality_trace(std::uint64_t small_page) {
    const auto page = [small_page](std::uint64_t small_index) {
        return small_index * small_page;
    };
    return {page(0), page(1), page(512), page(513), page(514),
            page(0), page(1024), page(1025)};
}

AccessTrace random_trace(std::mt19937_64& rng, std::size_t max_len = 60) {
    AccessTrace t(rng() % max_len);
    for (auto& addr : t) addr = rng() % 100000;
    return t;
}

}  // namespace

TEST_CASE("pages_touched counts distinct page indices") {
    CHECK(pages_touched({0, 5000, 1000000}, 4096) == 3);  // pages 0, 1, 244
    CHECK(pages_touched({}, 4096) == 0);
    CHECK(pages_touched({5, 6, 7}, 1) == 3);
    CHECK_THROWS_AS(pages_touched({1}, 3), std::invalid_argument);
    CHECK_THROWS_AS(pages_touched({1}, 0), std::invalid_argument);
}

TEST_CASE("the constructed locality trace needs 7 small pages but 3 large ones") {
    const std::uint64_t small = 4096;
    const auto trace = locality_trace(small);
    CHECK(pages_touched(trace, small) == 7);
    CHECK(pages_touched(trace, small * 512) == 3);
}

TEST_CASE("a 4-entry TLB evicts the first page before its reuse at the small size") {
    const std::uint64_t small = 4096;
    const auto trace = locality_trace(small);

    const auto small_run = simulate(trace, {4, small});
    CHECK(small_run.misses == 8);  // page 0 misses twice: evicted before reuse
    CHECK(small_run.hits == 0);
    CHECK(small_run.distinct_pages == 7);

    const auto large_run = simulate(trace, {4, small * 512});
    CHECK(large_run.misses == 3);  // page 0's extent is still resident at reuse
    CHECK(large_run.hits == 5);
    CHECK(large_run.distinct_pages == 3);
}

TEST_CASE("LRU eviction on the five-page example") {
    const AccessTrace trace = {0, 1, 2, 3, 4, 0};
    const auto result = simulate(trace, {4, 1});
    CHECK(result.misses == 6);
    CHECK(result.hits == 0);
}

TEST_CASE("one shared page leaves a single cold miss") {
    const AccessTrace trace = {0, 8, 16, 24, 32};
    const auto result = simulate(trace, {4, 64});
    CHECK(result.misses == 1);
    CHECK(result.hits == 4);
    CHECK(result.distinct_pages == 1);
}

TEST_CASE("with enough entries only cold misses remain") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const auto trace = random_trace(rng);
        const auto result = simulate(trace, {SIZE_MAX, 4096});
        CHECK(result.misses == pages_touched(trace, 4096));
        CHECK(result.hits + result.misses == trace.size());
    }
}

TEST_CASE("simulate agrees with the stack-distance oracle") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 300; ++i) {
        const auto trace = random_trace(rng);
        const TlbModel model{1 + rng() % 8, std::uint64_t{1} << (rng() % 14)};
        const auto fast = simulate(trace, model);
        const auto slow = simulate_reference(trace, model);
        CHECK(fast.misses == slow.misses);
        CHECK(fast.hits == slow.hits);
        CHECK(fast.distinct_pages == slow.distinct_pages);
        CHECK(fast.distinct_pages <= fast.misses);
    }
}

TEST_CASE("nested page sizes: bigger pages never touch more or miss more") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 400; ++i) {
        const auto trace = random_trace(rng);
        const std::uint64_t small = std::uint64_t{1} << (rng() % 10);
        const std::uint64_t big = small << (1 + rng() % 6);
        CHECK(pages_touched(trace, big) <= pages_touched(trace, small));

        const std::size_t entries = 1 + rng() % 6;
        CHECK(simulate(trace, {entries, big}).misses <= simulate(trace, {entries, small}).misses);
    }
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(simulate({1, 2}, {0, 4096}), std::invalid_argument);
    CHECK_THROWS_AS(simulate({1, 2}, {4, 100}), std::invalid_argument);
}

TEST_CASE("chase traces are deterministic per seed and cover the footprint") {
    const auto a = gen_chase_trace(64 * 1024, 1024, 7);
    const auto b = gen_chase_trace(64 * 1024, 1024, 7);
    CHECK(a == b);
    const auto c = gen_chase_trace(64 * 1024, 1024, 8);
    CHECK(a != c);

    // 64 KiB footprint, 4 KiB pages: a full lap touches all 16 pages.
    CHECK(pages_touched(a, 4096) == 16);

    CHECK(gen_chase_trace(64 * 1024, 0, 7).empty());
    CHECK_THROWS_AS(gen_chase_trace(0, 10, 7), std::invalid_argument);
}

TEST_CASE("the chase permutation is one full cycle") {
    for (const std::uint64_t slots : {1ull, 2ull, 5ull, 64ull, 1000ull}) {
        const auto cycle = chase_cycle(slots, 11);
        std::uint32_t current = 0;
        std::unordered_set<std::uint32_t> visited;
        for (std::uint64_t s = 0; s < slots; ++s) {
            CHECK(visited.insert(current).second);
            current = cycle[current];
        }
        CHECK(current == 0);  // back at the start after exactly `slots` steps
        CHECK(visited.size() == slots);
    }
}

TEST_CASE("trace files round-trip and tolerate comments") {
    const AccessTrace trace = {0, 4096, 123456789};
    std::ostringstream out;
    write_trace(trace, out);
    std::istringstream in("# header comment\n" + out.str() + "\n   \n42 # trailing\n");
    const auto parsed = read_trace(in);
    CHECK(parsed == AccessTrace{0, 4096, 123456789, 42});

    std::istringstream bad("12\nnope\n");
    CHECK_THROWS(read_trace(bad));
}

TEST_CASE("run_chase_live executes the requested number of accesses") {
    const auto result = run_chase_live(1 << 20, 200000, 5, ChaseAllocator::Baseline);
    CHECK(result.accesses == 200000);
    CHECK(result.seconds >= 0);
    CHECK(result.checksum != 0);
    CHECK(result.advised_bytes == 0);  // baseline path never advises

    const auto idle = run_chase_live(1 << 20, 0, 5, ChaseAllocator::Baseline);
    CHECK(idle.accesses == 0);
    CHECK(idle.seconds < 0.5);

    const auto huge = run_chase_live(4 << 20, 1000, 5, ChaseAllocator::HugePage);
    // Either the kernel accepted the advice (advised covers the buffer) or the
    // platform fell back; both leave the chase usable.
    if (huge.advised_bytes > 0) CHECK(huge.advised_bytes >= (4u << 20));
    CHECK(huge.accesses == 1000);
}
