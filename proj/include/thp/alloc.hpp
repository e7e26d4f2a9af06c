// Huge-page-aware allocation front-end.
//
// When enabled via environment flag (THP_ALWAYS=1, alias GLIBC_THP_ALWAYS=1),
// large requests are served from dedicated anonymous reservations whose base
// and length are aligned to the huge-page size and which are advised to the
// kernel as huge-page eligible. Small requests are pooled into aligned,
// advised slabs. Advice failure is never fatal: the region stays usable with
// standard pages.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace thp::alloc {

inline constexpr std::size_t kDefaultHugePageSize = std::size_t{2} << 20;

// Policy read once at startup; immutable afterwards.
struct AllocConfig {
    bool enabled = false;
    std::size_t huge_page_size = kDefaultHugePageSize;  // power of two
    std::size_t threshold = kDefaultHugePageSize;       // >= 1; smaller requests go to slabs
};

// Environment contract: THP_ALWAYS / GLIBC_THP_ALWAYS ("1" enables, anything
// else disables), THP_PAGE_SIZE and THP_THRESHOLD in bytes. Malformed values
// fall back to the defaults above.
AllocConfig load_config(const std::map<std::string, std::string>& env);
AllocConfig load_config_from_process();

struct AlignedRequest {
    std::size_t size;       // rounded up to a huge-page multiple when eligible
    std::size_t alignment;  // huge_page_size when eligible, platform default otherwise
};

// size must be > 0.
AlignedRequest align_request(std::size_t size, const AllocConfig& config);

enum class AdviceState : std::uint8_t {
    Advised,     // kernel accepted the huge-page advice
    Skipped,     // policy disabled or request not eligible
    FallbackOk,  // advice unsupported or failed; standard pages in use
};
const char* to_string(AdviceState s);

enum class AdviceStatus : std::uint8_t { Ok, Unsupported, Error };

struct AdviceResult {
    AdviceStatus status = AdviceStatus::Unsupported;
    int error_code = 0;
};

// Injected so advice behavior is testable without a THP-capable kernel.
// advise() is only ever invoked on page-aligned ranges.
class Advisor {
  public:
    virtual ~Advisor() = default;
    virtual AdviceResult advise(void* base, std::size_t length) = 0;
};

// Production implementation: madvise(MADV_HUGEPAGE) on Linux, the
// always-unsupported stub elsewhere.
class MadviseAdvisor final : public Advisor {
  public:
    AdviceResult advise(void* base, std::size_t length) override;
};

// Test implementation: records every call and answers with a scripted result.
class RecordingAdvisor final : public Advisor {
  public:
    struct Call {
        const void* base;
        std::size_t length;
    };

    explicit RecordingAdvisor(AdviceStatus respond = AdviceStatus::Ok, int error_code = 0)
        : respond_(respond), error_code_(error_code) {}

    AdviceResult advise(void* base, std::size_t length) override;
    std::vector<Call> calls() const;
    std::size_t call_count() const;

  private:
    mutable std::mutex mu_;
    std::vector<Call> calls_;
    AdviceStatus respond_;
    int error_code_;
};

struct Region {
    void* base = nullptr;
    std::size_t length = 0;
    AdviceState advised = AdviceState::Skipped;
};

// Zero-initialized anonymous reservation honoring align_request. When the
// policy applies, the region is advised before it is first written.
// Reservation failure throws std::bad_alloc; advice failure does not throw.
Region reserve_region(std::size_t size, const AllocConfig& config, Advisor& advisor);

// Advised iff the advisor returned ok, FallbackOk on unsupported or hard
// error (both non-fatal), Skipped iff the policy is disabled.
AdviceState advise_region(Region& region, const AllocConfig& config, Advisor& advisor);

void release_region(Region& region);

struct AllocatorSnapshot {
    std::size_t region_count = 0;   // live regions, dedicated + slab
    std::size_t advised_bytes = 0;  // sum of lengths of Advised regions
    std::size_t fallback_count = 0; // regions tagged FallbackOk
    std::size_t advice_errors = 0;  // hard advisor errors (reported, non-fatal)
    std::size_t dedicated_regions = 0;
    std::size_t slab_regions = 0;
    std::size_t live_blocks = 0;
};

// Heap front-end. Thread-safe: alloc/free may be called concurrently.
//
// enabled=false is the baseline path: plain heap allocation behind a single
// conditional, no advice calls ever. enabled=true serves blocks >= threshold
// from dedicated aligned regions and smaller blocks from pooled slabs.
class HugePageAllocator {
  public:
    HugePageAllocator(AllocConfig config, std::unique_ptr<Advisor> advisor);
    explicit HugePageAllocator(AllocConfig config);
    ~HugePageAllocator();

    HugePageAllocator(const HugePageAllocator&) = delete;
    HugePageAllocator& operator=(const HugePageAllocator&) = delete;

    // size must be > 0. Memory contract matches malloc: uninitialized.
    void* alloc(std::size_t size);
    // Freeing a pointer this allocator did not hand out throws
    // std::invalid_argument (and asserts in debug builds).
    void free(void* block);

    const AllocConfig& config() const { return config_; }
    AllocatorSnapshot snapshot() const;
    std::vector<Region> regions() const;  // registry copy, for invariant checks

  private:
    struct SlabClass {
        std::vector<void*> free_blocks;
        std::byte* carve_pos = nullptr;
        std::byte* carve_end = nullptr;
    };
    struct BlockInfo {
        enum class Kind : std::uint8_t { Dedicated, Slab, Heap } kind;
        std::uint32_t size_class = 0;
        std::uint64_t region_id = 0;
    };

    std::uint32_t class_for(std::size_t size) const;
    void* slab_alloc(std::size_t size);
    Region make_slab_region();

    AllocConfig config_;
    std::unique_ptr<Advisor> advisor_;
    std::size_t slab_size_ = 0;

    mutable std::mutex mu_;
    std::uint64_t next_region_id_ = 1;
    std::unordered_map<std::uint64_t, Region> regions_;
    std::unordered_map<void*, BlockInfo> blocks_;
    std::vector<SlabClass> classes_;
    std::size_t advice_errors_ = 0;
    std::size_t slab_region_count_ = 0;
};

// Process-wide allocator: configured from the environment on first use,
// backed by the production advisor. The solver's clause arena draws from it.
HugePageAllocator& process_allocator();

// Sum of AnonHugePages over /proc/self/smaps, 0 when unavailable. Lets the
// harness cross-check advised bytes against kernel page accounting.
std::size_t anon_huge_bytes();

// Contents of the system THP mode file, e.g. "always [madvise] never".
// nullopt when the file does not exist.
std::optional<std::string> system_thp_mode();

}  // namespace thp::alloc
