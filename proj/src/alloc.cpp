#include "thp/alloc.hpp"

#include <bit>
#include <cassert>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <stdexcept>

#if defined(__linux__) || defined(__unix__) || defined(__APPLE__)
#define THP_HAVE_MMAP 1
#include <sys/mman.h>
#include <unistd.h>
#endif

extern char** environ;

namespace thp::alloc {

namespace {

constexpr std::size_t kMinBlock = 16;

std::optional<std::size_t> parse_bytes(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::size_t round_up(std::size_t size, std::size_t multiple) {
    return (size + multiple - 1) / multiple * multiple;
}

void* map_anonymous(std::size_t length) {
#if THP_HAVE_MMAP
    void* p = ::mmap(nullptr, length, PROT_READ | PROT_WRITE,
                     MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
    return p == MAP_FAILED ? nullptr : p;
#else
    (void)length;
    return nullptr;
#endif
}

void unmap(void* base, std::size_t length) {
#if THP_HAVE_MMAP
    if (base != nullptr && length > 0) ::munmap(base, length);
#else
    (void)base;
    (void)length;
#endif
}

// mmap only guarantees OS-page alignment; over-allocate and trim the
// misaligned head and tail to obtain a huge-page-aligned base.
void* map_aligned(std::size_t length, std::size_t alignment) {
#if THP_HAVE_MMAP
    const std::size_t padded = length + alignment;
    void* raw = map_anonymous(padded);
    if (raw == nullptr) return nullptr;
    const auto addr = reinterpret_cast<std::uintptr_t>(raw);
    const std::uintptr_t aligned = (addr + alignment - 1) & ~(std::uintptr_t{alignment} - 1);
    const std::size_t lead = aligned - addr;
    if (lead > 0) unmap(raw, lead);
    const std::size_t tail = padded - lead - length;
    if (tail > 0) unmap(reinterpret_cast<void*>(aligned + length), tail);
    return reinterpret_cast<void*>(aligned);
#else
    (void)length;
    (void)alignment;
    return nullptr;
#endif
}

}  // namespace

const char* to_string(AdviceState s) {
    switch (s) {
        case AdviceState::Advised: return "advised";
        case AdviceState::Skipped: return "skipped";
        case AdviceState::FallbackOk: return "fallback";
    }
    return "?";
}

AllocConfig load_config(const std::map<std::string, std::string>& env) {
    AllocConfig cfg;
    if (auto it = env.find("THP_ALWAYS"); it != env.end()) {
        cfg.enabled = it->second == "1";
    } else if (auto alias = env.find("GLIBC_THP_ALWAYS"); alias != env.end()) {
        cfg.enabled = alias->second == "1";
    }
    if (auto it = env.find("THP_PAGE_SIZE"); it != env.end()) {
        if (auto v = parse_bytes(it->second); v && *v > 0 && std::has_single_bit(*v))
            cfg.huge_page_size = *v;
    }
    if (auto it = env.find("THP_THRESHOLD"); it != env.end()) {
        if (auto v = parse_bytes(it->second); v && *v >= 1) cfg.threshold = *v;
    }
    return cfg;
}

AllocConfig load_config_from_process() {
    std::map<std::string, std::string> env;
    for (const char* name : {"THP_ALWAYS", "GLIBC_THP_ALWAYS", "THP_PAGE_SIZE", "THP_THRESHOLD"}) {
        if (const char* v = std::getenv(name)) env.emplace(name, v);
    }
    return load_config(env);
}

AlignedRequest align_request(std::size_t size, const AllocConfig& config) {
    if (size == 0) throw std::invalid_argument("align_request: size must be positive");
    if (config.enabled && size >= config.threshold) {
        return {round_up(size, config.huge_page_size), config.huge_page_size};
    }
    return {size, alignof(std::max_align_t)};
}

AdviceResult MadviseAdvisor::advise(void* base, std::size_t length) {
#if defined(__linux__) && defined(MADV_HUGEPAGE)
    assert(reinterpret_cast<std::uintptr_t>(base) % static_cast<std::size_t>(::sysconf(_SC_PAGESIZE)) == 0);
    if (::madvise(base, length, MADV_HUGEPAGE) == 0) return {AdviceStatus::Ok, 0};
    // EINVAL is what kernels without THP report for MADV_HUGEPAGE.
    if (errno == EINVAL) return {AdviceStatus::Unsupported, errno};
    return {AdviceStatus::Error, errno};
#else
    (void)base;
    (void)length;
    return {AdviceStatus::Unsupported, 0};
#endif
}

AdviceResult RecordingAdvisor::advise(void* base, std::size_t length) {
    std::lock_guard lock(mu_);
    calls_.push_back({base, length});
    return {respond_, respond_ == AdviceStatus::Ok ? 0 : error_code_};
}

std::vector<RecordingAdvisor::Call> RecordingAdvisor::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::size_t RecordingAdvisor::call_count() const {
    std::lock_guard lock(mu_);
    return calls_.size();
}

AdviceState advise_region(Region& region, const AllocConfig& config, Advisor& advisor) {
    if (!config.enabled) {
        region.advised = AdviceState::Skipped;
        return region.advised;
    }
    const AdviceResult result = advisor.advise(region.base, region.length);
    region.advised =
        result.status == AdviceStatus::Ok ? AdviceState::Advised : AdviceState::FallbackOk;
    return region.advised;
}

Region reserve_region(std::size_t size, const AllocConfig& config, Advisor& advisor) {
    if (size == 0) throw std::invalid_argument("reserve_region: size must be positive");
    const AlignedRequest req = align_request(size, config);
    const bool eligible = config.enabled && size >= config.threshold;

    void* base = eligible ? map_aligned(req.size, req.alignment) : map_anonymous(req.size);
    if (base == nullptr) throw std::bad_alloc();

    Region region{base, req.size, AdviceState::Skipped};
    if (eligible) advise_region(region, config, advisor);
    return region;
}

void release_region(Region& region) {
    unmap(region.base, region.length);
    region = Region{};
}

HugePageAllocator::HugePageAllocator(AllocConfig config, std::unique_ptr<Advisor> advisor)
    : config_(config), advisor_(std::move(advisor)) {
    if (!std::has_single_bit(config_.huge_page_size))
        throw std::invalid_argument("huge_page_size must be a power of two");
    if (config_.threshold < 1) throw std::invalid_argument("threshold must be >= 1");
    // Slabs must fit the largest sub-threshold size class.
    std::size_t largest_class = kMinBlock;
    if (config_.threshold > 1) largest_class = std::bit_ceil(config_.threshold - 1);
    slab_size_ = std::max(config_.huge_page_size, std::max(largest_class, kMinBlock));
    classes_.resize(std::bit_width(slab_size_));
}

HugePageAllocator::HugePageAllocator(AllocConfig config)
    : HugePageAllocator(config, std::make_unique<MadviseAdvisor>()) {}

HugePageAllocator::~HugePageAllocator() {
    for (auto& [ptr, info] : blocks_) {
        if (info.kind == BlockInfo::Kind::Heap) ::operator delete(ptr);
    }
    for (auto& [id, region] : regions_) release_region(region);
}

std::uint32_t HugePageAllocator::class_for(std::size_t size) const {
    const std::size_t rounded = std::bit_ceil(std::max(size, kMinBlock));
    return static_cast<std::uint32_t>(std::bit_width(rounded) - 1);
}

namespace {

// Forwards to the injected advisor while tallying hard errors.
class ErrorCountingAdvisor final : public Advisor {
  public:
    ErrorCountingAdvisor(Advisor& inner, std::size_t& errors) : inner_(inner), errors_(errors) {}
    AdviceResult advise(void* base, std::size_t length) override {
        const AdviceResult r = inner_.advise(base, length);
        if (r.status == AdviceStatus::Error) ++errors_;
        return r;
    }

  private:
    Advisor& inner_;
    std::size_t& errors_;
};

}  // namespace

Region HugePageAllocator::make_slab_region() {
    void* base = map_aligned(slab_size_, config_.huge_page_size);
    if (base == nullptr) throw std::bad_alloc();
    Region region{base, slab_size_, AdviceState::Skipped};
    ErrorCountingAdvisor counting(*advisor_, advice_errors_);
    advise_region(region, config_, counting);
    return region;
}

void* HugePageAllocator::slab_alloc(std::size_t size) {
    const std::uint32_t cls = class_for(size);
    SlabClass& sc = classes_[cls];
    if (!sc.free_blocks.empty()) {
        void* p = sc.free_blocks.back();
        sc.free_blocks.pop_back();
        blocks_[p] = {BlockInfo::Kind::Slab, cls, 0};
        return p;
    }
    const std::size_t block = std::size_t{1} << cls;
    if (sc.carve_pos == nullptr || sc.carve_pos + block > sc.carve_end) {
        Region region = make_slab_region();
        const std::uint64_t id = next_region_id_++;
        regions_.emplace(id, region);
        ++slab_region_count_;
        sc.carve_pos = static_cast<std::byte*>(region.base);
        sc.carve_end = sc.carve_pos + region.length;
    }
    void* p = sc.carve_pos;
    sc.carve_pos += block;
    blocks_[p] = {BlockInfo::Kind::Slab, cls, 0};
    return p;
}

void* HugePageAllocator::alloc(std::size_t size) {
    if (size == 0) throw std::invalid_argument("alloc: size must be positive");
    std::lock_guard lock(mu_);
    if (!config_.enabled) {
        // Baseline path: one conditional, then plain heap allocation.
        void* p = ::operator new(size);
        blocks_[p] = {BlockInfo::Kind::Heap, 0, 0};
        return p;
    }
    if (size >= config_.threshold) {
        ErrorCountingAdvisor counting(*advisor_, advice_errors_);
        Region region = reserve_region(size, config_, counting);
        const std::uint64_t id = next_region_id_++;
        regions_.emplace(id, region);
        blocks_[region.base] = {BlockInfo::Kind::Dedicated, 0, id};
        return region.base;
    }
    return slab_alloc(size);
}

void HugePageAllocator::free(void* block) {
    if (block == nullptr) return;
    std::lock_guard lock(mu_);
    auto it = blocks_.find(block);
    if (it == blocks_.end()) throw std::invalid_argument("free: unknown block");
    const BlockInfo info = it->second;
    blocks_.erase(it);
    switch (info.kind) {
        case BlockInfo::Kind::Heap:
            ::operator delete(block);
            break;
        case BlockInfo::Kind::Dedicated: {
            auto rit = regions_.find(info.region_id);
            assert(rit != regions_.end());
            release_region(rit->second);
            regions_.erase(rit);
            break;
        }
        case BlockInfo::Kind::Slab:
            classes_[info.size_class].free_blocks.push_back(block);
            break;
    }
}

AllocatorSnapshot HugePageAllocator::snapshot() const {
    std::lock_guard lock(mu_);
    AllocatorSnapshot snap;
    snap.region_count = regions_.size();
    snap.slab_regions = slab_region_count_;
    snap.dedicated_regions = regions_.size() - slab_region_count_;
    snap.live_blocks = blocks_.size();
    snap.advice_errors = advice_errors_;
    for (const auto& [id, region] : regions_) {
        if (region.advised == AdviceState::Advised) snap.advised_bytes += region.length;
        if (region.advised == AdviceState::FallbackOk) ++snap.fallback_count;
    }
    return snap;
}

std::vector<Region> HugePageAllocator::regions() const {
    std::lock_guard lock(mu_);
    std::vector<Region> out;
    out.reserve(regions_.size());
    for (const auto& [id, region] : regions_) out.push_back(region);
    return out;
}

HugePageAllocator& process_allocator() {
    static HugePageAllocator instance(load_config_from_process());
    return instance;
}

std::size_t anon_huge_bytes() {
#if defined(__linux__)
    std::ifstream smaps("/proc/self/smaps");
    if (!smaps) return 0;
    std::size_t total_kb = 0;
    std::string line;
    while (std::getline(smaps, line)) {
        if (line.rfind("AnonHugePages:", 0) == 0) {
            std::istringstream fields(line.substr(14));
            std::size_t kb = 0;
            fields >> kb;
            total_kb += kb;
        }
    }
    return total_kb * 1024;
#else
    return 0;
#endif
}

std::optional<std::string> system_thp_mode() {
#if defined(__linux__)
    std::ifstream f("/sys/kernel/mm/transparent_hugepage/enabled");
    if (!f) return std::nullopt;
    std::string mode;
    std::getline(f, mode);
    return mode;
#else
    return std::nullopt;
#endif
}

}  // namespace thp::alloc
