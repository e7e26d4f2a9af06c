#include "thp/perf.hpp"

#include <cstring>
#include <utility>

#if defined(__linux__)
#include <linux/perf_event.h>
#include <sys/ioctl.h>
#include <sys/syscall.h>
#include <unistd.h>
#endif

namespace thp::metrics {

std::optional<DtlbLoadMissCounter> DtlbLoadMissCounter::open(pid_t pid, bool inherit,
                                                             bool enable_on_exec) {
#if defined(__linux__)
    perf_event_attr attr;
    std::memset(&attr, 0, sizeof(attr));
    attr.type = PERF_TYPE_HW_CACHE;
    attr.size = sizeof(attr);
    attr.config = PERF_COUNT_HW_CACHE_DTLB | (PERF_COUNT_HW_CACHE_OP_READ << 8) |
                  (PERF_COUNT_HW_CACHE_RESULT_MISS << 16);
    attr.disabled = 1;
    attr.inherit = inherit ? 1 : 0;
    attr.enable_on_exec = enable_on_exec ? 1 : 0;
    attr.exclude_kernel = 1;
    attr.exclude_hv = 1;
    const long fd = ::syscall(SYS_perf_event_open, &attr, pid, -1, -1, 0);
    if (fd < 0) return std::nullopt;
    return DtlbLoadMissCounter(static_cast<int>(fd));
#else
    (void)pid;
    (void)inherit;
    (void)enable_on_exec;
    return std::nullopt;
#endif
}

DtlbLoadMissCounter::DtlbLoadMissCounter(DtlbLoadMissCounter&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)) {}

DtlbLoadMissCounter& DtlbLoadMissCounter::operator=(DtlbLoadMissCounter&& other) noexcept {
    if (this != &other) {
        this->~DtlbLoadMissCounter();
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

DtlbLoadMissCounter::~DtlbLoadMissCounter() {
#if defined(__linux__)
    if (fd_ >= 0) ::close(fd_);
#endif
}

bool DtlbLoadMissCounter::enable() {
#if defined(__linux__)
    if (fd_ < 0) return false;
    ::ioctl(fd_, PERF_EVENT_IOC_RESET, 0);
    return ::ioctl(fd_, PERF_EVENT_IOC_ENABLE, 0) == 0;
#else
    return false;
#endif
}

bool DtlbLoadMissCounter::disable() {
#if defined(__linux__)
    return fd_ >= 0 && ::ioctl(fd_, PERF_EVENT_IOC_DISABLE, 0) == 0;
#else
    return false;
#endif
}

std::optional<std::uint64_t> DtlbLoadMissCounter::read() const {
#if defined(__linux__)
    if (fd_ < 0) return std::nullopt;
    std::uint64_t value = 0;
    if (::read(fd_, &value, sizeof(value)) != sizeof(value)) return std::nullopt;
    return value;
#else
    return std::nullopt;
#endif
}

}  // namespace thp::metrics
