// Thin wrapper over the kernel performance-counter interface for the single
// event this project cares about: data-TLB load misses.

#pragma once

#include <cstdint>
#include <optional>

#include <sys/types.h>

namespace thp::metrics {

class DtlbLoadMissCounter {
  public:
    // pid 0 counts the calling process/thread; a child pid with
    // enable_on_exec starts counting when the child calls exec. inherit
    // extends counting to the target's children. Returns nullopt when the
    // host exposes no counters (permissions, kernel config, non-Linux).
    static std::optional<DtlbLoadMissCounter> open(pid_t pid, bool inherit,
                                                   bool enable_on_exec);

    DtlbLoadMissCounter(DtlbLoadMissCounter&& other) noexcept;
    DtlbLoadMissCounter& operator=(DtlbLoadMissCounter&& other) noexcept;
    DtlbLoadMissCounter(const DtlbLoadMissCounter&) = delete;
    DtlbLoadMissCounter& operator=(const DtlbLoadMissCounter&) = delete;
    ~DtlbLoadMissCounter();

    bool enable();
    bool disable();
    std::optional<std::uint64_t> read() const;

  private:
    explicit DtlbLoadMissCounter(int fd) : fd_(fd) {}
    int fd_ = -1;
};

}  // namespace thp::metrics
