// Measurement and derived metrics: wall time and hardware counters for child
// processes, the saved-runtime and residual-TLB-miss percentages, comparison
// rows over paired THP-on/off runs, cactus series, and the CSV run-record
// format shared with the bench harness.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace thp::metrics {

struct PerfCounters {
    double wall_s = 0;
    std::optional<std::uint64_t> dtlb_load_misses;  // nullopt = counter unavailable
    std::uint64_t max_rss_bytes = 0;
    int exit_code = 0;  // 128 + signal for abnormal termination
};

enum class Verdict : std::uint8_t { Sat, Unsat, Unknown, Timeout, Memout };
const char* to_string(Verdict v);
std::optional<Verdict> verdict_from_string(const std::string& s);

struct RunRecord {
    std::string instance;
    std::string solver;
    bool thp = false;
    PerfCounters counters;
    Verdict verdict = Verdict::Unknown;

    bool solved() const { return verdict == Verdict::Sat || verdict == Verdict::Unsat; }
};

// Table-2-style per-solver summary, computed only over instances solved by
// both the THP and the non-THP variant.
struct ComparisonRow {
    std::string solver;
    std::size_t solved_both = 0;
    double t_n_hours = 0;
    double t_thp_hours = 0;
    double s_pct = 0;
    bool tlb_available = false;  // both variants reported counters
    double tlb_n = 0;
    double tlb_thp = 0;
    double r_tlb_pct = 0;
    std::size_t gained = 0;  // solved only with THP
    std::size_t lost = 0;    // solved only without THP
    bool empty = false;      // no commonly solved instance
};

// Percentage of runtime saved by THP: 100 * (1 - t_thp / t_n). Requires t_n > 0.
double saved_runtime_pct(double t_n, double t_thp);

// Residual TLB misses under THP as a percentage: 100 * tlb_thp / tlb_n.
// Requires tlb_n > 0.
double tlb_miss_ratio_pct(double tlb_n, double tlb_thp);

// Pairs records for one solver by instance, filters to instances solved under
// both variants, sums times and counters and applies the two formulas above.
// Wall times are converted to hours. Multiple repetitions of the same cell
// are averaged; a cell counts as solved only when all repetitions solved.
ComparisonRow comparison_row(const std::string& solver, std::span<const RunRecord> records);

// Solved-instance runtimes sorted ascending, keyed by "<solver>+thp" /
// "<solver>+nothp". Timeouts and other unsolved runs are excluded.
std::map<std::string, std::vector<double>> cactus_series(std::span<const RunRecord> records);

struct Limits {
    double timeout_s = 900;
    std::uint64_t mem_limit_bytes = std::uint64_t{8} << 30;
};

struct MeasureResult {
    PerfCounters counters;
    bool timed_out = false;       // the harness killed the child at the deadline
    bool memory_killed = false;   // the harness killed the child over the RSS limit
    std::string stderr_tail;      // captured diagnostics
    std::vector<std::string> child_env;  // exact environment passed to the child
};

// Launches argv[0] with the current environment plus overrides, enforcing the
// wall-clock timeout and the resident-set limit by polling and killing the
// child's process group. Wall time comes from a monotonic clock; the dTLB
// load-miss counter is attached where the OS permits and reported unavailable
// otherwise. pin_cpu >= 0 pins the child to that CPU (best effort).
MeasureResult measure(const std::vector<std::string>& argv, const Limits& limits,
                      const std::map<std::string, std::string>& env_overrides = {},
                      int pin_cpu = -1);

// Run records persist as CSV with this exact header; unavailable counters are
// written as "NA". Re-emitting parsed records is byte-identical.
inline constexpr const char* kRecordsCsvHeader =
    "instance,solver,thp,verdict,wall_s,dtlb_load_misses,max_rss_bytes,exit_code";

std::string record_to_csv_line(const RunRecord& record);
void write_records_csv(std::ostream& out, std::span<const RunRecord> records);
std::vector<RunRecord> read_records_csv(std::istream& in);

// Table rendering in Table 2's column order:
// solver, #, t_n, t_thp, s, TLB_n, TLB_thp, r_tlb (plus gained/lost tallies).
std::string render_rows_markdown(std::span<const ComparisonRow> rows);
std::string render_rows_csv(std::span<const ComparisonRow> rows);
std::string render_cactus_csv(const std::vector<double>& series);

}  // namespace thp::metrics
