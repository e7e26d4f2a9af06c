#include "thp/metrics.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "thp/perf.hpp"

#if defined(__unix__) || defined(__APPLE__)
#include <fcntl.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>
#endif

extern char** environ;

namespace thp::metrics {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Sat: return "sat";
        case Verdict::Unsat: return "unsat";
        case Verdict::Unknown: return "unknown";
        case Verdict::Timeout: return "timeout";
        case Verdict::Memout: return "memout";
    }
    return "?";
}

std::optional<Verdict> verdict_from_string(const std::string& s) {
    if (s == "sat") return Verdict::Sat;
    if (s == "unsat") return Verdict::Unsat;
    if (s == "unknown") return Verdict::Unknown;
    if (s == "timeout") return Verdict::Timeout;
    if (s == "memout") return Verdict::Memout;
    return std::nullopt;
}

double saved_runtime_pct(double t_n, double t_thp) {
    if (!(t_n > 0)) throw std::invalid_argument("saved_runtime_pct: t_n must be positive");
    return 100.0 * (1.0 - t_thp / t_n);
}

double tlb_miss_ratio_pct(double tlb_n, double tlb_thp) {
    if (!(tlb_n > 0)) throw std::invalid_argument("tlb_miss_ratio_pct: tlb_n must be positive");
    return 100.0 * tlb_thp / tlb_n;
}

namespace {

struct VariantCell {
    bool present = false;
    bool all_solved = true;
    std::size_t runs = 0;
    double wall_sum = 0;
    bool tlb_complete = true;
    double tlb_sum = 0;

    bool solved() const { return present && all_solved; }
    double mean_wall() const { return wall_sum / static_cast<double>(runs); }
    double mean_tlb() const { return tlb_sum / static_cast<double>(runs); }
};

}  // namespace

ComparisonRow comparison_row(const std::string& solver, std::span<const RunRecord> records) {
    // std::map keeps aggregation order independent of the input permutation.
    std::map<std::string, std::array<VariantCell, 2>> by_instance;
    for (const RunRecord& r : records) {
        if (r.solver != solver) continue;
        VariantCell& cell = by_instance[r.instance][r.thp ? 1 : 0];
        cell.present = true;
        cell.all_solved = cell.all_solved && r.solved();
        ++cell.runs;
        cell.wall_sum += r.counters.wall_s;
        if (r.counters.dtlb_load_misses) {
            cell.tlb_sum += static_cast<double>(*r.counters.dtlb_load_misses);
        } else {
            cell.tlb_complete = false;
        }
    }

    ComparisonRow row;
    row.solver = solver;
    double t_n_s = 0;
    double t_thp_s = 0;
    bool tlb_ok = true;
    for (const auto& [instance, cells] : by_instance) {
        const VariantCell& off = cells[0];
        const VariantCell& on = cells[1];
        if (!off.present || !on.present) continue;  // unpaired, e.g. interrupted suite
        if (off.solved() && on.solved()) {
            ++row.solved_both;
            t_n_s += off.mean_wall();
            t_thp_s += on.mean_wall();
            if (off.tlb_complete && on.tlb_complete) {
                row.tlb_n += off.mean_tlb();
                row.tlb_thp += on.mean_tlb();
            } else {
                tlb_ok = false;
            }
        } else if (on.solved() && !off.solved()) {
            ++row.gained;
        } else if (off.solved() && !on.solved()) {
            ++row.lost;
        }
    }

    if (row.solved_both == 0) {
        row.empty = true;
        return row;
    }
    row.t_n_hours = t_n_s / 3600.0;
    row.t_thp_hours = t_thp_s / 3600.0;
    row.s_pct = saved_runtime_pct(t_n_s, t_thp_s);
    row.tlb_available = tlb_ok && row.tlb_n > 0;
    if (row.tlb_available) row.r_tlb_pct = tlb_miss_ratio_pct(row.tlb_n, row.tlb_thp);
    return row;
}

std::map<std::string, std::vector<double>> cactus_series(std::span<const RunRecord> records) {
    std::map<std::string, std::vector<double>> series;
    for (const RunRecord& r : records) {
        if (!r.solved()) continue;
        series[r.solver + (r.thp ? "+thp" : "+nothp")].push_back(r.counters.wall_s);
    }
    for (auto& [key, values] : series) std::sort(values.begin(), values.end());
    return series;
}

// ----------------------------------------------------------------- measure

namespace {

#if defined(__unix__) || defined(__APPLE__)

std::uint64_t rss_bytes_of(pid_t pid) {
    char path[64];
    std::snprintf(path, sizeof(path), "/proc/%d/statm", static_cast<int>(pid));
    FILE* f = std::fopen(path, "r");
    if (f == nullptr) return 0;
    unsigned long long total = 0;
    unsigned long long resident = 0;
    const int got = std::fscanf(f, "%llu %llu", &total, &resident);
    std::fclose(f);
    if (got != 2) return 0;
    return resident * static_cast<std::uint64_t>(::sysconf(_SC_PAGESIZE));
}

#endif

}  // namespace

MeasureResult measure(const std::vector<std::string>& argv, const Limits& limits,
                      const std::map<std::string, std::string>& env_overrides, int pin_cpu) {
    if (argv.empty()) throw std::invalid_argument("measure: empty command");
#if !defined(__unix__) && !defined(__APPLE__)
    throw std::runtime_error("measure: unsupported platform");
#else
    MeasureResult result;

    // Full environment passthrough with overrides applied on top.
    std::map<std::string, std::string> merged;
    for (char** e = environ; *e != nullptr; ++e) {
        const std::string entry(*e);
        const auto eq = entry.find('=');
        if (eq != std::string::npos) merged[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
    for (const auto& [k, v] : env_overrides) merged[k] = v;
    for (const auto& [k, v] : merged) result.child_env.push_back(k + "=" + v);

    std::vector<char*> envp;
    envp.reserve(result.child_env.size() + 1);
    for (std::string& s : result.child_env) envp.push_back(s.data());
    envp.push_back(nullptr);

    std::vector<std::string> args = argv;
    std::vector<char*> argvp;
    argvp.reserve(args.size() + 1);
    for (std::string& s : args) argvp.push_back(s.data());
    argvp.push_back(nullptr);

    int sync_pipe[2];
    if (::pipe(sync_pipe) != 0) throw std::runtime_error("measure: pipe failed");
    FILE* err_file = std::tmpfile();
    if (err_file == nullptr) {
        ::close(sync_pipe[0]);
        ::close(sync_pipe[1]);
        throw std::runtime_error("measure: tmpfile failed");
    }

    const pid_t child = ::fork();
    if (child < 0) {
        ::close(sync_pipe[0]);
        ::close(sync_pipe[1]);
        std::fclose(err_file);
        throw std::runtime_error("measure: fork failed");
    }

    if (child == 0) {
        ::setpgid(0, 0);
#if defined(__linux__)
        if (pin_cpu >= 0) {
            cpu_set_t set;
            CPU_ZERO(&set);
            CPU_SET(pin_cpu, &set);
            ::sched_setaffinity(0, sizeof(set), &set);
        }
#endif
        struct rlimit no_core = {0, 0};
        ::setrlimit(RLIMIT_CORE, &no_core);
        const int devnull = ::open("/dev/null", O_WRONLY);
        if (devnull >= 0) ::dup2(devnull, STDOUT_FILENO);
        ::dup2(::fileno(err_file), STDERR_FILENO);
        ::close(sync_pipe[1]);
        char go = 0;
        while (::read(sync_pipe[0], &go, 1) < 0 && errno == EINTR) {
        }
        ::close(sync_pipe[0]);
        ::execvpe(argvp[0], argvp.data(), envp.data());
        ::dprintf(STDERR_FILENO, "exec failed: %s: %s\n", argvp[0], std::strerror(errno));
        ::_exit(127);
    }

    ::setpgid(child, child);  // both sides set it to close the race
    ::close(sync_pipe[0]);

    auto counter =
        DtlbLoadMissCounter::open(child, /*inherit=*/true, /*enable_on_exec=*/true);

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const char go = 'g';
    (void)!::write(sync_pipe[1], &go, 1);
    ::close(sync_pipe[1]);

    int status = 0;
    struct rusage usage = {};
    std::uint64_t sleep_us = 200;
    for (;;) {
        const pid_t reaped = ::wait4(child, &status, WNOHANG, &usage);
        if (reaped == child) break;
        const double elapsed = std::chrono::duration<double>(clock::now() - start).count();
        if (!result.timed_out && elapsed >= limits.timeout_s) {
            ::kill(-child, SIGKILL);
            ::kill(child, SIGKILL);
            result.timed_out = true;
        } else if (!result.memory_killed && limits.mem_limit_bytes > 0 &&
                   rss_bytes_of(child) > limits.mem_limit_bytes) {
            ::kill(-child, SIGKILL);
            ::kill(child, SIGKILL);
            result.memory_killed = true;
        }
        ::usleep(static_cast<useconds_t>(sleep_us));
        if (sleep_us < 2000) sleep_us += 200;
    }
    result.counters.wall_s = std::chrono::duration<double>(clock::now() - start).count();
    result.counters.max_rss_bytes = static_cast<std::uint64_t>(usage.ru_maxrss) * 1024;
    if (WIFEXITED(status)) {
        result.counters.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.counters.exit_code = 128 + WTERMSIG(status);
    } else {
        result.counters.exit_code = -1;
    }
    if (counter) result.counters.dtlb_load_misses = counter->read();

    // Keep the diagnostics small: the last 4 KiB of stderr.
    std::fflush(err_file);
    ::fseek(err_file, 0, SEEK_END);
    const long size = ::ftell(err_file);
    if (size > 0) {
        const long tail = std::min<long>(size, 4096);
        ::fseek(err_file, size - tail, SEEK_SET);
        result.stderr_tail.resize(static_cast<std::size_t>(tail));
        const std::size_t got =
            std::fread(result.stderr_tail.data(), 1, static_cast<std::size_t>(tail), err_file);
        result.stderr_tail.resize(got);
    }
    std::fclose(err_file);
    return result;
#endif
}

// --------------------------------------------------------------------- CSV

namespace {

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n") != std::string::npos;
}

std::string csv_escape(const std::string& field) {
    if (!needs_quoting(field)) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string format_wall(double wall_s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", wall_s);
    return buf;
}

}  // namespace

std::string record_to_csv_line(const RunRecord& r) {
    std::ostringstream out;
    out << csv_escape(r.instance) << ',' << csv_escape(r.solver) << ',' << (r.thp ? 1 : 0) << ','
        << to_string(r.verdict) << ',' << format_wall(r.counters.wall_s) << ',';
    if (r.counters.dtlb_load_misses) {
        out << *r.counters.dtlb_load_misses;
    } else {
        out << "NA";
    }
    out << ',' << r.counters.max_rss_bytes << ',' << r.counters.exit_code;
    return out.str();
}

void write_records_csv(std::ostream& out, std::span<const RunRecord> records) {
    out << kRecordsCsvHeader << '\n';
    for (const RunRecord& r : records) out << record_to_csv_line(r) << '\n';
}

std::vector<RunRecord> read_records_csv(std::istream& in) {
    std::vector<RunRecord> records;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("records CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRecordsCsvHeader) throw std::runtime_error("records CSV: unexpected header");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 8)
            throw std::runtime_error("records CSV line " + std::to_string(line_no) +
                                     ": expected 8 fields");
        RunRecord r;
        r.instance = fields[0];
        r.solver = fields[1];
        r.thp = fields[2] == "1";
        const auto verdict = verdict_from_string(fields[3]);
        if (!verdict)
            throw std::runtime_error("records CSV line " + std::to_string(line_no) +
                                     ": bad verdict '" + fields[3] + "'");
        r.verdict = *verdict;
        r.counters.wall_s = std::stod(fields[4]);
        if (fields[5] != "NA") r.counters.dtlb_load_misses = std::stoull(fields[5]);
        r.counters.max_rss_bytes = std::stoull(fields[6]);
        r.counters.exit_code = std::stoi(fields[7]);
        records.push_back(std::move(r));
    }
    return records;
}

// ----------------------------------------------------------------- reports

namespace {

std::string fmt_hours(double h) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", h);
    return buf;
}

std::string fmt_sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2E", v);
    return buf;
}

std::string fmt_pct(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string render_rows_markdown(std::span<const ComparisonRow> rows) {
    std::ostringstream out;
    out << "| solver | # | t_n | t_thp | s | TLB_n | TLB_thp | r_tlb |\n";
    out << "|---|---|---|---|---|---|---|---|\n";
    for (const ComparisonRow& row : rows) {
        out << "| " << row.solver << " | " << row.solved_both << " | ";
        if (row.empty) {
            out << "NA | NA | NA | NA | NA | NA |\n";
            continue;
        }
        out << fmt_hours(row.t_n_hours) << " | " << fmt_hours(row.t_thp_hours) << " | "
            << fmt_pct(row.s_pct) << " | ";
        if (row.tlb_available) {
            out << fmt_sci(row.tlb_n) << " | " << fmt_sci(row.tlb_thp) << " | "
                << fmt_pct(row.r_tlb_pct) << " |\n";
        } else {
            out << "NA | NA | NA |\n";
        }
    }
    out << '\n';
    for (const ComparisonRow& row : rows) {
        out << "- " << row.solver << ": gained=" << row.gained << " lost=" << row.lost << '\n';
    }
    return out.str();
}

std::string render_rows_csv(std::span<const ComparisonRow> rows) {
    std::ostringstream out;
    out << "solver,solved_both,t_n_hours,t_thp_hours,s_pct,tlb_n,tlb_thp,r_tlb_pct,gained,lost\n";
    for (const ComparisonRow& row : rows) {
        out << csv_escape(row.solver) << ',' << row.solved_both << ',';
        if (row.empty) {
            out << "NA,NA,NA,NA,NA,NA";
        } else {
            out << fmt_hours(row.t_n_hours) << ',' << fmt_hours(row.t_thp_hours) << ','
                << fmt_pct(row.s_pct) << ',';
            if (row.tlb_available) {
                out << fmt_sci(row.tlb_n) << ',' << fmt_sci(row.tlb_thp) << ','
                    << fmt_pct(row.r_tlb_pct);
            } else {
                out << "NA,NA,NA";
            }
        }
        out << ',' << row.gained << ',' << row.lost << '\n';
    }
    return out.str();
}

std::string render_cactus_csv(const std::vector<double>& series) {
    std::ostringstream out;
    out << "rank,seconds\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << (i + 1) << ',' << format_wall(series[i]) << '\n';
    }
    return out.str();
}

}  // namespace thp::metrics
