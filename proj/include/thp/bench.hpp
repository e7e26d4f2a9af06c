// Paired THP-on/THP-off benchmark orchestration: manifest parsing and
// validation, child execution under timeout and memory limits with RAM
// preloading, bounded parallelism with incremental CSV persistence (so
// interrupted suites resume), and Table-2-style report emission.
//
// Manifest format, line oriented:
//
//   # comment
//   name = mini
//   timeout_s = 60
//   mem_limit_bytes = 8589934592
//   max_parallel = 5
//   repetitions = 1
//   seed = 1
//   solver = insat: path/to/solve {instance} --stats-json {stats}
//   [instances]
//   cnf/first.cnf
//   cnf/second.cnf
//
// `solver` may repeat; the command template is whitespace-split (no shell),
// {instance} is required, {stats} expands to a per-run JSON path under the
// output directory. Instance paths are resolved relative to the manifest.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "thp/metrics.hpp"

namespace thp::bench {

struct SolverSpec {
    std::string id;
    std::string command_template;
};

struct SuiteManifest {
    std::string name = "suite";
    std::vector<SolverSpec> solvers;
    std::vector<std::string> instances;  // resolved paths
    double timeout_s = 900;
    std::uint64_t mem_limit_bytes = std::uint64_t{8} << 30;
    unsigned max_parallel = 5;
    unsigned repetitions = 1;
    std::uint64_t seed = 1;  // run-order shuffle
};

SuiteManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir);
SuiteManifest load_manifest(const std::filesystem::path& path);

// Exhaustive: every problem is listed, none aborts the scan.
std::vector<std::string> validate_manifest(const SuiteManifest& manifest);

struct EnvFingerprint {
    std::string kernel;
    std::string cpu_model;
    std::string system_thp;  // /sys/kernel/mm/transparent_hugepage/enabled or "unavailable"
};

EnvFingerprint collect_fingerprint();
std::string fingerprint_to_string(const EnvFingerprint& fp);

// Exact environment passed to a variant's child: full passthrough with only
// THP_ALWAYS differing between the two variants of a pair.
std::map<std::string, std::string> variant_env(bool thp);

struct PairResult {
    metrics::RunRecord off;
    metrics::RunRecord on;
    std::vector<std::string> env_off;  // captured child environments
    std::vector<std::string> env_on;
    std::string diagnostics_off;
    std::string diagnostics_on;
};

// Pre-reads the instance into memory, then runs the two variants back to back
// with identical arguments differing only in THP_ALWAYS.
PairResult run_pair(const std::string& instance, const SolverSpec& solver,
                    const SuiteManifest& manifest,
                    const std::filesystem::path& stats_dir = {});

struct SuiteProgress {
    std::size_t executed = 0;
    std::size_t skipped = 0;  // cells already present in records.csv
};

// Executes all (solver, instance, variant) cells, order randomized per
// repetition, at most max_parallel children at a time, each pinned to a
// distinct core where the OS permits. Appends to <out>/records.csv as results
// arrive; rerunning skips completed cells.
SuiteProgress run_suite(const SuiteManifest& manifest, const std::filesystem::path& out_dir);

struct SuiteReport {
    std::vector<metrics::RunRecord> records;
    std::vector<metrics::ComparisonRow> rows;
    std::string fingerprint;
};

SuiteReport build_report(const std::filesystem::path& out_dir);

enum class ReportFormat { Markdown, Csv };

// Writes report.md or report.csv plus cactus_<series>.csv files; returns the
// rendered table. Deterministic: re-emitting from the same records.csv is
// byte-identical.
std::string emit_report(const SuiteReport& report, const std::filesystem::path& out_dir,
                        ReportFormat format);

}  // namespace thp::bench
