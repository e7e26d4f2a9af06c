#include "thp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "thp/alloc.hpp"

#if defined(__unix__) || defined(__APPLE__)
#include <sys/utsname.h>
#endif

namespace thp::bench {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool parse_u64(const std::string& text, std::uint64_t& out) {
    if (text.empty()) return false;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

bool parse_double(const std::string& text, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(text, &pos);
        return pos == text.size();
    } catch (const std::exception&) {
        return false;
    }
}

std::string sanitize(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
    }
    return out;
}

std::vector<std::string> expand_template(const std::string& command_template,
                                         const std::string& instance,
                                         const std::string& stats_path) {
    std::vector<std::string> argv;
    std::istringstream tokens(command_template);
    std::string token;
    while (tokens >> token) {
        for (const auto& [key, value] :
             {std::pair<std::string, const std::string&>{"{instance}", instance},
              std::pair<std::string, const std::string&>{"{stats}", stats_path}}) {
            std::size_t at = 0;
            while ((at = token.find(key, at)) != std::string::npos) {
                token.replace(at, key.size(), value);
                at += value.size();
            }
        }
        argv.push_back(token);
    }
    return argv;
}

metrics::Verdict classify(const metrics::MeasureResult& m, const metrics::Limits& limits) {
    if (m.timed_out || m.counters.wall_s >= limits.timeout_s) return metrics::Verdict::Timeout;
    if (m.memory_killed) return metrics::Verdict::Memout;
    switch (m.counters.exit_code) {
        case 10: return metrics::Verdict::Sat;
        case 20: return metrics::Verdict::Unsat;
        case 0: return metrics::Verdict::Unknown;
        default:
            // Crashed. A resident set close to the cap means the limit bit.
            if (limits.mem_limit_bytes > 0 &&
                static_cast<double>(m.counters.max_rss_bytes) >=
                    0.9 * static_cast<double>(limits.mem_limit_bytes))
                return metrics::Verdict::Memout;
            return metrics::Verdict::Unknown;
    }
}

// Warm the page cache so child timing excludes instance I/O.
void preload_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return;
    std::string buffer(1 << 20, '\0');
    std::uint64_t sum = 0;
    while (in.read(buffer.data(), static_cast<std::streamsize>(buffer.size())) ||
           in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i)
            sum += static_cast<unsigned char>(buffer[static_cast<std::size_t>(i)]);
        if (in.gcount() == 0) break;
    }
    volatile std::uint64_t keep = sum;
    (void)keep;
}

struct SingleRun {
    metrics::RunRecord record;
    std::vector<std::string> env;
    std::string diagnostics;
};

SingleRun execute_run(const std::string& instance, const SolverSpec& solver,
                      const SuiteManifest& manifest, bool thp, const std::string& stats_path,
                      int pin_cpu) {
    preload_instance(instance);
    const auto argv = expand_template(solver.command_template, instance, stats_path);
    metrics::Limits limits{manifest.timeout_s, manifest.mem_limit_bytes};
    auto measured = metrics::measure(argv, limits, variant_env(thp), pin_cpu);

    SingleRun run;
    run.record.instance = instance;
    run.record.solver = solver.id;
    run.record.thp = thp;
    run.record.counters = measured.counters;
    run.record.verdict = classify(measured, limits);
    run.env = std::move(measured.child_env);
    run.diagnostics = std::move(measured.stderr_tail);
    return run;
}

}  // namespace

std::map<std::string, std::string> variant_env(bool thp) {
    return {{"THP_ALWAYS", thp ? "1" : "0"}};
}

SuiteManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
    SuiteManifest manifest;
    enum class Section { Header, Instances } section = Section::Header;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t == "[instances]") {
            section = Section::Instances;
            continue;
        }
        if (t.front() == '[') {
            throw std::runtime_error("manifest: unknown section " + t);
        }
        if (section == Section::Instances) {
            manifest.instances.push_back((base_dir / t).string());
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("manifest: expected key = value, got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key == "name") {
            manifest.name = value;
        } else if (key == "timeout_s") {
            if (!parse_double(value, manifest.timeout_s)) manifest.timeout_s = -1;
        } else if (key == "mem_limit_bytes") {
            if (!parse_u64(value, manifest.mem_limit_bytes)) manifest.mem_limit_bytes = 0;
        } else if (key == "max_parallel") {
            std::uint64_t v = 0;
            manifest.max_parallel = parse_u64(value, v) ? static_cast<unsigned>(v) : 0;
        } else if (key == "repetitions") {
            std::uint64_t v = 0;
            manifest.repetitions = parse_u64(value, v) ? static_cast<unsigned>(v) : 0;
        } else if (key == "seed") {
            parse_u64(value, manifest.seed);
        } else if (key == "solver") {
            const auto colon = value.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("manifest: solver needs 'id: command', got '" + value +
                                         "'");
            manifest.solvers.push_back({trim(value.substr(0, colon)), trim(value.substr(colon + 1))});
        } else {
            throw std::runtime_error("manifest: unknown key '" + key + "'");
        }
    }
    return manifest;
}

SuiteManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest '" + path.string() + "'");
    return parse_manifest(in, path.parent_path());
}

std::vector<std::string> validate_manifest(const SuiteManifest& manifest) {
    std::vector<std::string> errors;
    if (manifest.solvers.empty()) errors.push_back("no solver defined");
    std::set<std::string> ids;
    for (const SolverSpec& s : manifest.solvers) {
        if (s.id.empty()) errors.push_back("solver with empty id");
        if (!ids.insert(s.id).second) errors.push_back("duplicate solver id '" + s.id + "'");
        if (s.command_template.find("{instance}") == std::string::npos)
            errors.push_back("solver '" + s.id + "' command lacks the {instance} placeholder");
    }
    if (!(manifest.timeout_s > 0)) errors.push_back("timeout_s must be positive");
    if (manifest.max_parallel < 1) errors.push_back("max_parallel must be >= 1");
    if (manifest.repetitions < 1) errors.push_back("repetitions must be >= 1");
    if (manifest.instances.empty()) errors.push_back("no instances listed");
    for (const std::string& path : manifest.instances) {
        if (!std::filesystem::exists(path)) errors.push_back("instance not found: " + path);
    }
    return errors;
}

EnvFingerprint collect_fingerprint() {
    EnvFingerprint fp;
#if defined(__unix__) || defined(__APPLE__)
    utsname uts = {};
    if (::uname(&uts) == 0) {
        fp.kernel = std::string(uts.sysname) + " " + uts.release;
    }
#endif
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) fp.cpu_model = trim(line.substr(colon + 1));
            break;
        }
    }
    if (fp.kernel.empty()) fp.kernel = "unknown";
    if (fp.cpu_model.empty()) fp.cpu_model = "unknown";
    fp.system_thp = alloc::system_thp_mode().value_or("unavailable");
    return fp;
}

std::string fingerprint_to_string(const EnvFingerprint& fp) {
    std::ostringstream out;
    out << "kernel: " << fp.kernel << '\n'
        << "cpu: " << fp.cpu_model << '\n'
        << "system_thp: " << fp.system_thp << '\n';
    return out.str();
}

PairResult run_pair(const std::string& instance, const SolverSpec& solver,
                    const SuiteManifest& manifest, const std::filesystem::path& stats_dir) {
    const auto stats_path = [&](bool thp) -> std::string {
        if (stats_dir.empty()) return "/dev/null";
        return (stats_dir / (sanitize(solver.id) + "__" +
                             sanitize(std::filesystem::path(instance).filename().string()) +
                             (thp ? "__thp.json" : "__nothp.json")))
            .string();
    };
    PairResult pair;
    SingleRun off = execute_run(instance, solver, manifest, false, stats_path(false), -1);
    SingleRun on = execute_run(instance, solver, manifest, true, stats_path(true), -1);
    pair.off = std::move(off.record);
    pair.on = std::move(on.record);
    pair.env_off = std::move(off.env);
    pair.env_on = std::move(on.env);
    pair.diagnostics_off = std::move(off.diagnostics);
    pair.diagnostics_on = std::move(on.diagnostics);
    return pair;
}

SuiteProgress run_suite(const SuiteManifest& manifest, const std::filesystem::path& out_dir) {
    const auto errors = validate_manifest(manifest);
    if (!errors.empty()) {
        std::string all = "manifest invalid:";
        for (const std::string& e : errors) all += "\n  - " + e;
        throw std::runtime_error(all);
    }

    std::filesystem::create_directories(out_dir);
    std::filesystem::create_directories(out_dir / "stats");

    const EnvFingerprint fp = collect_fingerprint();
    const auto fp_path = out_dir / "fingerprint.txt";
    if (!std::filesystem::exists(fp_path)) {
        std::ofstream out(fp_path);
        out << fingerprint_to_string(fp);
    }
    if (fp.system_thp.find("[always]") != std::string::npos) {
        std::cerr << "warning: system THP mode is 'always'; the THP_ALWAYS=0 variant is not a"
                     " true control on this host\n";
    }

    // Resume: cells already persisted are not rerun.
    const auto records_path = out_dir / "records.csv";
    std::map<std::string, std::size_t> done;
    if (std::filesystem::exists(records_path)) {
        std::ifstream in(records_path);
        for (const metrics::RunRecord& r : metrics::read_records_csv(in)) {
            ++done[r.instance + "\x1f" + r.solver + "\x1f" + (r.thp ? "1" : "0")];
        }
    }

    struct Cell {
        std::size_t solver;
        std::size_t instance;
        bool thp;
        unsigned rep;
    };
    std::vector<Cell> cells;
    for (unsigned rep = 0; rep < manifest.repetitions; ++rep) {
        std::vector<Cell> round;
        for (std::size_t s = 0; s < manifest.solvers.size(); ++s) {
            for (std::size_t i = 0; i < manifest.instances.size(); ++i) {
                round.push_back({s, i, false, rep});
                round.push_back({s, i, true, rep});
            }
        }
        // Randomized order per repetition decorrelates thermal drift.
        std::mt19937_64 rng(manifest.seed + 0x9E3779B97F4A7C15ull * (rep + 1));
        std::shuffle(round.begin(), round.end(), rng);
        cells.insert(cells.end(), round.begin(), round.end());
    }

    SuiteProgress progress;
    std::vector<Cell> pending;
    for (const Cell& cell : cells) {
        const std::string key = manifest.instances[cell.instance] + "\x1f" +
                                manifest.solvers[cell.solver].id + "\x1f" +
                                (cell.thp ? "1" : "0");
        auto it = done.find(key);
        if (it != done.end() && it->second > 0) {
            --it->second;
            ++progress.skipped;
        } else {
            pending.push_back(cell);
        }
    }

    const bool fresh = !std::filesystem::exists(records_path);
    std::ofstream records(records_path, std::ios::app);
    if (fresh) records << metrics::kRecordsCsvHeader << '\n';
    records.flush();

    std::mutex write_mu;
    std::atomic<std::size_t> next{0};
    const unsigned workers =
        std::max(1u, std::min<unsigned>(manifest.max_parallel,
                                        static_cast<unsigned>(pending.size())));
    const unsigned cores = std::max(1u, std::thread::hardware_concurrency());

    const auto worker = [&](unsigned worker_index) {
        for (;;) {
            const std::size_t mine = next.fetch_add(1);
            if (mine >= pending.size()) return;
            const Cell& cell = pending[mine];
            const SolverSpec& solver = manifest.solvers[cell.solver];
            const std::string& instance = manifest.instances[cell.instance];
            const std::string stats_path =
                (out_dir / "stats" /
                 (sanitize(solver.id) + "__" +
                  sanitize(std::filesystem::path(instance).filename().string()) + "__" +
                  (cell.thp ? "thp" : "nothp") + "__r" + std::to_string(cell.rep) + ".json"))
                    .string();
            const int pin_cpu = static_cast<int>(worker_index % cores);
            SingleRun run = execute_run(instance, solver, manifest, cell.thp, stats_path, pin_cpu);
            std::lock_guard lock(write_mu);
            records << metrics::record_to_csv_line(run.record) << '\n';
            records.flush();
            if (!run.diagnostics.empty() && run.record.verdict == metrics::Verdict::Unknown) {
                std::ofstream diag(out_dir / "stats" /
                                   (sanitize(solver.id) + "__" +
                                    sanitize(std::filesystem::path(instance).filename().string()) +
                                    "__" + (cell.thp ? "thp" : "nothp") + "__r" +
                                    std::to_string(cell.rep) + ".stderr"));
                diag << run.diagnostics;
            }
            ++progress.executed;
        }
    };

    if (workers == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker, w);
        for (std::thread& t : pool) t.join();
    }
    return progress;
}

SuiteReport build_report(const std::filesystem::path& out_dir) {
    SuiteReport report;
    const auto records_path = out_dir / "records.csv";
    std::ifstream in(records_path);
    if (!in) throw std::runtime_error("no records.csv in '" + out_dir.string() + "'");
    report.records = metrics::read_records_csv(in);

    std::set<std::string> solvers;
    for (const metrics::RunRecord& r : report.records) solvers.insert(r.solver);
    for (const std::string& solver : solvers)
        report.rows.push_back(metrics::comparison_row(solver, report.records));

    std::ifstream fp(out_dir / "fingerprint.txt");
    if (fp) {
        std::ostringstream content;
        content << fp.rdbuf();
        report.fingerprint = content.str();
    } else {
        report.fingerprint = "unavailable\n";
    }
    return report;
}

std::string emit_report(const SuiteReport& report, const std::filesystem::path& out_dir,
                        ReportFormat format) {
    for (const auto& [key, series] : metrics::cactus_series(report.records)) {
        std::ofstream out(out_dir / ("cactus_" + sanitize(key) + ".csv"));
        out << metrics::render_cactus_csv(series);
    }

    std::string rendered;
    if (format == ReportFormat::Markdown) {
        std::ostringstream out;
        out << "# THP suite report\n\n"
            << metrics::render_rows_markdown(report.rows) << "\nEnvironment:\n\n```\n"
            << report.fingerprint << "```\n";
        rendered = out.str();
        std::ofstream file(out_dir / "report.md");
        file << rendered;
    } else {
        rendered = metrics::render_rows_csv(report.rows);
        std::ofstream file(out_dir / "report.csv");
        file << rendered;
    }
    return rendered;
}

}  // namespace thp::bench
