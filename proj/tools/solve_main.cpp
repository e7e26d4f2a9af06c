// SAT solver CLI. Competition conventions: exit 10 = SAT, 20 = UNSAT,
// 0 = unknown; model printed as "v" lines.

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "thp/dimacs.hpp"
#include "thp/solver.hpp"

namespace {

void print_model(const thp::sat::Result& result, std::uint32_t num_vars) {
    std::cout << "v";
    int on_line = 0;
    for (std::uint32_t v = 1; v <= num_vars; ++v) {
        const bool positive = result.model[v] != thp::cnf::Value::False;
        std::cout << ' ' << (positive ? static_cast<int>(v) : -static_cast<int>(v));
        if (++on_line == 40 && v != num_vars) {
            std::cout << "\nv";
            on_line = 0;
        }
    }
    std::cout << " 0\n";
}

void write_stats(const std::string& path, const thp::sat::SolverStats& stats) {
    nlohmann::json doc;
    for (const auto& [key, value] : stats.flat()) doc[key] = value;
    doc["propagation_site_total"] = stats.propagation_site_total();
    doc["propagation_access_fraction"] = stats.propagation_access_fraction();
    const auto alloc = thp::alloc::process_allocator().snapshot();
    doc["alloc_enabled"] = thp::alloc::process_allocator().config().enabled;
    doc["alloc_region_count"] = alloc.region_count;
    doc["alloc_advised_bytes"] = alloc.advised_bytes;
    doc["alloc_fallback_count"] = alloc.fallback_count;
    doc["anon_huge_bytes"] = thp::alloc::anon_huge_bytes();
    std::ofstream out(path);
    out << doc.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CDCL SAT solver with huge-page-aware clause storage"};
    std::string file;
    double timeout_s = 0;
    std::uint64_t max_conflicts = 0;
    std::string stats_json;
    bool no_blockers = false;
    app.add_option("file", file, "DIMACS CNF input")->required();
    app.add_option("--timeout", timeout_s, "wall-clock budget in seconds");
    app.add_option("--conflicts", max_conflicts, "conflict budget");
    app.add_option("--stats-json", stats_json, "write solver statistics to this file");
    app.add_flag("--no-blockers", no_blockers, "disable the blocking-literal optimization");
    CLI11_PARSE(app, argc, argv);

    thp::cnf::Formula formula;
    try {
        formula = thp::cnf::parse_dimacs_file(file);
    } catch (const std::exception& e) {
        std::cout << "c parse error: " << e.what() << "\ns UNKNOWN\n";
        return 0;
    }

    std::cout << "c vars " << formula.num_vars << " clauses " << formula.clauses.size();
    if (formula.tautologies_dropped > 0)
        std::cout << " tautologies-dropped " << formula.tautologies_dropped;
    std::cout << '\n';

    thp::sat::SolverOptions options;
    options.use_blockers = !no_blockers;
    const std::uint32_t num_vars = formula.num_vars;
    thp::sat::Solver solver(std::move(formula), options);

    thp::sat::Budget budget;
    if (timeout_s > 0) budget.timeout_s = timeout_s;
    if (max_conflicts > 0) budget.max_conflicts = max_conflicts;

    const thp::sat::Result result = solver.solve(budget);

    const auto& stats = solver.stats();
    std::cout << "c decisions " << stats.decisions << " conflicts " << stats.conflicts
              << " propagations " << stats.propagations << " restarts " << stats.restarts << '\n';
    if (!stats_json.empty()) write_stats(stats_json, stats);

    switch (result.kind) {
        case thp::sat::Result::Kind::Sat:
            std::cout << "s SATISFIABLE\n";
            print_model(result, num_vars);
            return 10;
        case thp::sat::Result::Kind::Unsat:
            std::cout << "s UNSATISFIABLE\n";
            return 20;
        case thp::sat::Result::Kind::Unknown:
            std::cout << "c stopped: " << result.unknown_reason << "\ns UNKNOWN\n";
            return 0;
    }
    return 0;
}
