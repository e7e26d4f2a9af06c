// Benchmark harness CLI: validate a manifest, run the paired THP-on/off
// suite, and emit Table-2-style reports from persisted records.

#include <iostream>

#include "CLI11.hpp"
#include "thp/bench.hpp"

int main(int argc, char** argv) {
    CLI::App app{"paired THP-on/THP-off benchmark harness"};
    app.require_subcommand(1);

    std::string manifest_path;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "execute a suite");
    run->add_option("manifest", manifest_path, "suite manifest")->required();
    run->add_option("--out", out_dir, "output directory")->required();

    std::string report_dir;
    std::string format = "md";
    auto* report = app.add_subcommand("report", "render reports from a suite directory");
    report->add_option("dir", report_dir, "suite output directory")->required();
    report->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "md"}));

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a manifest without running");
    validate->add_option("manifest", validate_path, "suite manifest")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto manifest = thp::bench::load_manifest(manifest_path);
            const auto errors = thp::bench::validate_manifest(manifest);
            if (!errors.empty()) {
                std::cerr << "manifest invalid:\n";
                for (const auto& e : errors) std::cerr << "  - " << e << '\n';
                return 1;
            }
            const auto progress = thp::bench::run_suite(manifest, out_dir);
            std::cout << "suite '" << manifest.name << "': executed " << progress.executed
                      << " runs, skipped " << progress.skipped << " already-recorded runs\n"
                      << "records: " << out_dir << "/records.csv\n";
            return 0;
        }
        if (report->parsed()) {
            const auto suite_report = thp::bench::build_report(report_dir);
            const auto rendered = thp::bench::emit_report(
                suite_report, report_dir,
                format == "md" ? thp::bench::ReportFormat::Markdown
                               : thp::bench::ReportFormat::Csv);
            std::cout << rendered;
            return 0;
        }
        if (validate->parsed()) {
            const auto manifest = thp::bench::load_manifest(validate_path);
            const auto errors = thp::bench::validate_manifest(manifest);
            if (!errors.empty()) {
                std::cerr << "manifest invalid:\n";
                for (const auto& e : errors) std::cerr << "  - " << e << '\n';
                return 1;
            }
            std::cout << "manifest ok: " << manifest.solvers.size() << " solver(s), "
                      << manifest.instances.size() << " instance(s), timeout "
                      << manifest.timeout_s << " s\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
