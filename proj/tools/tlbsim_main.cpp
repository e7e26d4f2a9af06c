// LRU TLB simulation over an address trace file.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "thp/tlb.hpp"

int main(int argc, char** argv) {
    CLI::App app{"LRU TLB simulator over an address trace"};
    std::uint64_t page_size = 4096;
    std::size_t entries = 1536;
    std::string trace_path;
    app.add_option("--page-size", page_size, "page size in bytes (power of two)")
        ->transform(CLI::AsSizeValue(false));
    app.add_option("--entries", entries, "TLB entry count");
    app.add_option("trace", trace_path, "trace file, one decimal address per line ('-' = stdin)")
        ->required();
    CLI11_PARSE(app, argc, argv);

    thp::tlb::AccessTrace trace;
    try {
        if (trace_path == "-") {
            trace = thp::tlb::read_trace(std::cin);
        } else {
            std::ifstream in(trace_path);
            if (!in) {
                std::cerr << "cannot open '" << trace_path << "'\n";
                return 1;
            }
            trace = thp::tlb::read_trace(in);
        }
        const auto result = thp::tlb::simulate(trace, {entries, page_size});
        std::cout << "accesses " << trace.size() << '\n'
                  << "page_size " << page_size << '\n'
                  << "entries " << entries << '\n'
                  << "distinct_pages " << result.distinct_pages << '\n'
                  << "hits " << result.hits << '\n'
                  << "misses " << result.misses << '\n';
        if (!trace.empty())
            std::cout << "miss_rate "
                      << static_cast<double>(result.misses) / static_cast<double>(trace.size())
                      << '\n';
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
