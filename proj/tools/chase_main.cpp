// Pointer-chase microbenchmark: measures a dependent-load chain over a random
// cyclic permutation, with the buffer drawn from either the huge-page-aware
// allocator or the baseline heap path.

#include <iostream>

#include "CLI11.hpp"
#include "thp/tlb.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pointer-chase microbenchmark (A/B huge-page allocation)"};
    std::uint64_t footprint = 512ull << 20;
    std::uint64_t steps = 100'000'000;
    std::uint64_t seed = 1;
    std::string thp_mode = "off";
    app.add_option("--footprint", footprint, "buffer size in bytes")
        ->transform(CLI::AsSizeValue(false));
    app.add_option("--steps", steps, "number of dependent loads");
    app.add_option("--seed", seed, "permutation seed");
    app.add_option("--thp", thp_mode, "allocation path")
        ->check(CLI::IsMember({"on", "off"}));
    CLI11_PARSE(app, argc, argv);

    try {
        const auto which = thp_mode == "on" ? thp::tlb::ChaseAllocator::HugePage
                                            : thp::tlb::ChaseAllocator::Baseline;
        const auto result = thp::tlb::run_chase_live(footprint, steps, seed, which);
        std::cout << "footprint_bytes " << footprint << '\n'
                  << "steps " << result.accesses << '\n'
                  << "thp " << thp_mode << '\n'
                  << "seconds " << result.seconds << '\n';
        if (result.accesses > 0)
            std::cout << "ns_per_access "
                      << 1e9 * result.seconds / static_cast<double>(result.accesses) << '\n';
        std::cout << "dtlb_load_misses ";
        if (result.dtlb_load_misses)
            std::cout << *result.dtlb_load_misses << '\n';
        else
            std::cout << "NA\n";
        std::cout << "advised_bytes " << result.advised_bytes << '\n'
                  << "anon_huge_bytes " << result.anon_huge_bytes << '\n'
                  << "checksum " << result.checksum << '\n';
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
