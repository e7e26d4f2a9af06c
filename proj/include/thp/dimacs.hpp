// DIMACS CNF reading and writing. Tolerant of extra whitespace and clauses
// spanning lines; 'c' lines are comments; the "p cnf V C" header is required
// before the first clause.

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "thp/cnf.hpp"

namespace thp::cnf {

class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

Formula parse_dimacs(std::istream& in,
                     alloc::HugePageAllocator& allocator = alloc::process_allocator());
Formula parse_dimacs_file(const std::string& path,
                          alloc::HugePageAllocator& allocator = alloc::process_allocator());

void write_dimacs(const Formula& f, std::ostream& out);

}  // namespace thp::cnf
