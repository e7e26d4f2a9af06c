#include "thp/dimacs.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace thp::cnf {

namespace {

bool parse_long(std::string_view token, long long& out) {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc{} && ptr == token.data() + token.size();
}

}  // namespace

Formula parse_dimacs(std::istream& in, alloc::HugePageAllocator& allocator) {
    Formula formula(allocator);
    bool header_seen = false;
    long long declared_vars = 0;
    std::vector<Lit> current;
    bool clause_open = false;
    std::size_t line_no = 0;
    std::size_t clause_start_line = 0;

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream tokens(line);
        std::string token;
        if (!(tokens >> token)) continue;  // blank line
        if (token == "c" || token[0] == 'c') continue;

        if (token == "p") {
            if (header_seen) throw ParseError(line_no, "duplicate 'p cnf' header");
            std::string format;
            long long clause_count = 0;
            if (!(tokens >> format >> declared_vars >> clause_count) || format != "cnf")
                throw ParseError(line_no, "malformed header, expected 'p cnf V C'");
            if (declared_vars < 0 || declared_vars > 0x3FFFFFFF)
                throw ParseError(line_no, "variable count out of range");
            formula.num_vars = static_cast<std::uint32_t>(declared_vars);
            header_seen = true;
            continue;
        }

        if (!header_seen) throw ParseError(line_no, "clause before 'p cnf' header");

        // First token already consumed; process it and the rest of the line.
        do {
            long long lit = 0;
            if (!parse_long(token, lit)) throw ParseError(line_no, "invalid token '" + token + "'");
            if (lit == 0) {
                formula.add_clause(std::move(current));
                current.clear();
                clause_open = false;
                continue;
            }
            const long long var = lit > 0 ? lit : -lit;
            if (var > declared_vars)
                throw ParseError(line_no, "literal " + std::to_string(lit) + " out of range");
            if (!clause_open) {
                clause_open = true;
                clause_start_line = line_no;
            }
            current.push_back(Lit::from_dimacs(static_cast<int>(lit)));
        } while (tokens >> token);
    }

    if (!header_seen) throw ParseError(line_no == 0 ? 1 : line_no, "missing 'p cnf' header");
    if (clause_open)
        throw ParseError(clause_start_line, "unterminated final clause (missing '0')");
    return formula;
}

Formula parse_dimacs_file(const std::string& path, alloc::HugePageAllocator& allocator) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return parse_dimacs(in, allocator);
}

void write_dimacs(const Formula& f, std::ostream& out) {
    out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
    for (const ClauseRef ref : f.clauses) {
        const Clause& c = f.arena.get(ref);
        for (const Lit l : c.literals()) out << l.to_dimacs() << ' ';
        out << "0\n";
    }
}

}  // namespace thp::cnf
