// CNF data model: integer-encoded literals, arena-stored clauses addressed by
// 32-bit references, ternary assignments with a trail.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "thp/alloc.hpp"

namespace thp::cnf {

// Literal code 2v + (1 if negated), variables start at 1, so valid codes are
// >= 2. The dense encoding lets watch lists index an array of size 2(V+1).
class Lit {
  public:
    constexpr Lit() = default;
    static constexpr Lit make(std::uint32_t var, bool negated) {
        return Lit((var << 1) | (negated ? 1u : 0u));
    }
    static constexpr Lit from_code(std::uint32_t code) { return Lit(code); }
    static Lit from_dimacs(int lit) {
        return make(static_cast<std::uint32_t>(lit > 0 ? lit : -lit), lit < 0);
    }

    constexpr std::uint32_t code() const { return code_; }
    constexpr std::uint32_t var() const { return code_ >> 1; }
    constexpr bool negated() const { return (code_ & 1u) != 0; }
    constexpr bool valid() const { return code_ >= 2; }
    constexpr Lit operator~() const { return Lit(code_ ^ 1u); }
    int to_dimacs() const { return negated() ? -static_cast<int>(var()) : static_cast<int>(var()); }

    friend constexpr bool operator==(Lit a, Lit b) { return a.code_ == b.code_; }
    friend constexpr bool operator!=(Lit a, Lit b) { return a.code_ != b.code_; }
    friend constexpr bool operator<(Lit a, Lit b) { return a.code_ < b.code_; }

  private:
    explicit constexpr Lit(std::uint32_t code) : code_(code) {}
    std::uint32_t code_ = 0;  // 0 = invalid
};

static_assert(sizeof(Lit) == 4);

enum class Value : std::uint8_t { False = 0, True = 1, Unassigned = 2 };

constexpr Value negate(Value v) {
    return v == Value::Unassigned ? v : static_cast<Value>(1 - static_cast<int>(v));
}

using ClauseRef = std::uint32_t;
inline constexpr ClauseRef kNullClause = 0xFFFFFFFFu;

// Clause header + literal payload, laid out contiguously in the arena.
// Positions 0 and 1 hold the watched literals once the clause is attached.
class Clause {
  public:
    std::uint32_t size() const { return header_ >> 2; }
    bool learnt() const { return (header_ & 2u) != 0; }
    bool dead() const { return (header_ & 1u) != 0; }
    void mark_dead() { header_ |= 1u; }

    Lit operator[](std::uint32_t i) const { return lits()[i]; }
    Lit& operator[](std::uint32_t i) { return lits()[i]; }
    std::span<const Lit> literals() const { return {lits(), size()}; }
    std::span<Lit> literals() { return {lits(), size()}; }

    float activity() const { return activity_; }
    void set_activity(float a) { activity_ = a; }

  private:
    friend class ClauseArena;
    Lit* lits() { return reinterpret_cast<Lit*>(this + 1); }
    const Lit* lits() const { return reinterpret_cast<const Lit*>(this + 1); }

    std::uint32_t header_ = 0;  // size << 2 | learnt << 1 | dead
    float activity_ = 0.0f;
};

static_assert(sizeof(Clause) == 8);

// Contiguous clause storage addressed by 32-bit word offsets. Backing memory
// comes from the huge-page allocator, so the solver's dominant memory is the
// memory whose paging behavior the experiments manipulate. References stay
// valid across growth; compact() invalidates them and returns the remapping.
class ClauseArena {
  public:
    explicit ClauseArena(alloc::HugePageAllocator& allocator = alloc::process_allocator());
    ~ClauseArena();

    ClauseArena(ClauseArena&& other) noexcept;
    ClauseArena& operator=(ClauseArena&& other) noexcept;
    ClauseArena(const ClauseArena&) = delete;
    ClauseArena& operator=(const ClauseArena&) = delete;

    ClauseRef make_clause(std::span<const Lit> lits, bool learnt);

    Clause& get(ClauseRef ref) { return *reinterpret_cast<Clause*>(data_ + ref); }
    const Clause& get(ClauseRef ref) const { return *reinterpret_cast<const Clause*>(data_ + ref); }

    void mark_dead(ClauseRef ref);

    std::size_t used_words() const { return used_; }
    std::size_t dead_words() const { return dead_; }

    // Copies live clauses into fresh storage; returns old-ref -> new-ref.
    std::unordered_map<ClauseRef, ClauseRef> compact();

  private:
    void grow(std::size_t needed_words);
    static std::size_t words_for(std::uint32_t lit_count) { return 2 + lit_count; }

    alloc::HugePageAllocator* allocator_;
    std::uint32_t* data_ = nullptr;
    std::size_t capacity_ = 0;  // words
    std::size_t used_ = 0;      // words
    std::size_t dead_ = 0;      // words held by dead clauses
};

struct Formula {
    std::uint32_t num_vars = 0;
    ClauseArena arena;
    std::vector<ClauseRef> clauses;
    std::uint32_t tautologies_dropped = 0;
    std::uint32_t duplicates_removed = 0;

    explicit Formula(alloc::HugePageAllocator& allocator = alloc::process_allocator())
        : arena(allocator) {}

    // Normalizes (sorts, removes duplicate literals, drops tautologies) and
    // stores the clause; returns kNullClause when the clause was a tautology.
    ClauseRef add_clause(std::vector<Lit> lits, bool learnt = false);
};

// Per-variable ternary values plus the assignment trail. tau(~x) = 1 - tau(x)
// by construction of value(Lit).
class Assignment {
  public:
    Assignment() = default;
    explicit Assignment(std::uint32_t num_vars) { resize(num_vars); }

    void resize(std::uint32_t num_vars);
    std::uint32_t num_vars() const { return num_vars_; }

    Value value(Lit l) const {
        const Value v = values_[l.var()];
        return l.negated() ? negate(v) : v;
    }
    Value value_of_var(std::uint32_t var) const { return values_[var]; }
    std::uint32_t level(std::uint32_t var) const { return levels_[var]; }
    ClauseRef reason(std::uint32_t var) const { return reasons_[var]; }

    // Precondition: var unassigned. Records tau(l) = true.
    void push(Lit l, std::uint32_t level, ClauseRef reason);
    // Unassigns every literal at trail positions >= new_size.
    void shrink_trail(std::size_t new_size);
    // Rewrites reason references after arena compaction.
    void remap_reasons(const std::unordered_map<ClauseRef, ClauseRef>& remap);

    std::span<const Lit> trail() const { return trail_; }
    std::size_t trail_size() const { return trail_.size(); }
    Lit trail_at(std::size_t i) const { return trail_[i]; }
    std::size_t assigned_count() const { return trail_.size(); }

  private:
    std::uint32_t num_vars_ = 0;
    std::vector<Value> values_;        // indexed by var
    std::vector<std::uint32_t> levels_;
    std::vector<ClauseRef> reasons_;
    std::vector<Lit> trail_;
};

enum class ClauseStatus : std::uint8_t { Satisfied, Falsified, Unit, Unresolved };

struct ClauseState {
    ClauseStatus status;
    Lit unit_literal;  // valid only when status == Unit
};

// The empty clause is Falsified under any assignment.
ClauseState clause_state(const Clause& clause, const Assignment& a);
ClauseState clause_state(std::span<const Lit> lits, const Assignment& a);

bool is_model(const Formula& f, const Assignment& a);
// model indexed by variable (slot 0 unused).
bool is_model(const Formula& f, const std::vector<Value>& model);

}  // namespace thp::cnf
