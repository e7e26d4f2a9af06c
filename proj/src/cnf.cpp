#include "thp/cnf.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>

namespace thp::cnf {

namespace {
constexpr std::size_t kInitialWords = (std::size_t{2} << 20) / sizeof(std::uint32_t);
}

ClauseArena::ClauseArena(alloc::HugePageAllocator& allocator) : allocator_(&allocator) {}

ClauseArena::~ClauseArena() {
    if (data_ != nullptr) allocator_->free(data_);
}

ClauseArena::ClauseArena(ClauseArena&& other) noexcept
    : allocator_(other.allocator_),
      data_(other.data_),
      capacity_(other.capacity_),
      used_(other.used_),
      dead_(other.dead_) {
    other.data_ = nullptr;
    other.capacity_ = other.used_ = other.dead_ = 0;
}

ClauseArena& ClauseArena::operator=(ClauseArena&& other) noexcept {
    if (this != &other) {
        if (data_ != nullptr) allocator_->free(data_);
        allocator_ = other.allocator_;
        data_ = other.data_;
        capacity_ = other.capacity_;
        used_ = other.used_;
        dead_ = other.dead_;
        other.data_ = nullptr;
        other.capacity_ = other.used_ = other.dead_ = 0;
    }
    return *this;
}

void ClauseArena::grow(std::size_t needed_words) {
    std::size_t new_capacity = capacity_ == 0 ? kInitialWords : capacity_ * 2;
    while (new_capacity < used_ + needed_words) new_capacity *= 2;
    auto* fresh = static_cast<std::uint32_t*>(allocator_->alloc(new_capacity * sizeof(std::uint32_t)));
    if (used_ > 0) std::memcpy(fresh, data_, used_ * sizeof(std::uint32_t));
    if (data_ != nullptr) allocator_->free(data_);
    data_ = fresh;
    capacity_ = new_capacity;
}

ClauseRef ClauseArena::make_clause(std::span<const Lit> lits, bool learnt) {
    const std::size_t words = words_for(static_cast<std::uint32_t>(lits.size()));
    if (used_ + words > capacity_) grow(words);
    const auto ref = static_cast<ClauseRef>(used_);
    used_ += words;
    auto* c = reinterpret_cast<Clause*>(data_ + ref);
    c->header_ = (static_cast<std::uint32_t>(lits.size()) << 2) | (learnt ? 2u : 0u);
    c->activity_ = 0.0f;
    std::copy(lits.begin(), lits.end(), c->lits());
    return ref;
}

void ClauseArena::mark_dead(ClauseRef ref) {
    Clause& c = get(ref);
    if (!c.dead()) {
        c.mark_dead();
        dead_ += words_for(c.size());
    }
}

std::unordered_map<ClauseRef, ClauseRef> ClauseArena::compact() {
    std::unordered_map<ClauseRef, ClauseRef> remap;
    auto* fresh = static_cast<std::uint32_t*>(allocator_->alloc(capacity_ * sizeof(std::uint32_t)));
    std::size_t write = 0;
    std::size_t read = 0;
    while (read < used_) {
        const Clause& c = *reinterpret_cast<const Clause*>(data_ + read);
        const std::size_t words = words_for(c.size());
        if (!c.dead()) {
            std::memcpy(fresh + write, data_ + read, words * sizeof(std::uint32_t));
            remap.emplace(static_cast<ClauseRef>(read), static_cast<ClauseRef>(write));
            write += words;
        }
        read += words;
    }
    allocator_->free(data_);
    data_ = fresh;
    used_ = write;
    dead_ = 0;
    return remap;
}

ClauseRef Formula::add_clause(std::vector<Lit> lits, bool learnt) {
    const std::size_t raw_size = lits.size();
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    duplicates_removed += static_cast<std::uint32_t>(raw_size - lits.size());
    for (std::size_t i = 0; i + 1 < lits.size(); ++i) {
        if (lits[i].var() == lits[i + 1].var()) {
            ++tautologies_dropped;
            return kNullClause;
        }
    }
    const ClauseRef ref = arena.make_clause(lits, learnt);
    clauses.push_back(ref);
    return ref;
}

void Assignment::resize(std::uint32_t num_vars) {
    num_vars_ = num_vars;
    values_.assign(num_vars + 1, Value::Unassigned);
    levels_.assign(num_vars + 1, 0);
    reasons_.assign(num_vars + 1, kNullClause);
    trail_.clear();
    trail_.reserve(num_vars);
}

void Assignment::push(Lit l, std::uint32_t level, ClauseRef reason) {
    assert(values_[l.var()] == Value::Unassigned);
    values_[l.var()] = l.negated() ? Value::False : Value::True;
    levels_[l.var()] = level;
    reasons_[l.var()] = reason;
    trail_.push_back(l);
}

void Assignment::remap_reasons(const std::unordered_map<ClauseRef, ClauseRef>& remap) {
    for (const Lit l : trail_) {
        ClauseRef& r = reasons_[l.var()];
        if (r != kNullClause) {
            const auto it = remap.find(r);
            assert(it != remap.end());
            r = it->second;
        }
    }
}

void Assignment::shrink_trail(std::size_t new_size) {
    assert(new_size <= trail_.size());
    for (std::size_t i = trail_.size(); i > new_size; --i) {
        const std::uint32_t v = trail_[i - 1].var();
        values_[v] = Value::Unassigned;
        reasons_[v] = kNullClause;
        levels_[v] = 0;
    }
    trail_.resize(new_size);
}

ClauseState clause_state(std::span<const Lit> lits, const Assignment& a) {
    std::size_t falsified = 0;
    Lit unassigned_lit;
    std::size_t unassigned = 0;
    for (const Lit l : lits) {
        switch (a.value(l)) {
            case Value::True:
                return {ClauseStatus::Satisfied, Lit{}};
            case Value::False:
                ++falsified;
                break;
            case Value::Unassigned:
                ++unassigned;
                unassigned_lit = l;
                break;
        }
    }
    if (falsified == lits.size()) return {ClauseStatus::Falsified, Lit{}};
    if (unassigned == 1) return {ClauseStatus::Unit, unassigned_lit};
    return {ClauseStatus::Unresolved, Lit{}};
}

ClauseState clause_state(const Clause& clause, const Assignment& a) {
    return clause_state(clause.literals(), a);
}

bool is_model(const Formula& f, const Assignment& a) {
    for (const ClauseRef ref : f.clauses) {
        if (clause_state(f.arena.get(ref), a).status != ClauseStatus::Satisfied) return false;
    }
    return true;
}

bool is_model(const Formula& f, const std::vector<Value>& model) {
    Assignment a(f.num_vars);
    for (std::uint32_t v = 1; v <= f.num_vars && v < model.size(); ++v) {
        if (model[v] != Value::Unassigned) {
            a.push(Lit::make(v, model[v] == Value::False), 0, kNullClause);
        }
    }
    return is_model(f, a);
}

}  // namespace thp::cnf
