#include "thp/solver.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace thp::sat {

using cnf::Clause;
using cnf::ClauseRef;
using cnf::kNullClause;
using cnf::Lit;
using cnf::Value;

std::vector<std::pair<std::string, std::uint64_t>> SolverStats::flat() const {
    return {
        {"decisions", decisions},
        {"propagations", propagations},
        {"conflicts", conflicts},
        {"learned_clauses", learned_clauses},
        {"restarts", restarts},
        {"b3_list_load", b3_list_load},
        {"b4_clause_scan", b4_clause_scan},
        {"b6_b7_list_move", b6_b7_list_move},
        {"b8_unit", b8_unit},
        {"b9_conflict", b9_conflict},
        {"other_clause_access", other_clause_access},
        {"invariant_checks", invariant_checks},
    };
}

// ---------------------------------------------------------------- VarOrder

void Solver::VarOrder::init(std::uint32_t num_vars, const std::vector<double>& activity) {
    (void)activity;
    heap_.clear();
    pos_.assign(num_vars + 1, -1);
    // Equal activities and the index tie-break make 1..V already heap-ordered.
    for (std::uint32_t v = 1; v <= num_vars; ++v) {
        pos_[v] = static_cast<std::int32_t>(heap_.size());
        heap_.push_back(v);
    }
}

void Solver::VarOrder::sift_up(std::size_t i, const std::vector<double>& act) {
    while (i > 0) {
        const std::size_t parent = (i - 1) / 2;
        if (!before(heap_[i], heap_[parent], act)) break;
        std::swap(heap_[i], heap_[parent]);
        pos_[heap_[i]] = static_cast<std::int32_t>(i);
        pos_[heap_[parent]] = static_cast<std::int32_t>(parent);
        i = parent;
    }
}

void Solver::VarOrder::sift_down(std::size_t i, const std::vector<double>& act) {
    for (;;) {
        const std::size_t left = 2 * i + 1;
        const std::size_t right = left + 1;
        std::size_t best = i;
        if (left < heap_.size() && before(heap_[left], heap_[best], act)) best = left;
        if (right < heap_.size() && before(heap_[right], heap_[best], act)) best = right;
        if (best == i) break;
        std::swap(heap_[i], heap_[best]);
        pos_[heap_[i]] = static_cast<std::int32_t>(i);
        pos_[heap_[best]] = static_cast<std::int32_t>(best);
        i = best;
    }
}

void Solver::VarOrder::insert(std::uint32_t var, const std::vector<double>& activity) {
    if (pos_[var] >= 0) return;
    pos_[var] = static_cast<std::int32_t>(heap_.size());
    heap_.push_back(var);
    sift_up(heap_.size() - 1, activity);
}

void Solver::VarOrder::update(std::uint32_t var, const std::vector<double>& activity) {
    if (pos_[var] >= 0) sift_up(static_cast<std::size_t>(pos_[var]), activity);
}

std::uint32_t Solver::VarOrder::pop(const std::vector<double>& activity) {
    const std::uint32_t top = heap_.front();
    pos_[top] = -1;
    heap_.front() = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        pos_[heap_.front()] = 0;
        sift_down(0, activity);
    }
    return top;
}

std::optional<std::uint32_t> Solver::VarOrder::peek_best(const cnf::Assignment& a,
                                                         const std::vector<double>& activity) {
    while (!heap_.empty() && a.value_of_var(heap_.front()) != Value::Unassigned) pop(activity);
    if (heap_.empty()) return std::nullopt;
    return heap_.front();
}

// ------------------------------------------------------------------ Solver

Solver::Solver(cnf::Formula formula, SolverOptions options)
    : formula_(std::move(formula)), options_(options) {
    assignment_.resize(formula_.num_vars);
    watches_.assign(2 * (static_cast<std::size_t>(formula_.num_vars) + 1), {});
    activity_.assign(formula_.num_vars + 1, 0.0);
    seen_.assign(formula_.num_vars + 1, 0);
    order_.init(formula_.num_vars, activity_);
    for (const ClauseRef ref : formula_.clauses) {
        if (attach_clause(ref) == AttachOutcome::EmptyConflict) {
            ok_ = false;
            break;
        }
    }
}

void Solver::bump_variable(std::uint32_t var) {
    activity_[var] += var_inc_;
    if (activity_[var] > 1e100) {
        for (double& a : activity_) a *= 1e-100;
        var_inc_ *= 1e-100;
    }
    order_.update(var, activity_);
}

void Solver::bump_clause(Clause& c) {
    c.set_activity(c.activity() + static_cast<float>(clause_inc_));
    if (c.activity() > 1e20f) {
        for (const ClauseRef ref : learnts_) {
            Clause& lc = arena().get(ref);
            lc.set_activity(lc.activity() * 1e-20f);
        }
        clause_inc_ *= 1e-20;
    }
}

void Solver::attach_watches(ClauseRef ref, Lit w0, Lit w1) {
    watches_[(~w0).code()].push_back({ref, w1});
    watches_[(~w1).code()].push_back({ref, w0});
}

bool Solver::pending_assignment(std::uint32_t var) const {
    const auto trail = assignment_.trail();
    for (std::size_t i = qhead_; i < trail.size(); ++i) {
        if (trail[i].var() == var) return true;
    }
    return false;
}

AttachOutcome Solver::attach_clause(ClauseRef ref) {
    Clause& c = arena().get(ref);
    ++stats_.other_clause_access;
    const std::uint32_t n = c.size();
    if (n == 0) return AttachOutcome::EmptyConflict;
    if (n == 1) {
        return enqueue(c[0], ref) ? AttachOutcome::UnitEnqueued : AttachOutcome::EmptyConflict;
    }

    // Watch preference: non-falsified literals, then literals whose
    // falsifying assignment still sits in P (propagation will visit their
    // lists), then literals falsified by already-processed assignments. On an
    // empty assignment this reduces to watching the first two literals.
    const auto rank = [this](Lit l) -> int {
        if (value(l) != Value::False) return 0;
        return pending_assignment(l.var()) ? 1 : 2;
    };
    for (std::uint32_t slot = 0; slot < 2; ++slot) {
        std::uint32_t best = slot;
        int best_rank = rank(c[slot]);
        for (std::uint32_t i = slot + 1; i < n && best_rank > 0; ++i) {
            const int r = rank(c[i]);
            if (r < best_rank) {
                best = i;
                best_rank = r;
            }
        }
        std::swap(c[slot], c[best]);
    }

    const int rank0 = rank(c[0]);
    const int rank1 = rank(c[1]);
    if (rank0 == 2 || (rank0 == 1 && rank1 == 2)) {
        return AttachOutcome::EmptyConflict;  // falsified beyond the queue's reach
    }
    if (value(c[0]) == Value::Unassigned && rank1 == 2) {
        // Every other literal is falsified by processed assignments: unit now.
        attach_watches(ref, c[0], c[1]);
        const bool enq = enqueue(c[0], ref);
        assert(enq);
        (void)enq;
        return AttachOutcome::UnitEnqueued;
    }
    attach_watches(ref, c[0], c[1]);
    return AttachOutcome::Attached;
}

void Solver::attach_learnt(ClauseRef ref) {
    const Clause& c = arena().get(ref);
    ++stats_.other_clause_access;
    assert(c.size() >= 2);
    attach_watches(ref, c[0], c[1]);
}

void Solver::detach_clause(ClauseRef ref) {
    const Clause& c = arena().get(ref);
    ++stats_.other_clause_access;
    for (const Lit w : {c[0], c[1]}) {
        auto& list = watches_[(~w).code()];
        for (auto it = list.begin(); it != list.end(); ++it) {
            if (it->clause_ref == ref) {
                list.erase(it);
                break;
            }
        }
    }
}

bool Solver::enqueue(Lit l, ClauseRef reason) {
    switch (value(l)) {
        case Value::True:
            return true;  // already implied, no change
        case Value::False:
            return false;  // contradiction, caller treats as conflict
        case Value::Unassigned:
            assignment_.push(l, decision_level(), reason);
            return true;
    }
    return false;
}

void Solver::assume(Lit l) {
    assert(value(l) == Value::Unassigned);
    new_decision_level();
    const bool enq = enqueue(l, kNullClause);
    assert(enq);
    (void)enq;
}

bool Solver::add_and_attach(std::vector<Lit> lits) {
    if (!ok_) return false;
    const ClauseRef ref = formula_.add_clause(std::move(lits));
    if (ref == kNullClause) return true;  // tautology dropped
    if (attach_clause(ref) == AttachOutcome::EmptyConflict) {
        ok_ = false;
        return false;
    }
    return true;
}

std::optional<ClauseRef> Solver::unit_propagate() {
    std::optional<ClauseRef> conflict;
    while (!conflict && qhead_ < assignment_.trail_size()) {
        const Lit p = assignment_.trail_at(qhead_++);  // B1-B2: FIFO over the trail
        auto& ws = watches_[p.code()];                 // B3: load L_p
        ++stats_.b3_list_load;

        Watcher* i = ws.data();
        Watcher* j = i;
        Watcher* const end = i + ws.size();
        while (i != end) {  // B4: scan clauses of L_p
            if (options_.use_blockers && value(i->blocker) == Value::True) {
                *j++ = *i++;  // satisfied via blocker, clause untouched
                continue;
            }
            const ClauseRef cref = i->clause_ref;
            Clause& c = arena().get(cref);
            ++stats_.b4_clause_scan;
            ++i;

            const Lit false_lit = ~p;
            if (c[0] == false_lit) std::swap(c[0], c[1]);
            assert(c[1] == false_lit);

            const Lit first = c[0];
            const Watcher w{cref, first};  // refreshed blocker
            if (value(first) == Value::True) {
                *j++ = w;
                continue;
            }

            // B5: look for a non-falsified replacement watch.
            bool moved = false;
            for (std::uint32_t k = 2; k < c.size(); ++k) {
                if (value(c[k]) != Value::False) {
                    c[1] = c[k];
                    c[k] = false_lit;
                    watches_[(~c[1]).code()].push_back(w);  // B6-B7: move lists
                    ++stats_.b6_b7_list_move;
                    moved = true;
                    break;
                }
            }
            if (moved) continue;

            *j++ = w;  // clause stays in L_p
            if (value(first) == Value::False) {
                conflict = cref;  // B9: falsified, remainder of L_p kept intact
                ++stats_.b9_conflict;
                while (i != end) *j++ = *i++;
            } else {
                const bool enq = enqueue(first, cref);  // B8: unit rule
                assert(enq);
                (void)enq;
                ++stats_.b8_unit;
                ++stats_.propagations;
            }
        }
        ws.resize(static_cast<std::size_t>(j - ws.data()));
    }
    return conflict;
}

Solver::AnalyzeResult Solver::analyze_conflict(ClauseRef conflict) {
    assert(decision_level() >= 1);
    AnalyzeResult result;
    result.learned.push_back(Lit{});  // slot for the asserting literal

    int unresolved_current = 0;
    Lit p;
    bool have_p = false;
    std::size_t index = assignment_.trail_size();
    ClauseRef reason_ref = conflict;

    do {
        assert(reason_ref != kNullClause);
        Clause& c = arena().get(reason_ref);
        ++stats_.other_clause_access;
        if (c.learnt()) bump_clause(c);
        for (std::uint32_t k = have_p ? 1 : 0; k < c.size(); ++k) {
            const Lit q = c[k];
            const std::uint32_t v = q.var();
            if (!seen_[v] && assignment_.level(v) > 0) {
                seen_[v] = 1;
                bump_variable(v);
                if (assignment_.level(v) >= decision_level()) {
                    ++unresolved_current;
                } else {
                    result.learned.push_back(q);
                }
            }
        }
        do {
            --index;
        } while (!seen_[assignment_.trail_at(index).var()]);
        p = assignment_.trail_at(index);
        have_p = true;
        reason_ref = assignment_.reason(p.var());
        seen_[p.var()] = 0;
        --unresolved_current;
    } while (unresolved_current > 0);

    result.learned[0] = ~p;

    if (result.learned.size() == 1) {
        result.backjump_level = 0;
    } else {
        // Second-highest level in the clause; swap its literal to position 1.
        std::size_t best = 1;
        for (std::size_t k = 2; k < result.learned.size(); ++k) {
            if (assignment_.level(result.learned[k].var()) >
                assignment_.level(result.learned[best].var()))
                best = k;
        }
        std::swap(result.learned[1], result.learned[best]);
        result.backjump_level = assignment_.level(result.learned[1].var());
    }

    for (std::size_t k = 1; k < result.learned.size(); ++k) seen_[result.learned[k].var()] = 0;
    return result;
}

std::optional<Lit> Solver::decide() const {
    const auto var = order_.peek_best(assignment_, activity_);
    if (!var) return std::nullopt;
    return Lit::make(*var, true);  // negative polarity default
}

void Solver::backjump(std::uint32_t level) {
    assert(level < decision_level());
    const std::size_t keep = level_starts_[level];
    const auto trail = assignment_.trail();
    for (std::size_t i = trail.size(); i > keep; --i) {
        order_.insert(trail[i - 1].var(), activity_);
    }
    assignment_.shrink_trail(keep);
    level_starts_.resize(level);
    qhead_ = assignment_.trail_size();
}

bool Solver::clause_locked(ClauseRef ref, const Clause& c) const {
    return value(c[0]) == Value::True && assignment_.reason(c[0].var()) == ref;
}

void Solver::reduce_learned_db() {
    // Keep binary and locked clauses; halve the rest by activity.
    std::vector<ClauseRef> candidates;
    candidates.reserve(learnts_.size());
    for (const ClauseRef ref : learnts_) {
        const Clause& c = arena().get(ref);
        ++stats_.other_clause_access;
        if (c.size() > 2 && !clause_locked(ref, c)) candidates.push_back(ref);
    }
    std::sort(candidates.begin(), candidates.end(), [this](ClauseRef a, ClauseRef b) {
        return arena().get(a).activity() < arena().get(b).activity();
    });
    const std::size_t victims = candidates.size() / 2;
    std::unordered_set<ClauseRef> removed;
    for (std::size_t k = 0; k < victims; ++k) {
        detach_clause(candidates[k]);
        arena().mark_dead(candidates[k]);
        removed.insert(candidates[k]);
    }
    if (!removed.empty()) {
        std::erase_if(learnts_, [&](ClauseRef ref) { return removed.contains(ref); });
    }
    if (arena().dead_words() * 2 > arena().used_words()) collect_garbage();
}

void Solver::collect_garbage() {
    const auto remap = arena().compact();
    const auto fix = [&remap](ClauseRef& ref) {
        if (ref != kNullClause) {
            const auto it = remap.find(ref);
            assert(it != remap.end());
            ref = it->second;
        }
    };
    for (auto& list : watches_) {
        for (Watcher& w : list) fix(w.clause_ref);
    }
    for (ClauseRef& ref : formula_.clauses) fix(ref);
    for (ClauseRef& ref : learnts_) fix(ref);
    assignment_.remap_reasons(remap);
}

Result Solver::solve(const Budget& budget) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const auto timed_out = [&] {
        if (!budget.timeout_s) return false;
        return std::chrono::duration<double>(clock::now() - start).count() >= *budget.timeout_s;
    };

    Result result;
    if (!ok_) {
        result.kind = Result::Kind::Unsat;
        return result;
    }

    std::uint64_t restart_limit = options_.restart_base;
    std::uint64_t conflicts_since_restart = 0;
    const std::uint64_t conflicts_at_entry = stats_.conflicts;

    for (;;) {
        auto conflict = unit_propagate();
        if (options_.paranoid_checks) check_watch_invariants(!conflict.has_value());

        if (conflict) {
            ++stats_.conflicts;
            ++conflicts_since_restart;
            if (decision_level() == 0) {
                ok_ = false;
                result.kind = Result::Kind::Unsat;
                return result;
            }
            AnalyzeResult analysis = analyze_conflict(*conflict);
            backjump(analysis.backjump_level);
            if (analysis.learned.size() == 1) {
                const bool enq = enqueue(analysis.learned[0], kNullClause);
                assert(enq);
                (void)enq;
            } else {
                const ClauseRef ref = arena().make_clause(analysis.learned, true);
                learnts_.push_back(ref);
                attach_learnt(ref);
                bump_clause(arena().get(ref));
                const bool enq = enqueue(analysis.learned[0], ref);
                assert(enq);
                (void)enq;
            }
            ++stats_.learned_clauses;
            var_decay_activity();
            clause_inc_ /= options_.clause_decay;

            if (options_.reduce_interval > 0 && stats_.conflicts % options_.reduce_interval == 0)
                reduce_learned_db();
            if (budget.max_conflicts &&
                stats_.conflicts - conflicts_at_entry >= *budget.max_conflicts) {
                result.kind = Result::Kind::Unknown;
                result.unknown_reason = "conflict limit";
                return result;
            }
            if (timed_out()) {
                result.kind = Result::Kind::Unknown;
                result.unknown_reason = "timeout";
                return result;
            }
            if (conflicts_since_restart >= restart_limit) {
                ++stats_.restarts;
                conflicts_since_restart = 0;
                restart_limit = static_cast<std::uint64_t>(
                    static_cast<double>(restart_limit) * options_.restart_factor);
                if (decision_level() > 0) backjump(0);
            }
        } else {
            const auto next = decide();
            if (!next) {
                result.kind = Result::Kind::Sat;
                result.model.assign(formula_.num_vars + 1, Value::Unassigned);
                for (std::uint32_t v = 1; v <= formula_.num_vars; ++v)
                    result.model[v] = assignment_.value_of_var(v);
                if (!cnf::is_model(formula_, assignment_))
                    throw std::logic_error("internal error: SAT answer fails is_model");
                return result;
            }
            if (timed_out()) {
                result.kind = Result::Kind::Unknown;
                result.unknown_reason = "timeout";
                return result;
            }
            ++stats_.decisions;
            new_decision_level();
            const bool enq = enqueue(*next, kNullClause);
            assert(enq);
            (void)enq;
        }
    }
}

void Solver::check_watch_invariants(bool expect_fixpoint) {
    ++stats_.invariant_checks;
    const auto fail = [](const std::string& what) { throw std::logic_error(what); };

    std::unordered_set<ClauseRef> live;
    for (const ClauseRef ref : formula_.clauses) live.insert(ref);
    for (const ClauseRef ref : learnts_) live.insert(ref);

    std::unordered_map<ClauseRef, std::vector<std::uint32_t>> appearances;
    for (std::uint32_t code = 2; code < watches_.size(); ++code) {
        for (const Watcher& w : watches_[code]) {
            if (!live.contains(w.clause_ref)) fail("watcher references a removed clause");
            appearances[w.clause_ref].push_back(code);
            const Clause& c = arena().get(w.clause_ref);
            const auto lits = c.literals();
            if (std::find(lits.begin(), lits.end(), w.blocker) == lits.end())
                fail("blocker is not a literal of the watched clause");
        }
    }

    // A watch falsified by an assignment still pending in P does not count:
    // propagation has yet to visit its list.
    std::unordered_set<std::uint32_t> processed;
    for (std::size_t i = 0; i < qhead_; ++i) processed.insert(assignment_.trail_at(i).var());
    const auto effectively_false = [&](Lit l) {
        return value(l) == Value::False && processed.contains(l.var());
    };

    for (const ClauseRef ref : live) {
        const Clause& c = arena().get(ref);
        if (c.dead()) fail("dead clause still registered");
        if (c.size() < 2) continue;
        const auto it = appearances.find(ref);
        if (it == appearances.end() || it->second.size() != 2)
            fail("clause is not in exactly two watch lists");
        std::vector<std::uint32_t> expected{(~c[0]).code(), (~c[1]).code()};
        std::vector<std::uint32_t> actual = it->second;
        std::sort(expected.begin(), expected.end());
        std::sort(actual.begin(), actual.end());
        if (expected != actual)
            fail("clause watched in lists other than the negations of positions 0 and 1");

        const auto state = cnf::clause_state(c, assignment_);
        const bool watch_ok = !effectively_false(c[0]) || !effectively_false(c[1]) ||
                              state.status == cnf::ClauseStatus::Satisfied;
        if (!watch_ok) fail("both watched literals falsified in an unsatisfied clause");
        if (expect_fixpoint) {
            if (state.status == cnf::ClauseStatus::Unit)
                fail("clause is unit after propagation returned no conflict");
            if (state.status == cnf::ClauseStatus::Falsified)
                fail("clause is falsified after propagation returned no conflict");
        }
    }
}

}  // namespace thp::sat
