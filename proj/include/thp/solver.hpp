// CDCL solver with two watched literals and blocking literals.
//
// Unit propagation follows the classic scheme: the propagation queue P is the
// unprocessed suffix of the assignment trail; the watch list for literal p
// holds the clauses that contain ~p among their two watched literals;
// a watcher caches a blocking literal so satisfied clauses are skipped
// without dereferencing the clause. Per-site access counters attribute clause
// and list accesses to the propagation steps (list load, clause scan, list
// move, unit, conflict) so the propagation-dominance claim can be checked
// from software counters.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thp/cnf.hpp"

namespace thp::sat {

struct Watcher {
    cnf::ClauseRef clause_ref;
    cnf::Lit blocker;  // some other literal of the clause
};

struct SolverStats {
    std::uint64_t decisions = 0;
    std::uint64_t propagations = 0;  // literals assigned by unit propagation
    std::uint64_t conflicts = 0;
    std::uint64_t learned_clauses = 0;
    std::uint64_t restarts = 0;

    // Propagation-site access counters, keyed by the step that touched memory.
    std::uint64_t b3_list_load = 0;    // watch list loads
    std::uint64_t b4_clause_scan = 0;  // clauses dereferenced during propagation
    std::uint64_t b6_b7_list_move = 0; // clauses moved to another watch list
    std::uint64_t b8_unit = 0;         // unit enqueues
    std::uint64_t b9_conflict = 0;     // conflicts detected in propagation

    // Clause dereferences outside propagation (attach, analysis, reduction).
    std::uint64_t other_clause_access = 0;

    std::uint64_t invariant_checks = 0;  // paranoid-mode verification passes

    std::uint64_t propagation_site_total() const {
        return b3_list_load + b4_clause_scan + b6_b7_list_move + b8_unit + b9_conflict;
    }
    double propagation_access_fraction() const {
        const std::uint64_t total = propagation_site_total() + other_clause_access;
        return total == 0 ? 0.0 : static_cast<double>(propagation_site_total()) / total;
    }

    std::vector<std::pair<std::string, std::uint64_t>> flat() const;
};

struct SolverOptions {
    bool use_blockers = true;     // skip watchers whose blocker is satisfied
    bool paranoid_checks = false; // verify watch invariants after every propagation
    std::uint32_t restart_base = 100;   // conflicts before the first restart
    double restart_factor = 1.5;        // geometric growth
    std::uint32_t reduce_interval = 4000;  // conflicts between learned-DB halvings
    double var_decay = 0.95;
    double clause_decay = 0.999;
};

struct Budget {
    std::optional<double> timeout_s;
    std::optional<std::uint64_t> max_conflicts;
};

struct Result {
    enum class Kind { Sat, Unsat, Unknown } kind = Kind::Unknown;
    std::vector<cnf::Value> model;  // indexed by variable, slot 0 unused
    std::string unknown_reason;
};

enum class AttachOutcome { Attached, UnitEnqueued, EmptyConflict };

class Solver {
  public:
    explicit Solver(cnf::Formula formula, SolverOptions options = {});

    Result solve(const Budget& budget = {});

    // Building blocks, public so their contracts are testable in isolation.
    AttachOutcome attach_clause(cnf::ClauseRef ref);
    bool enqueue(cnf::Lit l, cnf::ClauseRef reason = cnf::kNullClause);
    std::optional<cnf::ClauseRef> unit_propagate();
    struct AnalyzeResult {
        std::vector<cnf::Lit> learned;  // [0] is the asserting literal
        std::uint32_t backjump_level;
    };
    AnalyzeResult analyze_conflict(cnf::ClauseRef conflict);
    std::optional<cnf::Lit> decide() const;
    void backjump(std::uint32_t level);

    // Adds and attaches a clause at decision level 0. Returns false when the
    // clause (or an implied unit) makes the formula unsatisfiable.
    bool add_and_attach(std::vector<cnf::Lit> lits);

    // Opens a new decision level and enqueues l as its decision.
    void assume(cnf::Lit l);

    const std::vector<Watcher>& watch_list(cnf::Lit p) const { return watches_[p.code()]; }

    std::uint32_t decision_level() const {
        return static_cast<std::uint32_t>(level_starts_.size());
    }
    bool ok() const { return ok_; }
    const cnf::Assignment& assignment() const { return assignment_; }
    const cnf::Formula& formula() const { return formula_; }
    const SolverStats& stats() const { return stats_; }
    const SolverOptions& options() const { return options_; }
    void bump_variable(std::uint32_t var);  // exposed for heuristic tests

    // Full-scan verification of the watch invariant, the two-list invariant
    // and (when no conflict is pending) propagation completeness. Throws
    // std::logic_error on violation. Driven by options.paranoid_checks after
    // every unit_propagate; callable directly by tests.
    void check_watch_invariants(bool expect_fixpoint);

  private:
    // Indexed max-heap over variable activities; ties break toward the
    // lowest variable index.
    class VarOrder {
      public:
        void init(std::uint32_t num_vars, const std::vector<double>& activity);
        void insert(std::uint32_t var, const std::vector<double>& activity);
        void update(std::uint32_t var, const std::vector<double>& activity);
        std::optional<std::uint32_t> peek_best(const cnf::Assignment& a,
                                               const std::vector<double>& activity);
        std::uint32_t pop(const std::vector<double>& activity);
        bool empty() const { return heap_.empty(); }

      private:
        bool before(std::uint32_t a, std::uint32_t b, const std::vector<double>& act) const {
            return act[a] > act[b] || (act[a] == act[b] && a < b);
        }
        void sift_up(std::size_t i, const std::vector<double>& act);
        void sift_down(std::size_t i, const std::vector<double>& act);

        std::vector<std::uint32_t> heap_;
        std::vector<std::int32_t> pos_;  // var -> heap index, -1 if absent
    };

    cnf::Value value(cnf::Lit l) const { return assignment_.value(l); }
    cnf::ClauseArena& arena() { return formula_.arena; }
    const cnf::ClauseArena& arena() const { return formula_.arena; }

    void attach_watches(cnf::ClauseRef ref, cnf::Lit w0, cnf::Lit w1);
    bool pending_assignment(std::uint32_t var) const;
    void detach_clause(cnf::ClauseRef ref);
    void attach_learnt(cnf::ClauseRef ref);
    void new_decision_level() { level_starts_.push_back(assignment_.trail_size()); }
    void var_decay_activity() { var_inc_ /= options_.var_decay; }
    void bump_clause(cnf::Clause& c);
    void reduce_learned_db();
    void collect_garbage();
    bool clause_locked(cnf::ClauseRef ref, const cnf::Clause& c) const;

    cnf::Formula formula_;
    SolverOptions options_;
    cnf::Assignment assignment_;
    std::vector<std::vector<Watcher>> watches_;  // indexed by literal code
    std::vector<std::size_t> level_starts_;      // trail index where each level begins
    std::size_t qhead_ = 0;                      // P: trail suffix from qhead_ on
    std::vector<cnf::ClauseRef> learnts_;
    std::vector<double> activity_;
    double var_inc_ = 1.0;
    double clause_inc_ = 1.0;
    mutable VarOrder order_;
    std::vector<char> seen_;  // analysis scratch
    bool ok_ = true;
    SolverStats stats_;
};

}  // namespace thp::sat
