#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "edgecsp/instance.hpp"

namespace edgecsp {

// Alternating variable/constraint walk in the constraint graph. Half-edges
// are tracked explicitly so the traversed-once rule is O(1) to enforce on
// append. A walk may close back onto its start variable (used for blossoms)
// and may end inside a constraint (half-integral).
class Walk {
  public:
    explicit Walk(int start_var);

    struct Step {
        int constraint;
        int var;
    };

    int start() const { return start_; }
    const std::vector<Step>& steps() const { return steps_; }
    bool half_integral() const { return tail_constraint_.has_value(); }
    int tail_constraint() const { return *tail_constraint_; }

    // number of full variable-to-variable steps
    int length() const { return static_cast<int>(steps_.size()); }
    int end_var() const { return steps_.empty() ? start_ : steps_.back().var; }
    bool closed() const { return length() > 0 && end_var() == start_; }

    // variable at walk position i (0 = start)
    int var_at(int i) const;

    void append(const Instance& inst, int constraint, int var);
    void append_tail(const Instance& inst, int constraint);

    bool uses_half_edge(int var, int constraint) const;
    bool visits_var(int var) const;

    Walk reversed() const;  // integral walks only
    Walk prefix(int upto) const;

    // "v0 -C1- v1 -C2- v2" (trailing "-Ck" when half-integral)
    std::string to_string(const Instance& inst) const;

  private:
    static std::uint64_t half_edge_key(int var, int constraint);

    int start_;
    std::vector<Step> steps_;
    std::optional<int> tail_constraint_;
    std::unordered_set<std::uint64_t> used_half_edges_;
    std::unordered_set<int> visited_vars_;
};

// Flip every traversed half-edge of q in f.
EdgeLabeling apply_walk(const Instance& inst, const EdgeLabeling& f, const Walk& q);

// Interior variables consistent and every prefix ending at a variable (plus
// the full walk) keeps the labeling valid. Closed walks are excluded.
bool is_f_walk(const Instance& inst, const EdgeLabeling& f, const Walk& q);

// f-walk that starts at an inconsistent variable and ends at a different
// inconsistent variable, or ends inside a constraint.
bool is_augmenting(const Instance& inst, const EdgeLabeling& f, const Walk& q);

// --- timestamped DAGs -------------------------------------------------------

struct FDagEdge {
    bool from_var;  // true: var -> C^t, false: C^t -> var
    int var;
    int constraint;
    int timestamp;
};

struct FDag {
    std::vector<int> var_nodes;
    std::vector<std::pair<int, int>> constraint_nodes;  // (constraint, timestamp)
    std::vector<FDagEdge> edges;
};

enum class FdagViolation {
    EdgeNotInGraph,      // an edge does not project to a half-edge of the instance
    DuplicateHalfEdge,   // a half-edge carries two timestamped copies
    MultipleIncoming,    // a variable has two incoming edges
    OrderCycle,          // no total order extends edges plus timestamp order
    MissingTransition,   // edges uC^t and (v,C^t) present but f(C)+u+v not in C
    ShortcutTransition,  // uC^s with a later copy (v,C^t) but f(C)+u+v in C
};

struct FdagReport {
    std::vector<FdagViolation> violations;
    std::vector<std::string> details;
    bool ok() const { return violations.empty(); }
};

// Diagnostic validator for the six structural properties; quadratic, meant
// as a test oracle and instrumentation hook.
FdagReport validate_fdag(const Instance& inst, const EdgeLabeling& f, const FDag& dag);

// Flip all half-edges of a DAG shaped as either two directed paths meeting in
// their final constraint node, or a single directed variable-to-variable
// path. The result is asserted valid.
EdgeLabeling apply_dag(const Instance& inst, const EdgeLabeling& f, const FDag& dag);

}  // namespace edgecsp
