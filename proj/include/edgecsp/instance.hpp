#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgecsp/dmatroid.hpp"

namespace edgecsp {

struct ConstraintSpec {
    std::string id;
    Relation relation;
};

// Raw, not-yet-validated instance parts.
struct InstanceData {
    std::vector<std::string> variables;
    std::vector<ConstraintSpec> constraints;
};

struct InstanceDiagnostics {
    std::vector<std::string> problems;
    bool ok() const { return problems.empty(); }
};

// Checks the edge-CSP shape: every variable in exactly two constraint scopes,
// no variable twice in one scope, nonempty relations, known variables only.
InstanceDiagnostics validate_instance(const InstanceData& data);

// Doubles an instance whose variables have degree at most two: two copies of
// every constraint, two copies of every degree-2 variable, and the two copies
// of each degree-1 variable fused into one variable shared by the two copies
// of its constraint. The doubled optimum is exactly twice the relaxed one.
InstanceData normalize_degree(const InstanceData& relaxed);

class Instance {
  public:
    struct Incidence {
        int constraint = -1;
        int position = -1;
    };

    static Instance create(InstanceData data);  // throws PreconditionError

    int var_count() const { return static_cast<int>(variables_.size()); }
    int constraint_count() const { return static_cast<int>(data_.constraints.size()); }

    const std::vector<std::string>& variables() const { return variables_; }
    const std::string& variable(int v) const { return variables_[static_cast<std::size_t>(v)]; }
    int variable_index(std::string_view name) const;  // -1 when absent

    const std::string& constraint_id(int c) const;
    int constraint_index(std::string_view id) const;  // -1 when absent
    const Relation& relation(int c) const;

    // The two incidences of a variable, ordered by constraint index.
    const std::array<Incidence, 2>& incidences(int v) const;
    int other_constraint(int v, int c) const;
    int position_in(int v, int c) const;  // -1 when v not in scope of c
    int var_at(int c, int position) const;
    const std::vector<int>& scope_vars(int c) const;

    const InstanceData& data() const { return data_; }

  private:
    InstanceData data_;
    std::vector<std::string> variables_;
    std::vector<std::vector<int>> scope_vars_;  // per constraint, variable indices
    std::vector<std::array<Incidence, 2>> incidences_;
    std::unordered_map<std::string, int> var_index_;
    std::unordered_map<std::string, int> constraint_index_;
};

// One tuple per constraint; bit at scope position p of constraint c is the
// value of the half-edge between c and its p-th scope variable.
class EdgeLabeling {
  public:
    EdgeLabeling() = default;
    explicit EdgeLabeling(std::vector<BitTuple> per_constraint)
        : per_constraint_(std::move(per_constraint)) {}

    int constraint_count() const { return static_cast<int>(per_constraint_.size()); }
    BitTuple tuple(int c) const { return per_constraint_[static_cast<std::size_t>(c)]; }
    void set_tuple(int c, BitTuple t) { per_constraint_[static_cast<std::size_t>(c)] = t; }
    void toggle(int c, BitTuple mask) { per_constraint_[static_cast<std::size_t>(c)] ^= mask; }

    bool half_edge(const Instance& inst, int v, int c) const;

    bool operator==(const EdgeLabeling&) const = default;

  private:
    std::vector<BitTuple> per_constraint_;
};

// Canonically-first tuple of every relation.
EdgeLabeling initial_labeling(const Instance& inst);

bool is_valid(const Instance& inst, const EdgeLabeling& f);
bool variable_consistent(const Instance& inst, const EdgeLabeling& f, int v);
int inconsistency_count(const Instance& inst, const EdgeLabeling& f);
std::vector<int> inconsistent_variables(const Instance& inst, const EdgeLabeling& f);

struct BruteForceResult {
    int optimum = 0;
    EdgeLabeling witness;
};

// Exhaustive minimum over all valid labelings; errors out (never truncates)
// when the search space exceeds the bound. Witness is the canonically first
// optimal labeling. `workers` partitions on the first constraint's tuples.
BruteForceResult brute_force_optimum(const Instance& inst,
                                     long long bound = 10'000'000,
                                     int workers = 1);

// Both labelings valid and inconsistency counts congruent mod 2.
bool parity_invariant_check(const Instance& inst, const EdgeLabeling& f,
                            const EdgeLabeling& g);

}  // namespace edgecsp
