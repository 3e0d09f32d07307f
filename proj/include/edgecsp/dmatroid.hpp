#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgecsp/common.hpp"

namespace edgecsp {

// Boolean relation given as an explicit tuple list over a named scope.
// Tuples are kept sorted by integer value and deduplicated, so relations
// compare and serialize deterministically.
class Relation {
  public:
    Relation() = default;  // arity 0, no tuples
    Relation(std::vector<std::string> scope, std::vector<BitTuple> tuples);
    static Relation from_bit_strings(std::vector<std::string> scope,
                                     const std::vector<std::string>& tuples);

    int arity() const { return static_cast<int>(scope_.size()); }
    const std::vector<std::string>& scope() const { return scope_; }
    const std::vector<BitTuple>& tuples() const { return tuples_; }
    std::size_t size() const { return tuples_.size(); }

    // Empty relation (legal value, e.g. from identify) is distinct from the
    // arity-0 relation holding the single empty tuple.
    bool empty() const { return tuples_.empty(); }

    bool contains(BitTuple t) const;
    int position_of(std::string_view var) const;  // -1 when absent

    std::string tuple_string(BitTuple t) const;
    std::vector<std::string> tuple_strings() const;

    bool operator==(const Relation&) const = default;

  private:
    std::vector<std::string> scope_;
    std::vector<BitTuple> tuples_;
};

// Set of scope positions whose values get complemented.
using FlipSet = std::vector<int>;

// --- membership structure -------------------------------------------------

bool is_delta_matroid(const Relation& m);  // error on empty relation
bool is_even(const Relation& m);           // constant ones-parity; error on empty

// --- algebra ----------------------------------------------------------------

Relation direct_product(const Relation& a, const Relation& b);
Relation identify(const Relation& m, std::string_view w1, std::string_view w2);
Relation minor_fix(const Relation& m, std::string_view v, bool value);
Relation flip_values(const Relation& m, const FlipSet& positions);

// Scope utilities (plumbing for minors and reports).
Relation reorder_scope(const Relation& m, const std::vector<int>& order);
Relation rename_scope(const Relation& m, std::vector<std::string> names);

// True when some sequence of fix-and-delete minors of m is isomorphic
// (variable renaming plus per-variable value flips) to the interference
// relation. Arity < 3 is trivially false.
bool contains_interference_minor(const Relation& m);

// --- planar dichotomy helpers ----------------------------------------------

// (x1^x2, x2^x3, ..., xn^x1); requires arity >= 2.
Relation d_transform(const Relation& r);
bool is_self_complementary(const Relation& r);

Relation interference_relation();       // {000,110,101,011,111} over v1..v3
Relation even_relation(int arity);      // tuples of even ones-count
Relation matching_relation(int arity);  // exactly-one-coordinate-one tuples

struct PlanarRelationReport {
    bool self_complementary = false;
    bool d_transform_applicable = false;  // false for arity-1 relations
    bool d_transform_even_delta_matroid = false;
    bool satisfies_condition = false;
};

struct PlanarReport {
    std::vector<PlanarRelationReport> relations;
    bool condition_holds = false;
    std::vector<Relation> even_constants;  // EVEN1, EVEN2, EVEN3
};

PlanarReport planar_tractability_report(const std::vector<Relation>& gamma);

}  // namespace edgecsp
