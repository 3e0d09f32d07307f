#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edgecsp/blossom_solver.hpp"
#include "edgecsp/instance.hpp"
#include "edgecsp/walks.hpp"

namespace edgecsp {

// --- even-neighbor reachability ---------------------------------------------

// Members beta = alpha + u + v of m (u, v distinct) whose intermediate
// single flip alpha + u lies outside m. The relation is symmetric because
// the intermediate tuple is a single flip of both endpoints.
std::vector<BitTuple> even_neighbors(const Relation& m, BitTuple alpha);

// Closure of alpha under even-neighbor hops; always contains alpha.
std::set<BitTuple> reachable_set(const Relation& m, BitTuple alpha);

// --- covers ------------------------------------------------------------------

struct CoverCheck {
    bool ok = false;
    std::vector<std::string> problems;
};

// A cover of alpha must be an even delta-matroid over the same scope,
// contain everything reachable from alpha, and whenever a reachable tuple
// leaves m by a double flip into the cover, both single flips must land in
// m. Diagnostic; collects every violated condition.
CoverCheck verify_cover(const Relation& m, BitTuple alpha, const Relation& cover);

// Complement closed under single flips: every tuple outside m has all its
// neighbors inside. Such a set is automatically a delta-matroid.
bool is_coindependent(const Relation& m);

// The full parity class of alpha. Checks that m fills at least half the
// cube, which co-independence forces.
Relation cover_coindependent(const Relation& m, BitTuple alpha);

// Generalized counting function: single flips move the value by exactly one
// and between any two tuples with different values the higher one can step
// down while the lower one steps up inside their difference.
struct GcFunction {
    std::string name;
    std::function<int(BitTuple)> eval;
    int operator()(BitTuple t) const { return eval(t); }
};

GcFunction gc_ones();  // number of one bits, the built-in gc-function

// Axiom 1 exhaustively over all tuples of the given arity; axiom 2
// exhaustively for small arities and on a fixed pseudorandom sample above.
CoverCheck check_gc_function(const GcFunction& f, int arity);

// No two consecutive values strictly between min and max are missing.
bool is_gap2_free(const std::set<int>& s);

// Membership equivalence: t in m exactly when f(t) in s.
bool is_compact_like(const Relation& m, const GcFunction& f, const std::set<int>& s);

// All tuples t over the scope with f(t) in s.
Relation compact_like_relation(std::vector<std::string> scope, const GcFunction& f,
                               const std::set<int>& s);

// Listing construction for a compact-like m: seed with the m-tuples of
// alpha's parity, then add single flips of opposite-parity m-tuples whose
// value falls strictly between min s and max s. Equals the level set of
// [min s, max s] restricted to values of alpha's value parity.
Relation cover_compact(const Relation& m, const GcFunction& f, const std::set<int>& s,
                       BitTuple alpha);

// The tuples of m with alpha's parity. Forms an even delta-matroid whenever
// m has no interference minor.
Relation cover_interference_free(const Relation& m, BitTuple alpha);

// Backtracking search for an even delta-matroid that contains every m-tuple
// of alpha's parity and satisfies: any member outside m at distance two
// from a tuple beta of m forces both single flips of beta into m. Starts
// from the parity class, repairs exchange violations by branching over the
// admissible witnesses, and returns the first witness found or nothing once
// the space is exhausted. Exponential; refuses arity above max_arity.
std::optional<Relation> even_zebra_cover_search(const Relation& m, BitTuple alpha,
                                                int max_arity = 8);

// --- covering oracles --------------------------------------------------------

// One per delta-matroid class: maps (m, alpha in m) to the even
// delta-matroid covering alpha. `kind` selects the construction; compact
// needs the witnessing gc-function and level set.
struct CoverOracle {
    std::string kind;  // coindependent | compact | interference_free | custom
    GcFunction gc;
    std::set<int> levels;
    std::function<Relation(const Relation&, BitTuple)> custom;

    Relation cover(const Relation& m, BitTuple alpha) const;
};

CoverOracle coindependent_oracle();
CoverOracle compact_oracle(GcFunction gc, std::set<int> levels);
CoverOracle interference_free_oracle();
CoverOracle custom_oracle(std::function<Relation(const Relation&, BitTuple)> fn);

// Classifies m into the cheapest covered class that applies: co-independent,
// compact over the built-in gc-function, interference-free, then a zebra
// search at arity <= 8. RefusalError when nothing fits. The choice is
// recorded in the returned kind.
CoverOracle detect_cover_oracle(const Relation& m);

// Covering oracle per constraint id.
using OracleMap = std::map<std::string, CoverOracle>;

// Fills the missing entries of `configured` by detection, naming the
// constraint in any refusal.
OracleMap detect_oracles(const Instance& inst, OracleMap configured = {});

// --- the solver --------------------------------------------------------------

// The instance with constraint c's relation replaced by sub (a nonempty
// subset over the same scope) and every other relation replaced by its
// cover at the current tuple f(D). With sub = relation(c) the labeling f
// stays valid for the result.
Instance build_restricted_instance(const Instance& inst, const EdgeLabeling& f, int c,
                                   const Relation& sub, const OracleMap& oracles);

// Extract an augmenting f-walk from a strictly better labeling g on an
// instance with arbitrary delta-matroid constraints. Same two stages as
// find_augmenting_walk, but both stages take a single flip that stays in
// the relation as soon as one exists, which may end the walk inside a
// constraint (half-integral).
Walk find_general_augmenting_walk(const Instance& inst, const EdgeLabeling& f,
                                  const EdgeLabeling& g);

// Translate an improvement g of the forced instance I(f,c,{alpha}) back
// into an augmenting f-walk for inst: find a general augmenting walk
// against the instance with c unforced and all other constraints covered,
// then return its shortest prefix ending in a constraint that already
// augments inst, or the whole walk. Cover condition guarantees one exists.
Walk lift_general(const Instance& inst, const EdgeLabeling& f, int c, BitTuple alpha,
                  const EdgeLabeling& g, const OracleMap& oracles);

struct CoverableOptions {
    // verify every cover against verify_cover before trusting it; failures
    // raise RefusalError naming the constraint and tuple
    bool strict = true;
    int workers = 1;
    std::vector<TraceEvent>* trace = nullptr;
};

// Optimal labeling for an instance whose constraints are delta-matroids
// with covering oracles: repeatedly force one constraint to a single tuple,
// cover the rest, solve the even instance, and lift the first improving
// candidate (constraints in index order, tuples in canonical order).
// `stats` counts the applied improvements and the winning candidates' inner
// solver work; probe runs that found nothing are not included.
SolveResult solve_coverable(const Instance& inst, const OracleMap& oracles,
                            const CoverableOptions& opts = {});

}  // namespace edgecsp
