#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgecsp/dmatroid.hpp"
#include "edgecsp/instance.hpp"

namespace edgecsp {

// Undirected multigraph. Loops are rejected; parallel edges are fine and show
// up as distinct variables when the graph is turned into an instance.
struct SimpleGraph {
    std::vector<std::string> nodes;
    std::vector<std::pair<int, int>> edges;  // node indices, unordered

    static SimpleGraph create(std::vector<std::string> nodes,
                              const std::vector<std::pair<std::string, std::string>>& edges);

    int node_index(const std::string& name) const;  // -1 if absent
    int degree(int node) const;
};

// Exact maximum matching size, exponential-time branch over the lowest
// uncovered node with memoization on the remaining-node mask. Graphs are
// capped at 20 nodes, which covers everything this project generates.
int max_matching_size(const SimpleGraph& g);

// Perfect matching on the subgraph induced by nodes outside removed_mask.
bool has_perfect_matching(const SimpleGraph& g, std::uint32_t removed_mask = 0);

// Edge CSP whose valid zero-inconsistency labelings are exactly the perfect
// matchings: one variable e<i> per edge, one exactly-one constraint per node
// (scope = incident edges in input order, id = node name).
Instance graph_to_instance(const SimpleGraph& g);

// Relation realized by a pinned graph: tuples T over the pins such that the
// graph minus the pins set to 1 has a perfect matching. Computed twice, via
// the direct matcher and via the solver on the residual edge CSP; any
// disagreement is an internal error. workers splits the 2^|pins| loop.
Relation realize(const SimpleGraph& g, const std::vector<std::string>& pins, int workers = 1);

struct PairDecomposition {
    // Scope position pairs (u < v) inside f^g whose simultaneous flip stays
    // in the relation from both endpoints.
    std::vector<std::pair<int, int>> admissible_pairs;
    std::optional<std::vector<std::pair<int, int>>> partition;
};

// Searches for a partition of the symmetric difference of two tuples into
// admissible pairs. Throws if f or g is not in the relation or if the
// difference has odd size.
PairDecomposition check_pair_decomposition(const Relation& m, BitTuple f, BitTuple g);

// Frozen arity-6 even delta-matroid whose difference 111111 ^ 000000 admits
// pairs only at {1,4},{2,3},{3,4},{3,5},{4,6} (1-based) and no partition.
// Shows that augmenting steps cannot always be split into independent swaps.
Relation counterexample_arity6();

// Small named fixtures used by tests and the CLI demo corpus.
SimpleGraph triangle_graph();
SimpleGraph petersen_graph();

// Pinned-graph realizations of the two relations known from the hardness
// reduction: Y = perfect matchings of a triangle with all nodes pinned, and
// X, which needs two internal nodes besides its five pins.
Relation fixture_relation_y();
Relation fixture_relation_x();
SimpleGraph fixture_graph_x();
std::vector<std::string> fixture_pins_x();

}  // namespace edgecsp
