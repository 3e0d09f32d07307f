#include "edgecsp/matching.hpp"

#include <algorithm>
#include <bit>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "edgecsp/blossom_solver.hpp"

namespace edgecsp {

namespace {

constexpr int kMaxNodes = 20;

void check_size(const SimpleGraph& g) {
    if (static_cast<int>(g.nodes.size()) > kMaxNodes)
        throw PreconditionError("graph has more than " + std::to_string(kMaxNodes) + " nodes");
}

// Maximum matching size on the nodes outside `removed`.
int matching_rec(const SimpleGraph& g, std::uint32_t removed,
                 std::unordered_map<std::uint32_t, int>& memo) {
    int u = -1;
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
        if (!(removed & (1u << i))) {
            u = i;
            break;
        }
    if (u < 0) return 0;
    auto it = memo.find(removed);
    if (it != memo.end()) return it->second;
    int best = matching_rec(g, removed | (1u << u), memo);  // leave u uncovered
    for (const auto& [a, b] : g.edges) {
        int v = a == u ? b : (b == u ? a : -1);
        if (v < 0 || (removed & (1u << v))) continue;
        best = std::max(best, 1 + matching_rec(g, removed | (1u << u) | (1u << v), memo));
    }
    memo[removed] = best;
    return best;
}

bool perfect_rec(const SimpleGraph& g, std::uint32_t removed,
                 std::unordered_map<std::uint32_t, char>& memo) {
    int u = -1;
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
        if (!(removed & (1u << i))) {
            u = i;
            break;
        }
    if (u < 0) return true;
    auto it = memo.find(removed);
    if (it != memo.end()) return it->second != 0;
    bool ok = false;
    for (const auto& [a, b] : g.edges) {
        int v = a == u ? b : (b == u ? a : -1);
        if (v < 0 || (removed & (1u << v))) continue;
        if (perfect_rec(g, removed | (1u << u) | (1u << v), memo)) {
            ok = true;
            break;
        }
    }
    memo[removed] = ok ? 1 : 0;
    return ok;
}

// Perfect-matching decision via the solver on the residual edge CSP.
bool perfect_via_solver(const SimpleGraph& g, std::uint32_t removed) {
    SimpleGraph rest;
    std::vector<int> node_map(g.nodes.size(), -1);
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
        if (removed & (1u << i)) continue;
        node_map[static_cast<std::size_t>(i)] = static_cast<int>(rest.nodes.size());
        rest.nodes.push_back(g.nodes[static_cast<std::size_t>(i)]);
    }
    if (rest.nodes.empty()) return true;
    for (const auto& [a, b] : g.edges) {
        int ma = node_map[static_cast<std::size_t>(a)];
        int mb = node_map[static_cast<std::size_t>(b)];
        if (ma >= 0 && mb >= 0) rest.edges.emplace_back(ma, mb);
    }
    for (int i = 0; i < static_cast<int>(rest.nodes.size()); ++i)
        if (rest.degree(i) == 0) return false;
    return optimize(graph_to_instance(rest)).inconsistencies == 0;
}

}  // namespace

SimpleGraph SimpleGraph::create(std::vector<std::string> nodes,
                                const std::vector<std::pair<std::string, std::string>>& edges) {
    SimpleGraph g;
    g.nodes = std::move(nodes);
    std::unordered_set<std::string> seen;
    for (const std::string& n : g.nodes)
        if (!seen.insert(n).second)
            throw PreconditionError("graph node '" + n + "' declared twice");
    for (const auto& [a, b] : edges) {
        int ia = g.node_index(a);
        int ib = g.node_index(b);
        if (ia < 0 || ib < 0)
            throw PreconditionError("graph edge uses undeclared node '" + (ia < 0 ? a : b) + "'");
        if (ia == ib)
            throw PreconditionError("graph has a loop at node '" + a + "'");
        g.edges.emplace_back(ia, ib);
    }
    return g;
}

int SimpleGraph::node_index(const std::string& name) const {
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
        if (nodes[static_cast<std::size_t>(i)] == name) return i;
    return -1;
}

int SimpleGraph::degree(int node) const {
    int d = 0;
    for (const auto& [a, b] : edges)
        if (a == node || b == node) ++d;
    return d;
}

int max_matching_size(const SimpleGraph& g) {
    check_size(g);
    std::unordered_map<std::uint32_t, int> memo;
    return matching_rec(g, 0, memo);
}

bool has_perfect_matching(const SimpleGraph& g, std::uint32_t removed_mask) {
    check_size(g);
    std::unordered_map<std::uint32_t, char> memo;
    return perfect_rec(g, removed_mask, memo);
}

Instance graph_to_instance(const SimpleGraph& g) {
    check_size(g);
    InstanceData data;
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e)
        data.variables.push_back("e" + std::to_string(e));
    for (int n = 0; n < static_cast<int>(g.nodes.size()); ++n) {
        std::vector<std::string> scope;
        for (int e = 0; e < static_cast<int>(g.edges.size()); ++e)
            if (g.edges[static_cast<std::size_t>(e)].first == n ||
                g.edges[static_cast<std::size_t>(e)].second == n)
                scope.push_back("e" + std::to_string(e));
        if (scope.empty())
            throw PreconditionError("node '" + g.nodes[static_cast<std::size_t>(n)] +
                                    "' is isolated and has no exactly-one constraint");
        std::vector<BitTuple> onehot;
        for (int i = 0; i < static_cast<int>(scope.size()); ++i) onehot.push_back(bitmask(i));
        data.constraints.push_back(
            {g.nodes[static_cast<std::size_t>(n)], Relation(std::move(scope), std::move(onehot))});
    }
    return Instance::create(std::move(data));
}

Relation realize(const SimpleGraph& g, const std::vector<std::string>& pins, int workers) {
    check_size(g);
    if (pins.empty()) throw PreconditionError("realize: need at least one pin");
    if (static_cast<int>(pins.size()) > kMaxArity)
        throw PreconditionError("realize: too many pins");
    std::vector<int> pin_nodes;
    std::unordered_set<std::string> seen;
    for (const std::string& p : pins) {
        int idx = g.node_index(p);
        if (idx < 0) throw PreconditionError("realize: pin '" + p + "' is not a graph node");
        if (!seen.insert(p).second) throw PreconditionError("realize: pin '" + p + "' repeated");
        pin_nodes.push_back(idx);
    }

    const BitTuple limit = bitmask(static_cast<int>(pins.size()));
    const int nworkers = std::max(1, std::min<int>(workers, static_cast<int>(limit)));
    std::vector<std::vector<BitTuple>> accepted(static_cast<std::size_t>(nworkers));

    auto work = [&](int stripe) {
        for (BitTuple t = static_cast<BitTuple>(stripe); t < limit;
             t += static_cast<BitTuple>(nworkers)) {
            std::uint32_t removed = 0;
            for (int i = 0; i < static_cast<int>(pin_nodes.size()); ++i)
                if (bit(t, i)) removed |= 1u << pin_nodes[static_cast<std::size_t>(i)];
            bool direct = has_perfect_matching(g, removed);
            bool solved = perfect_via_solver(g, removed);
            if (direct != solved)
                throw InternalError("matcher and solver disagree on tuple " +
                                    std::to_string(t));
            if (direct) accepted[static_cast<std::size_t>(stripe)].push_back(t);
        }
    };

    if (nworkers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nworkers));
        for (int i = 0; i < nworkers; ++i)
            threads.emplace_back([&, i] {
                try {
                    work(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            });
        for (std::thread& t : threads) t.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::vector<BitTuple> tuples;
    for (const auto& part : accepted) tuples.insert(tuples.end(), part.begin(), part.end());
    return Relation(pins, std::move(tuples));
}

PairDecomposition check_pair_decomposition(const Relation& m, BitTuple f, BitTuple g) {
    if (!m.contains(f) || !m.contains(g))
        throw PreconditionError("pair decomposition: tuples must lie in the relation");
    BitTuple diff = f ^ g;
    std::vector<int> positions;
    for (int i = 0; i < m.arity(); ++i)
        if (bit(diff, i)) positions.push_back(i);
    if (positions.size() % 2 != 0)
        throw PreconditionError("pair decomposition: difference has odd size");

    PairDecomposition out;
    for (std::size_t a = 0; a < positions.size(); ++a)
        for (std::size_t b = a + 1; b < positions.size(); ++b) {
            BitTuple mask = bitmask(positions[a]) | bitmask(positions[b]);
            if (m.contains(f ^ mask) && m.contains(g ^ mask))
                out.admissible_pairs.emplace_back(positions[a], positions[b]);
        }

    // pair up the lowest open position first; the admissible list is sorted
    std::vector<std::pair<int, int>> chosen;
    std::unordered_set<int> open(positions.begin(), positions.end());
    auto search = [&](auto&& self) -> bool {
        if (open.empty()) return true;
        int u = *std::min_element(open.begin(), open.end());
        for (const auto& [a, b] : out.admissible_pairs) {
            if (a != u && b != u) continue;
            int other = a == u ? b : a;
            if (!open.count(other)) continue;
            open.erase(u);
            open.erase(other);
            chosen.emplace_back(std::min(u, other), std::max(u, other));
            if (self(self)) return true;
            chosen.pop_back();
            open.insert(u);
            open.insert(other);
        }
        return false;
    };
    if (search(search)) out.partition = chosen;
    return out;
}

Relation counterexample_arity6() {
    return Relation::from_bit_strings(
        {"v1", "v2", "v3", "v4", "v5", "v6"},
        {"000000",
         "100100", "011000", "001100", "001010", "000101", "001001", "010001", "100010",
         "011011", "100111", "110011", "110101", "111010", "001111", "101101", "101011",
         "111100",
         "111111"});
}

SimpleGraph triangle_graph() {
    return SimpleGraph::create({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
}

SimpleGraph petersen_graph() {
    std::vector<std::string> nodes;
    for (int i = 0; i < 5; ++i) nodes.push_back("o" + std::to_string(i));
    for (int i = 0; i < 5; ++i) nodes.push_back("i" + std::to_string(i));
    std::vector<std::pair<std::string, std::string>> edges;
    for (int i = 0; i < 5; ++i)
        edges.emplace_back("o" + std::to_string(i), "o" + std::to_string((i + 1) % 5));
    for (int i = 0; i < 5; ++i) edges.emplace_back("o" + std::to_string(i), "i" + std::to_string(i));
    for (int i = 0; i < 5; ++i)
        edges.emplace_back("i" + std::to_string(i), "i" + std::to_string((i + 2) % 5));
    return SimpleGraph::create(std::move(nodes), edges);
}

Relation fixture_relation_y() {
    return realize(triangle_graph(), {"a", "b", "c"});
}

SimpleGraph fixture_graph_x() {
    return SimpleGraph::create({"p1", "p2", "p3", "p4", "p5", "a", "b"},
                               {{"p1", "p5"},
                                {"p2", "p5"},
                                {"a", "p2"},
                                {"a", "p3"},
                                {"a", "p4"},
                                {"b", "p2"},
                                {"b", "p3"},
                                {"b", "p4"}});
}

std::vector<std::string> fixture_pins_x() {
    return {"p1", "p2", "p3", "p4", "p5"};
}

Relation fixture_relation_x() {
    return realize(fixture_graph_x(), fixture_pins_x());
}

}  // namespace edgecsp
