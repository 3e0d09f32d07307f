#include "edgecsp/walks.hpp"

#include <algorithm>
#include <map>
#include <queue>

namespace edgecsp {

Walk::Walk(int start_var) : start_(start_var) { visited_vars_.insert(start_var); }

std::uint64_t Walk::half_edge_key(int var, int constraint) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(var)) << 32)
           | static_cast<std::uint32_t>(constraint);
}

int Walk::var_at(int i) const {
    if (i == 0)
        return start_;
    return steps_[static_cast<std::size_t>(i - 1)].var;
}

void Walk::append(const Instance& inst, int constraint, int var) {
    if (tail_constraint_)
        throw PreconditionError("walk: cannot extend past a half-integral tail");
    if (closed())
        throw PreconditionError("walk: cannot extend a closed walk");
    const int from = end_var();
    if (inst.position_in(from, constraint) < 0 || inst.position_in(var, constraint) < 0)
        throw PreconditionError("walk: step does not follow half-edges of the instance");
    if (from == var)
        throw PreconditionError("walk: step must join two distinct variables");
    const auto in_key = half_edge_key(from, constraint);
    const auto out_key = half_edge_key(var, constraint);
    if (used_half_edges_.count(in_key) || used_half_edges_.count(out_key))
        throw PreconditionError("walk: half-edge traversed twice");
    if (visited_vars_.count(var) && var != start_)
        throw PreconditionError("walk: interior variable visited twice");
    used_half_edges_.insert(in_key);
    used_half_edges_.insert(out_key);
    visited_vars_.insert(var);
    steps_.push_back({constraint, var});
}

void Walk::append_tail(const Instance& inst, int constraint) {
    if (tail_constraint_)
        throw PreconditionError("walk: tail already present");
    if (closed())
        throw PreconditionError("walk: cannot extend a closed walk");
    const int from = end_var();
    if (inst.position_in(from, constraint) < 0)
        throw PreconditionError("walk: tail does not follow a half-edge of the instance");
    const auto key = half_edge_key(from, constraint);
    if (used_half_edges_.count(key))
        throw PreconditionError("walk: half-edge traversed twice");
    used_half_edges_.insert(key);
    tail_constraint_ = constraint;
}

bool Walk::uses_half_edge(int var, int constraint) const {
    return used_half_edges_.count(half_edge_key(var, constraint)) > 0;
}

bool Walk::visits_var(int var) const { return visited_vars_.count(var) > 0; }

Walk Walk::reversed() const {
    ECSP_CHECK(!half_integral(), "walk: cannot reverse a half-integral walk");
    Walk out(end_var());
    out.start_ = end_var();
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
        const int next_var = (it + 1 == steps_.rend()) ? start_ : (it + 1)->var;
        out.steps_.push_back({it->constraint, next_var});
        out.visited_vars_.insert(next_var);
        out.used_half_edges_.insert(half_edge_key(it->var, it->constraint));
        out.used_half_edges_.insert(half_edge_key(next_var, it->constraint));
    }
    return out;
}

Walk Walk::prefix(int upto) const {
    ECSP_CHECK(upto >= 0 && upto <= length(), "walk: prefix length out of range");
    Walk out(start_);
    for (int i = 0; i < upto; ++i) {
        const Step& s = steps_[static_cast<std::size_t>(i)];
        const int from = out.end_var();
        out.used_half_edges_.insert(half_edge_key(from, s.constraint));
        out.used_half_edges_.insert(half_edge_key(s.var, s.constraint));
        out.visited_vars_.insert(s.var);
        out.steps_.push_back(s);
    }
    return out;
}

std::string Walk::to_string(const Instance& inst) const {
    std::string s = inst.variable(start_);
    for (const Step& st : steps_) {
        s += " -" + inst.constraint_id(st.constraint) + "- ";
        s += inst.variable(st.var);
    }
    if (tail_constraint_)
        s += " -" + inst.constraint_id(*tail_constraint_);
    return s;
}

EdgeLabeling apply_walk(const Instance& inst, const EdgeLabeling& f, const Walk& q) {
    EdgeLabeling g = f;
    int prev = q.start();
    for (const Walk::Step& s : q.steps()) {
        const BitTuple mask = bitmask(inst.position_in(prev, s.constraint))
                              | bitmask(inst.position_in(s.var, s.constraint));
        g.toggle(s.constraint, mask);
        prev = s.var;
    }
    if (q.half_integral())
        g.toggle(q.tail_constraint(), bitmask(inst.position_in(prev, q.tail_constraint())));
    return g;
}

bool is_f_walk(const Instance& inst, const EdgeLabeling& f, const Walk& q) {
    if (q.closed())
        return false;
    // interior variables: everything strictly between the two endpoints
    const int interior_end = q.half_integral() ? q.length() : q.length() - 1;
    for (int i = 1; i <= interior_end; ++i)
        if (!variable_consistent(inst, f, q.var_at(i)))
            return false;
    // prefix validity, checked incrementally (only the stepped-on constraint
    // changes between consecutive prefixes)
    EdgeLabeling g = f;
    int prev = q.start();
    for (const Walk::Step& s : q.steps()) {
        const BitTuple mask = bitmask(inst.position_in(prev, s.constraint))
                              | bitmask(inst.position_in(s.var, s.constraint));
        g.toggle(s.constraint, mask);
        if (!inst.relation(s.constraint).contains(g.tuple(s.constraint)))
            return false;
        prev = s.var;
    }
    if (q.half_integral()) {
        const int c = q.tail_constraint();
        g.toggle(c, bitmask(inst.position_in(prev, c)));
        if (!inst.relation(c).contains(g.tuple(c)))
            return false;
    }
    return true;
}

bool is_augmenting(const Instance& inst, const EdgeLabeling& f, const Walk& q) {
    if (!is_f_walk(inst, f, q))
        return false;
    if (variable_consistent(inst, f, q.start()))
        return false;
    if (q.half_integral())
        return true;
    return q.length() > 0 && q.end_var() != q.start()
           && !variable_consistent(inst, f, q.end_var());
}

// --- timestamped DAGs -------------------------------------------------------

namespace {

// node keys for order checking: variables >= 0, constraint nodes < 0
struct NodeKey {
    bool is_var;
    int index;  // var index, or index into constraint_nodes
    bool operator<(const NodeKey& o) const {
        return std::tie(is_var, index) < std::tie(o.is_var, o.index);
    }
};

}  // namespace

FdagReport validate_fdag(const Instance& inst, const EdgeLabeling& f, const FDag& dag) {
    FdagReport report;
    auto add = [&](FdagViolation v, std::string detail) {
        report.violations.push_back(v);
        report.details.push_back(std::move(detail));
    };

    // indexed constraint nodes; map (constraint, timestamp) -> node index
    std::map<std::pair<int, int>, int> cnode_index;
    for (std::size_t i = 0; i < dag.constraint_nodes.size(); ++i)
        cnode_index[dag.constraint_nodes[i]] = static_cast<int>(i);

    // 1: edges project to half-edges; edges reference listed nodes
    for (const FDagEdge& e : dag.edges) {
        if (e.var < 0 || e.var >= inst.var_count() || e.constraint < 0
            || e.constraint >= inst.constraint_count()
            || inst.position_in(e.var, e.constraint) < 0) {
            add(FdagViolation::EdgeNotInGraph,
                "edge does not project to a half-edge of the instance");
            continue;
        }
        if (!cnode_index.count({e.constraint, e.timestamp}))
            add(FdagViolation::EdgeNotInGraph,
                "edge references unlisted constraint node "
                    + inst.constraint_id(e.constraint) + "^" + std::to_string(e.timestamp));
    }

    // 2: at most one timestamped copy per half-edge (either direction)
    std::map<std::pair<int, int>, int> half_edge_uses;
    for (const FDagEdge& e : dag.edges)
        ++half_edge_uses[{e.var, e.constraint}];
    for (const auto& [he, uses] : half_edge_uses)
        if (uses > 1)
            add(FdagViolation::DuplicateHalfEdge,
                "half-edge {" + inst.variable(he.first) + "," + inst.constraint_id(he.second)
                    + "} used " + std::to_string(uses) + " times");

    // 3: each variable has at most one incoming edge
    std::map<int, int> incoming;
    for (const FDagEdge& e : dag.edges)
        if (!e.from_var)
            ++incoming[e.var];
    for (const auto& [v, n] : incoming)
        if (n > 1)
            add(FdagViolation::MultipleIncoming,
                "variable " + inst.variable(v) + " has " + std::to_string(n)
                    + " incoming edges");

    // 4: distinct timestamps; a total order extends both edges and timestamps
    {
        std::map<int, int> stamp_count;
        for (const auto& [c, t] : dag.constraint_nodes)
            ++stamp_count[t];
        bool stamps_ok = true;
        for (const auto& [t, n] : stamp_count)
            if (n > 1) {
                add(FdagViolation::OrderCycle,
                    "timestamp " + std::to_string(t) + " used by "
                        + std::to_string(n) + " constraint nodes");
                stamps_ok = false;
            }
        if (stamps_ok) {
            // precedence digraph: DAG edges plus the timestamp chain
            std::map<NodeKey, std::vector<NodeKey>> succ;
            std::map<NodeKey, int> indeg;
            auto touch = [&](NodeKey k) {
                succ.emplace(k, std::vector<NodeKey>{});
                indeg.emplace(k, 0);
            };
            for (int v : dag.var_nodes)
                touch({true, v});
            for (std::size_t i = 0; i < dag.constraint_nodes.size(); ++i)
                touch({false, static_cast<int>(i)});
            auto link = [&](NodeKey a, NodeKey b) {
                touch(a);
                touch(b);
                succ[a].push_back(b);
                ++indeg[b];
            };
            for (const FDagEdge& e : dag.edges) {
                auto it = cnode_index.find({e.constraint, e.timestamp});
                if (it == cnode_index.end())
                    continue;
                const NodeKey cn{false, it->second};
                const NodeKey vn{true, e.var};
                if (e.from_var)
                    link(vn, cn);
                else
                    link(cn, vn);
            }
            std::vector<std::pair<int, int>> by_stamp;
            for (std::size_t i = 0; i < dag.constraint_nodes.size(); ++i)
                by_stamp.emplace_back(dag.constraint_nodes[i].second, static_cast<int>(i));
            std::sort(by_stamp.begin(), by_stamp.end());
            for (std::size_t i = 1; i < by_stamp.size(); ++i)
                link({false, by_stamp[i - 1].second}, {false, by_stamp[i].second});

            std::queue<NodeKey> ready;
            for (const auto& [k, d] : indeg)
                if (d == 0)
                    ready.push(k);
            std::size_t seen = 0;
            while (!ready.empty()) {
                NodeKey k = ready.front();
                ready.pop();
                ++seen;
                for (NodeKey nxt : succ[k])
                    if (--indeg[nxt] == 0)
                        ready.push(nxt);
            }
            if (seen != indeg.size())
                add(FdagViolation::OrderCycle,
                    "no total order extends the edges and the timestamp order");
        }
    }

    // group edges by constraint node for the transition checks
    std::map<int, std::vector<const FDagEdge*>> at_node;
    for (const FDagEdge& e : dag.edges) {
        auto it = cnode_index.find({e.constraint, e.timestamp});
        if (it != cnode_index.end() && inst.position_in(e.var, e.constraint) >= 0)
            at_node[it->second].push_back(&e);
    }

    // 5: incoming u plus any (v, same node) means f(C)+u+v stays in C
    for (const auto& [node, edges] : at_node) {
        const int c = dag.constraint_nodes[static_cast<std::size_t>(node)].first;
        for (const FDagEdge* in : edges) {
            if (in->from_var == false)
                continue;  // need an incoming edge uC^t
            for (const FDagEdge* other : edges) {
                if (other == in)
                    continue;
                const BitTuple moved = f.tuple(c)
                                       ^ bitmask(inst.position_in(in->var, c))
                                       ^ bitmask(inst.position_in(other->var, c));
                if (!inst.relation(c).contains(moved))
                    add(FdagViolation::MissingTransition,
                        "node " + inst.constraint_id(c) + "^"
                            + std::to_string(in->timestamp) + " lacks transition "
                            + inst.variable(in->var) + "->" + inst.variable(other->var));
            }
        }
    }

    // 6: no shortcuts between two copies of the same constraint
    for (const auto& [node_a, edges_a] : at_node) {
        for (const auto& [node_b, edges_b] : at_node) {
            const auto& [ca, ta] = dag.constraint_nodes[static_cast<std::size_t>(node_a)];
            const auto& [cb, tb] = dag.constraint_nodes[static_cast<std::size_t>(node_b)];
            if (ca != cb || ta >= tb)
                continue;
            for (const FDagEdge* in : edges_a) {
                if (!in->from_var)
                    continue;
                for (const FDagEdge* later : edges_b) {
                    const BitTuple moved = f.tuple(ca)
                                           ^ bitmask(inst.position_in(in->var, ca))
                                           ^ bitmask(inst.position_in(later->var, ca));
                    if (inst.relation(ca).contains(moved))
                        add(FdagViolation::ShortcutTransition,
                            "shortcut " + inst.variable(in->var) + " -> "
                                + inst.constraint_id(ca) + "^" + std::to_string(ta)
                                + " bypassing copy ^" + std::to_string(tb) + " via "
                                + inst.variable(later->var));
                }
            }
        }
    }

    return report;
}

EdgeLabeling apply_dag(const Instance& inst, const EdgeLabeling& f, const FDag& dag) {
    if (dag.edges.empty())
        throw PreconditionError("apply_dag: empty DAG");

    // shape bookkeeping over the endpoints actually touched by edges
    std::map<int, int> var_in;
    std::map<std::pair<int, int>, int> half_edges;
    for (const FDagEdge& e : dag.edges) {
        if (inst.position_in(e.var, e.constraint) < 0)
            throw PreconditionError("apply_dag: edge is not a half-edge of the instance");
        if (++half_edges[{e.var, e.constraint}] > 1)
            throw PreconditionError("apply_dag: half-edge used twice");
        if (e.from_var)
            var_in.emplace(e.var, 0);
        else
            ++var_in[e.var];
    }

    std::vector<int> sources;
    for (const auto& [v, d] : var_in)
        if (d == 0)
            sources.push_back(v);

    // unique-successor maps; multiple out-edges break the path shapes
    std::map<int, const FDagEdge*> var_succ;
    std::map<std::pair<int, int>, const FDagEdge*> cn_succ;
    bool shape_ok = sources.size() == 1 || sources.size() == 2;
    for (const FDagEdge& e : dag.edges) {
        if (e.from_var) {
            if (!var_succ.emplace(e.var, &e).second)
                shape_ok = false;
        } else {
            if (!cn_succ.emplace(std::make_pair(e.constraint, e.timestamp), &e).second)
                shape_ok = false;
        }
    }

    // follow each source to its end; every edge must be covered exactly once
    std::size_t traversed = 0;
    std::pair<int, int> meeting{-1, -1};
    bool met_twice_same = true;
    if (shape_ok) {
        for (std::size_t s = 0; s < sources.size(); ++s) {
            int cur = sources[s];
            while (true) {
                if (traversed > dag.edges.size()) {
                    shape_ok = false;  // runaway: walked into a cycle
                    break;
                }
                auto it = var_succ.find(cur);
                if (it == var_succ.end()) {
                    // variable end: only legal for the single-path shape
                    if (sources.size() != 1)
                        shape_ok = false;
                    break;
                }
                ++traversed;
                const std::pair<int, int> cn{it->second->constraint, it->second->timestamp};
                auto out = cn_succ.find(cn);
                if (out == cn_succ.end()) {
                    // constraint end: the meeting node of the two-path shape
                    if (sources.size() != 2)
                        shape_ok = false;
                    if (s == 0)
                        meeting = cn;
                    else
                        met_twice_same = (meeting == cn);
                    break;
                }
                ++traversed;
                cur = out->second->var;
            }
            if (!shape_ok)
                break;
        }
        if (sources.size() == 2 && !met_twice_same)
            shape_ok = false;
        if (traversed != dag.edges.size())
            shape_ok = false;  // leftover edges (e.g. a detached cycle)
    }
    if (!shape_ok)
        throw PreconditionError(
            "apply_dag: DAG is neither a single alternating path nor two paths "
            "meeting in their final constraint");

    EdgeLabeling g = f;
    for (const FDagEdge& e : dag.edges)
        g.toggle(e.constraint, bitmask(inst.position_in(e.var, e.constraint)));
    ECSP_CHECK(is_valid(inst, g), "apply_dag produced an invalid labeling");
    return g;
}

}  // namespace edgecsp
