#include "edgecsp/blossom_solver.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>
#include <utility>

namespace edgecsp {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Walk in `from` rebuilt against `to` by variable name and constraint id.
Walk rename_walk(const Walk& walk, const Instance& from, const Instance& to) {
    int start = to.variable_index(from.variable(walk.start()));
    ECSP_CHECK(start >= 0, "renamed walk start missing from target instance");
    Walk out(start);
    for (const Walk::Step& s : walk.steps()) {
        int c = to.constraint_index(from.constraint_id(s.constraint));
        int v = to.variable_index(from.variable(s.var));
        ECSP_CHECK(c >= 0 && v >= 0, "renamed walk node missing from target instance");
        out.append(to, c, v);
    }
    ECSP_CHECK(!walk.half_integral(), "renamed walks are integral");
    return out;
}

// Single transition xCy tested as a standalone one-step f-walk.
bool one_step_walk(const Instance& inst, const EdgeLabeling& f, int x, int c, int y) {
    if (x == y) return false;
    int px = inst.position_in(x, c);
    int py = inst.position_in(y, c);
    if (px < 0 || py < 0) return false;
    return inst.relation(c).contains(f.tuple(c) ^ bitmask(px) ^ bitmask(py));
}

// walk extended by one step when the extension is structurally sound and a
// full f-walk; nullopt otherwise.
std::optional<Walk> try_extend(const Instance& inst, const EdgeLabeling& f, const Walk& walk,
                               int c, int target) {
    int end = walk.end_var();
    if (end == target) return std::nullopt;
    if (inst.position_in(end, c) < 0 || inst.position_in(target, c) < 0) return std::nullopt;
    if (walk.uses_half_edge(end, c) || walk.uses_half_edge(target, c)) return std::nullopt;
    if (walk.visits_var(target)) return std::nullopt;
    Walk out = walk;
    out.append(inst, c, target);
    if (!is_f_walk(inst, f, out)) return std::nullopt;
    return out;
}

struct CNodeRec {
    int constraint = -1;
    int timestamp = 0;
    int parent_var = -1;
    BitTuple snapshot = 0;  // f(C) at expansion time, fixed for this node
    std::vector<int> child_vars;
};

struct VarRec {
    bool in_tree = false;
    int parent_cnode = -1;  // -1: root
    int root = -1;
};

// One round of forest growth for a fixed labeling. Finds either an
// augmenting walk or a blossom, or certifies that the forest is exhausted.
class Grower {
  public:
    struct Outcome {
        enum Kind { NoImprovement, Augmented, Blossomed } kind = NoImprovement;
        EdgeLabeling g;       // Augmented: f with the walk applied
        EdgeLabeling f_stem;  // Blossomed: f after any stem flip
        BlossomData blossom;
    };

    Grower(const Instance& inst, const EdgeLabeling& f, const SolveOptions& opts, int depth)
        : inst_(inst), f_(f), opts_(opts), depth_(depth), vars_(inst.var_count()) {}

    Outcome run();

  private:
    void trace(TraceEvent ev) {
        if (opts_.trace) opts_.trace->push_back(std::move(ev));
    }

    void add_root(int v) {
        vars_[v].in_tree = true;
        vars_[v].parent_cnode = -1;
        vars_[v].root = v;
        enqueue_edges(v);
        after_mutation();
    }

    int add_cnode(int c, int t, int v) {
        CNodeRec rec;
        rec.constraint = c;
        rec.timestamp = t;
        rec.parent_var = v;
        rec.snapshot = f_.tuple(c);
        cnodes_.push_back(rec);
        used_half_edge_.insert(key(v, c));
        after_mutation();
        return static_cast<int>(cnodes_.size()) - 1;
    }

    void add_child(int cn, int w) {
        cnodes_[cn].child_vars.push_back(w);
        vars_[w].in_tree = true;
        vars_[w].parent_cnode = cn;
        vars_[w].root = vars_[cnodes_[cn].parent_var].root;
        used_half_edge_.insert(key(w, cnodes_[cn].constraint));
        enqueue_edges(w);
        after_mutation();
    }

    void enqueue_edges(int v) {
        for (const Instance::Incidence& inc : inst_.incidences(v))
            frontier_.emplace_back(v, inc.constraint);
    }

    static std::uint64_t key(int v, int c) {
        return (static_cast<std::uint64_t>(v) << 32) | static_cast<std::uint32_t>(c);
    }

    FDag forest_dag() const;
    void after_mutation() const;
    void check_star(int w, int c, int t) const;

    Walk walk_to(int v) const;  // tree path from the root of v down to v
    int lca_kind(int v, int w, int* out_node) const;  // 0: variable, 1: cnode

    Outcome augment(int v, int cn, int w) const;
    Outcome make_blossom(int v, int cn, int w) const;

    const Instance& inst_;
    const EdgeLabeling& f_;
    const SolveOptions& opts_;
    int depth_;

    std::vector<VarRec> vars_;
    std::vector<CNodeRec> cnodes_;
    std::deque<std::pair<int, int>> frontier_;
    std::unordered_set<std::uint64_t> used_half_edge_;
};

FDag Grower::forest_dag() const {
    FDag dag;
    for (int v = 0; v < static_cast<int>(vars_.size()); ++v)
        if (vars_[v].in_tree) dag.var_nodes.push_back(v);
    for (const CNodeRec& cn : cnodes_) {
        dag.constraint_nodes.emplace_back(cn.constraint, cn.timestamp);
        dag.edges.push_back({true, cn.parent_var, cn.constraint, cn.timestamp});
        for (int w : cn.child_vars)
            dag.edges.push_back({false, w, cn.constraint, cn.timestamp});
    }
    return dag;
}

void Grower::after_mutation() const {
    if (!opts_.validate_forest && !opts_.hooks.on_forest) return;
    FDag dag = forest_dag();
    if (opts_.validate_forest) {
        FdagReport report = validate_fdag(inst_, f_, dag);
        ECSP_CHECK(report.ok(), "search forest: " + join(report.details, "; "));
    }
    if (opts_.hooks.on_forest) opts_.hooks.on_forest(inst_, f_, dag);
}

// The forest with the expanded node's outgoing edges removed and the
// just-discovered transition into it added stays a valid DAG; checked right
// before an augmentation or blossom fires.
void Grower::check_star(int w, int c, int t) const {
    if (!opts_.validate_forest && !opts_.hooks.on_forest_star) return;
    FDag dag = forest_dag();
    std::erase_if(dag.edges, [&](const FDagEdge& e) {
        return !e.from_var && e.constraint == c && e.timestamp == t;
    });
    dag.edges.push_back({true, w, c, t});
    if (opts_.validate_forest) {
        FdagReport report = validate_fdag(inst_, f_, dag);
        ECSP_CHECK(report.ok(), "extended forest: " + join(report.details, "; "));
    }
    if (opts_.hooks.on_forest_star) opts_.hooks.on_forest_star(inst_, f_, dag);
}

Walk Grower::walk_to(int v) const {
    std::vector<std::pair<int, int>> up;  // (constraint, var) from v towards the root
    int cur = v;
    while (vars_[cur].parent_cnode >= 0) {
        const CNodeRec& cn = cnodes_[vars_[cur].parent_cnode];
        up.emplace_back(cn.constraint, cur);
        cur = cn.parent_var;
    }
    Walk walk(cur);
    for (auto it = up.rbegin(); it != up.rend(); ++it) walk.append(inst_, it->first, it->second);
    return walk;
}

// Lowest common ancestor in the alternating tree. Returns 0 and the variable
// index, or 1 and the constraint-node index.
int Grower::lca_kind(int v, int w, int* out_node) const {
    std::unordered_set<std::uint64_t> seen;  // tagged nodes on v's root path
    auto tag = [](int kind, int idx) {
        return (static_cast<std::uint64_t>(kind) << 32) | static_cast<std::uint32_t>(idx);
    };
    int cur = v;
    seen.insert(tag(0, cur));
    while (vars_[cur].parent_cnode >= 0) {
        seen.insert(tag(1, vars_[cur].parent_cnode));
        cur = cnodes_[vars_[cur].parent_cnode].parent_var;
        seen.insert(tag(0, cur));
    }
    cur = w;
    while (true) {
        if (seen.count(tag(0, cur))) {
            *out_node = cur;
            return 0;
        }
        int pc = vars_[cur].parent_cnode;
        ECSP_CHECK(pc >= 0, "no common ancestor inside one tree");
        if (seen.count(tag(1, pc))) {
            *out_node = pc;
            return 1;
        }
        cur = cnodes_[pc].parent_var;
    }
}

Grower::Outcome Grower::augment(int v, int cn, int w) const {
    const CNodeRec& node = cnodes_[cn];
    Walk p = walk_to(v);
    p.append(inst_, node.constraint, w);
    int cur = w;
    while (vars_[cur].parent_cnode >= 0) {
        const CNodeRec& up = cnodes_[vars_[cur].parent_cnode];
        p.append(inst_, up.constraint, up.parent_var);
        cur = up.parent_var;
    }
    ECSP_CHECK(is_augmenting(inst_, f_, p), "forest produced a non-augmenting walk");
    Outcome out;
    out.kind = Outcome::Augmented;
    out.g = apply_walk(inst_, f_, p);
    ECSP_CHECK(inconsistency_count(inst_, out.g) == inconsistency_count(inst_, f_) - 2,
               "augmentation did not reduce the count by two");
    return out;
}

Grower::Outcome Grower::make_blossom(int v, int cn, int w) const {
    const CNodeRec& node = cnodes_[cn];
    int lca = -1;
    int kind = lca_kind(v, w, &lca);

    Outcome out;
    out.kind = Outcome::Blossomed;
    BlossomData& b = out.blossom;

    // chain of (cnode, var) pairs from `from` up to, excluding, the stop node
    auto chain_up = [&](int from, int stop_kind, int stop) {
        std::vector<std::pair<int, int>> up;
        int cur = from;
        while (!(stop_kind == 0 && cur == stop)) {
            int pc = vars_[cur].parent_cnode;
            ECSP_CHECK(pc >= 0, "ran past the root while extracting a blossom");
            if (stop_kind == 1 && pc == stop) break;
            up.emplace_back(pc, cnodes_[pc].parent_var);
            cur = cnodes_[pc].parent_var;
        }
        return up;
    };

    int base;  // b_0 = b_k
    if (kind == 0) {
        // a variable needs two outgoing edges to be a meeting point, and
        // only roots have a second half-edge to spare
        base = lca;
        ECSP_CHECK(vars_[base].parent_cnode < 0, "two branches met below the root");
        out.f_stem = f_;
    } else {
        // both branches pass through the constraint node lca; the child on
        // v's side becomes the new inconsistent variable via the stem flip
        auto v_side = chain_up(v, 1, lca);
        base = v_side.empty() ? v : v_side.back().second;
        Walk stem = walk_to(base);
        ECSP_CHECK(is_f_walk(inst_, f_, stem) || stem.length() == 0,
                   "stem is not an f-walk");
        out.f_stem = apply_walk(inst_, f_, stem);
        ECSP_CHECK(inconsistency_count(inst_, out.f_stem) == inconsistency_count(inst_, f_),
                   "stem flip changed the inconsistency count");
        b.stem = std::move(stem);
    }

    // descend from the base to v, cross C^t to w, then climb back
    b.b_vars.push_back(base);
    auto down = chain_up(v, 0, base);
    for (auto it = down.rbegin(); it != down.rend(); ++it) {
        b.b_constraints.push_back(cnodes_[it->first].constraint);
        b.stamps.push_back(cnodes_[it->first].timestamp);
        b.b_vars.push_back(it == down.rend() - 1 ? v : (it + 1)->second);
    }
    b.b_constraints.push_back(node.constraint);
    b.stamps.push_back(node.timestamp);
    b.ell = static_cast<int>(b.b_constraints.size());
    b.b_vars.push_back(w);
    int cur = w;
    while (true) {
        int pc = vars_[cur].parent_cnode;
        if (kind == 1 && pc == lca) break;
        if (kind == 0 && cur == base) break;
        ECSP_CHECK(pc >= 0, "blossom climb ran past the root");
        b.b_constraints.push_back(cnodes_[pc].constraint);
        b.stamps.push_back(cnodes_[pc].timestamp);
        b.b_vars.push_back(cnodes_[pc].parent_var);
        cur = cnodes_[pc].parent_var;
    }
    if (kind == 1) {
        b.b_constraints.push_back(cnodes_[lca].constraint);
        b.stamps.push_back(cnodes_[lca].timestamp);
        b.b_vars.push_back(base);
    }

    const int k = b.k();
    ECSP_CHECK(k >= 2 && b.b_vars.front() == b.b_vars.back(), "malformed blossom walk");
    ECSP_CHECK(b.b_constraints.front() != b.b_constraints.back(),
               "blossom enters and leaves its base through one constraint");
    ECSP_CHECK(!variable_consistent(inst_, out.f_stem, base), "blossom base is consistent");
    for (int i = 1; i < k; ++i)
        ECSP_CHECK(variable_consistent(inst_, out.f_stem, b.b_vars[i]),
                   "blossom interior variable is inconsistent");
    for (int i = 1; i < b.ell; ++i)
        ECSP_CHECK(b.stamps[i - 1] < b.stamps[i], "blossom timestamps not increasing");
    for (int i = b.ell; i < k; ++i)
        ECSP_CHECK(b.stamps[i - 1] > b.stamps[i], "blossom timestamps not decreasing");

    if (opts_.validate_forest) {
        FdagReport report = validate_fdag(inst_, out.f_stem, b.dag());
        ECSP_CHECK(report.ok(), "blossom DAG: " + join(report.details, "; "));
    }
    if (opts_.hooks.on_blossom) opts_.hooks.on_blossom(inst_, out.f_stem, b);
    return out;
}

Grower::Outcome Grower::run() {
    int timestamp = 1;
    for (int v : inconsistent_variables(inst_, f_)) add_root(v);

    while (!frontier_.empty()) {
        auto [v, c] = frontier_.front();
        frontier_.pop_front();
        if (used_half_edge_.count(key(v, c))) continue;

        int t = timestamp++;
        int cn = add_cnode(c, t, v);
        trace({{"event", "expand"},
               {"depth", depth_},
               {"constraint", inst_.constraint_id(c)},
               {"timestamp", t},
               {"via", inst_.variable(v)}});

        BitTuple fc = cnodes_[cn].snapshot;
        int pv = inst_.position_in(v, c);
        const std::vector<int>& scope = inst_.scope_vars(c);
        for (int pos = 0; pos < static_cast<int>(scope.size()); ++pos) {
            int w = scope[pos];
            if (w == v) continue;
            if (!inst_.relation(c).contains(fc ^ bitmask(pv) ^ bitmask(pos))) continue;
            if (!vars_[w].in_tree) {
                add_child(cn, w);
            } else if (vars_[w].parent_cnode >= 0 &&
                       cnodes_[vars_[w].parent_cnode].constraint == c) {
                // reached through another copy of this constraint; skip
            } else if (vars_[w].root != vars_[v].root) {
                check_star(w, c, t);
                Outcome out = augment(v, cn, w);
                trace({{"event", "augment"}, {"depth", depth_}, {"meet", inst_.variable(w)}});
                return out;
            } else {
                check_star(w, c, t);
                Outcome out = make_blossom(v, cn, w);
                trace({{"event", "blossom"},
                       {"depth", depth_},
                       {"length", out.blossom.k()},
                       {"meeting_index", out.blossom.ell},
                       {"stem", out.blossom.stem ? out.blossom.stem->length() : 0}});
                return out;
            }
        }
    }
    return {};
}

std::string fresh_var_name(const InstanceData& data, const std::vector<std::string>& pending,
                           std::string base) {
    auto taken = [&](const std::string& name) {
        if (std::find(data.variables.begin(), data.variables.end(), name) != data.variables.end())
            return true;
        return std::find(pending.begin(), pending.end(), name) != pending.end();
    };
    while (taken(base)) base += "'";
    return base;
}

std::string fresh_constraint_id(const InstanceData& data, std::string base) {
    auto taken = [&](const std::string& id) {
        for (const ConstraintSpec& c : data.constraints)
            if (c.id == id) return true;
        return false;
    };
    while (taken(base)) base += "'";
    return base;
}

}  // namespace

FDag BlossomData::dag() const {
    FDag out;
    const int kk = k();
    for (int i = 0; i < kk; ++i) out.var_nodes.push_back(b_vars[i]);
    for (int i = 0; i < kk; ++i) out.constraint_nodes.emplace_back(b_constraints[i], stamps[i]);
    for (int i = 1; i <= ell; ++i)
        out.edges.push_back({true, b_vars[i - 1], b_constraints[i - 1], stamps[i - 1]});
    for (int i = 1; i < ell; ++i)
        out.edges.push_back({false, b_vars[i], b_constraints[i - 1], stamps[i - 1]});
    for (int i = ell; i <= kk; ++i)
        out.edges.push_back({true, b_vars[i], b_constraints[i - 1], stamps[i - 1]});
    for (int i = ell + 1; i <= kk; ++i)
        out.edges.push_back({false, b_vars[i - 1], b_constraints[i - 1], stamps[i - 1]});
    return out;
}

ContractionRecord contract(const Instance& inst, const EdgeLabeling& f,
                           const BlossomData& blossom) {
    const int k = blossom.k();
    ECSP_CHECK(k >= 2, "blossom too short to contract");

    std::unordered_set<int> bvars(blossom.b_vars.begin(), blossom.b_vars.end());
    ECSP_CHECK(static_cast<int>(bvars.size()) == k, "blossom visits a variable twice");
    std::vector<int> l_constraints;  // distinct, C_1 first
    for (int c : blossom.b_constraints)
        if (std::find(l_constraints.begin(), l_constraints.end(), c) == l_constraints.end())
            l_constraints.push_back(c);

    const InstanceData& old = inst.data();
    InstanceData data;
    for (int v = 0; v < inst.var_count(); ++v)
        if (!bvars.count(v)) data.variables.push_back(inst.variable(v));

    std::vector<std::string> new_vars;
    std::vector<std::string> l_ids;
    for (int c : l_constraints) {
        l_ids.push_back(inst.constraint_id(c));
        new_vars.push_back(
            fresh_var_name(old, new_vars, "v[" + inst.constraint_id(c) + "]"));
    }
    data.variables.insert(data.variables.end(), new_vars.begin(), new_vars.end());

    for (int c = 0; c < inst.constraint_count(); ++c) {
        auto lpos = std::find(l_constraints.begin(), l_constraints.end(), c);
        if (lpos == l_constraints.end()) {
            for (int v : inst.scope_vars(c))
                ECSP_CHECK(!bvars.count(v),
                           "blossom variable occurs outside the blossom constraints");
            data.constraints.push_back(old.constraints[static_cast<std::size_t>(c)]);
            continue;
        }
        const Relation& rel = inst.relation(c);
        const std::vector<int>& scope = inst.scope_vars(c);
        std::vector<int> keep;  // scope positions surviving the contraction
        std::vector<std::string> new_scope;
        for (int pos = 0; pos < static_cast<int>(scope.size()); ++pos) {
            if (bvars.count(scope[pos])) continue;
            keep.push_back(pos);
            new_scope.push_back(rel.scope()[static_cast<std::size_t>(pos)]);
        }
        std::size_t vd = lpos - l_constraints.begin();
        new_scope.push_back(new_vars[vd]);
        BitTuple vd_bit = bitmask(static_cast<int>(keep.size()));

        BitTuple fd = f.tuple(c);
        std::vector<BitTuple> tuples;
        for (BitTuple alpha : rel.tuples()) {
            int dz = 0;
            for (int pos = 0; pos < static_cast<int>(scope.size()); ++pos)
                if (bvars.count(scope[pos]) && bit(alpha, pos) != bit(fd, pos)) ++dz;
            if (dz > 1) continue;
            BitTuple beta = 0;
            for (std::size_t i = 0; i < keep.size(); ++i)
                if (bit(alpha, keep[i])) beta |= bitmask(static_cast<int>(i));
            tuples.push_back(dz == 0 ? beta : beta | vd_bit);
        }
        Relation rebuilt(new_scope, std::move(tuples));
        ECSP_CHECK(is_delta_matroid(rebuilt) && is_even(rebuilt),
                   "contracted constraint is not an even delta-matroid");
        data.constraints.push_back({inst.constraint_id(c), std::move(rebuilt)});
    }

    std::string n_id = fresh_constraint_id(old, "N");
    std::vector<BitTuple> onehot;
    for (std::size_t i = 0; i < new_vars.size(); ++i) onehot.push_back(bitmask(static_cast<int>(i)));
    data.constraints.push_back({n_id, Relation(new_vars, std::move(onehot))});

    ContractionRecord rec;
    rec.original = inst;
    rec.f_before = f;
    rec.contracted = Instance::create(std::move(data));
    rec.blossom = blossom;
    rec.new_constraint = n_id;
    rec.l_ids = std::move(l_ids);
    rec.new_vars = std::move(new_vars);

    std::vector<BitTuple> fb(static_cast<std::size_t>(rec.contracted.constraint_count()), 0);
    for (int c = 0; c < inst.constraint_count(); ++c) {
        int nc = rec.contracted.constraint_index(inst.constraint_id(c));
        ECSP_CHECK(nc >= 0, "constraint lost during contraction");
        auto lpos = std::find(l_constraints.begin(), l_constraints.end(), c);
        if (lpos == l_constraints.end()) {
            fb[static_cast<std::size_t>(nc)] = f.tuple(c);
            continue;
        }
        BitTuple fd = f.tuple(c);
        BitTuple beta = 0;
        int out_pos = 0;
        for (int pos = 0; pos < static_cast<int>(inst.scope_vars(c).size()); ++pos) {
            if (bvars.count(inst.scope_vars(c)[pos])) continue;
            if (bit(fd, pos)) beta |= bitmask(out_pos);
            ++out_pos;
        }
        fb[static_cast<std::size_t>(nc)] = beta;  // v_C coordinate stays 0
    }
    fb[static_cast<std::size_t>(rec.contracted.constraint_index(n_id))] = 1;  // one-hot at v_{C_1}
    rec.f_after = EdgeLabeling(std::move(fb));

    ECSP_CHECK(is_valid(rec.contracted, rec.f_after), "contracted labeling invalid");
    ECSP_CHECK(rec.contracted.var_count() <= inst.var_count(),
               "contraction increased the variable count");
    ECSP_CHECK(inconsistency_count(rec.contracted, rec.f_after) ==
                   inconsistency_count(inst, f),
               "contraction changed the inconsistency count");
    return rec;
}

Walk find_augmenting_walk(const Instance& inst, const EdgeLabeling& f, const EdgeLabeling& g,
                          int avoid_var) {
    if (!is_valid(inst, f) || !is_valid(inst, g))
        throw PreconditionError("find_augmenting_walk: labelings must be valid");
    if (inconsistency_count(inst, g) >= inconsistency_count(inst, f))
        throw PreconditionError("find_augmenting_walk: second labeling is not strictly better");

    EdgeLabeling h = g;
    // stage 1: make every f-consistent variable h-consistent
    for (int guard = 0; ; ++guard) {
        ECSP_CHECK(guard <= 2 * inst.var_count() + 2, "homogenizing stage does not terminate");
        int v = -1;
        for (int u = 0; u < inst.var_count(); ++u)
            if (variable_consistent(inst, f, u) && !variable_consistent(inst, h, u)) {
                v = u;
                break;
            }
        if (v < 0) break;
        int c = -1;
        for (const Instance::Incidence& inc : inst.incidences(v))
            if (f.half_edge(inst, v, inc.constraint) != h.half_edge(inst, v, inc.constraint)) {
                ECSP_CHECK(c < 0, "inconsistent variable differs on both half-edges");
                c = inc.constraint;
            }
        ECSP_CHECK(c >= 0, "no differing half-edge at an inconsistent variable");
        int pv = inst.position_in(v, c);
        const Relation& rel = inst.relation(c);
        int w = -1;
        for (int pos = 0; pos < static_cast<int>(inst.scope_vars(c).size()); ++pos) {
            int cand = inst.scope_vars(c)[pos];
            if (cand == v) continue;
            if (f.half_edge(inst, cand, c) == h.half_edge(inst, cand, c)) continue;
            if (!rel.contains(h.tuple(c) ^ bitmask(pv) ^ bitmask(pos))) continue;
            w = pos;
            break;
        }
        ECSP_CHECK(w >= 0, "even constraint admits no exchange in the difference");
        h.toggle(c, bitmask(pv) | bitmask(w));
    }

    // stage 2: grow the walk inside the remaining difference
    int r = -1;
    for (int u = 0; u < inst.var_count(); ++u)
        if (u != avoid_var && !variable_consistent(inst, f, u) && variable_consistent(inst, h, u)) {
            r = u;
            break;
        }
    ECSP_CHECK(r >= 0, "no admissible start for the augmenting walk");

    EdgeLabeling fstar = f;
    Walk p(r);
    for (int guard = 0; ; ++guard) {
        ECSP_CHECK(guard <= 2 * inst.var_count() + 2, "walk growth does not terminate");
        int v = p.end_var();
        int c = -1;
        for (const Instance::Incidence& inc : inst.incidences(v))
            if (fstar.half_edge(inst, v, inc.constraint) != h.half_edge(inst, v, inc.constraint)) {
                ECSP_CHECK(c < 0, "walk endpoint differs on both half-edges");
                c = inc.constraint;
            }
        ECSP_CHECK(c >= 0, "walk endpoint has no differing half-edge");
        int pv = inst.position_in(v, c);
        const Relation& rel = inst.relation(c);
        int w = -1;
        for (int pos = 0; pos < static_cast<int>(inst.scope_vars(c).size()); ++pos) {
            int cand = inst.scope_vars(c)[pos];
            if (cand == v) continue;
            if (fstar.half_edge(inst, cand, c) == h.half_edge(inst, cand, c)) continue;
            if (!rel.contains(fstar.tuple(c) ^ bitmask(pv) ^ bitmask(pos))) continue;
            w = pos;
            break;
        }
        ECSP_CHECK(w >= 0, "even constraint admits no walk extension");
        int wv = inst.scope_vars(c)[static_cast<std::size_t>(w)];
        p.append(inst, c, wv);
        fstar.toggle(c, bitmask(pv) | bitmask(w));
        if (!variable_consistent(inst, f, wv)) {
            ECSP_CHECK(is_augmenting(inst, f, p), "extracted walk is not augmenting");
            return p;
        }
    }
}

EdgeLabeling lift_improvement(const ContractionRecord& record, const EdgeLabeling& g_b,
                              const SolveOptions& opts) {
    const Instance& orig = record.original;
    const Instance& con = record.contracted;
    const EdgeLabeling& f = record.f_before;
    const int before = inconsistency_count(orig, f);

    if (!is_valid(con, g_b))
        throw PreconditionError("lift_improvement: labeling invalid for the contracted instance");
    if (inconsistency_count(con, g_b) >= inconsistency_count(con, record.f_after))
        throw PreconditionError("lift_improvement: labeling is not strictly better");

    auto trace = [&](TraceEvent ev) {
        if (opts.trace) opts.trace->push_back(std::move(ev));
    };

    int avoid = con.variable_index(record.new_vars.front());
    ECSP_CHECK(avoid >= 0, "contracted instance lost its fresh variables");
    Walk pb = find_augmenting_walk(con, record.f_after, g_b, avoid);

    std::unordered_set<int> fresh;
    for (const std::string& name : record.new_vars) fresh.insert(con.variable_index(name));

    int first_fresh = -1;
    for (int i = 0; i <= pb.length(); ++i)
        if (fresh.count(pb.var_at(i))) {
            first_fresh = i;
            break;
        }

    if (first_fresh < 0) {
        Walk p = rename_walk(pb, con, orig);
        ECSP_CHECK(is_augmenting(orig, f, p), "renamed walk is not augmenting");
        EdgeLabeling g = apply_walk(orig, f, p);
        ECSP_CHECK(inconsistency_count(orig, g) == before - 2,
                   "lift did not reduce the count by two");
        trace({{"event", "lift"}, {"case", "pass_through"}});
        return g;
    }
    ECSP_CHECK(first_fresh > 0, "augmenting walk starts at a contracted variable");
    ECSP_CHECK(con.constraint_id(pb.steps()[static_cast<std::size_t>(first_fresh - 1)].constraint) !=
                   record.new_constraint,
               "walk reaches the blossom through the one-hot constraint");

    Walk r = rename_walk(pb.prefix(first_fresh - 1), con, orig);
    ECSP_CHECK(r.length() == 0 || is_f_walk(orig, f, r),
               "prefix before the contracted variable is not an f-walk");

    const BlossomData& b = record.blossom;
    const int k = b.k();

    // shortest prefix q of r that admits a one-step hop onto the blossom
    std::optional<Walk> q;
    for (int j = 0; j <= r.length() && !q; ++j) {
        Walk cand = r.prefix(j);
        for (int i = 1; i <= k && !q; ++i)
            for (int target : {b.b_vars[i], b.b_vars[i - 1]}) {
                if (try_extend(orig, f, cand, b.b_constraints[i - 1], target)) {
                    q = cand;
                    break;
                }
            }
    }
    ECSP_CHECK(q.has_value(), "no prefix of the lifted walk reaches the blossom");

    EdgeLabeling fprime = q->length() == 0 ? f : apply_walk(orig, f, *q);
    ECSP_CHECK(inconsistency_count(orig, fprime) == before,
               "prefix flip changed the inconsistency count");
    int x = q->end_var();

    auto hop = [&](int i, int target) {  // i is 1-based
        return one_step_walk(orig, fprime, x, b.b_constraints[i - 1], target);
    };

    FDag bdag;
    const char* shape = nullptr;

    int j = -1;
    for (int i = k; i >= b.ell; --i)
        if (hop(i, b.b_vars[i])) {
            j = i;
            break;
        }
    if (j >= 0) {
        // single path b_k .. C_j, then out to x
        shape = "single_path_from_end";
        bdag.var_nodes.push_back(x);
        for (int i = j; i <= k; ++i) bdag.var_nodes.push_back(b.b_vars[i]);
        for (int i = j; i <= k; ++i) bdag.constraint_nodes.emplace_back(b.b_constraints[i - 1], b.stamps[i - 1]);
        for (int i = j; i <= k; ++i)
            bdag.edges.push_back({true, b.b_vars[i], b.b_constraints[i - 1], b.stamps[i - 1]});
        for (int i = j + 1; i <= k; ++i)
            bdag.edges.push_back({false, b.b_vars[i - 1], b.b_constraints[i - 1], b.stamps[i - 1]});
        bdag.edges.push_back({false, x, b.b_constraints[j - 1], b.stamps[j - 1]});
    } else {
        for (int i = 1; i <= b.ell; ++i)
            if (hop(i, b.b_vars[i - 1])) {
                j = i;
                break;
            }
        if (j >= 0) {
            // single path b_0 .. C_j, then out to x
            shape = "single_path_from_start";
            bdag.var_nodes.push_back(x);
            for (int i = 0; i < j; ++i) bdag.var_nodes.push_back(b.b_vars[i]);
            for (int i = 1; i <= j; ++i) bdag.constraint_nodes.emplace_back(b.b_constraints[i - 1], b.stamps[i - 1]);
            for (int i = 1; i <= j; ++i)
                bdag.edges.push_back({true, b.b_vars[i - 1], b.b_constraints[i - 1], b.stamps[i - 1]});
            for (int i = 1; i < j; ++i)
                bdag.edges.push_back({false, b.b_vars[i], b.b_constraints[i - 1], b.stamps[i - 1]});
            bdag.edges.push_back({false, x, b.b_constraints[j - 1], b.stamps[j - 1]});
        } else {
            // hop with the latest timestamp; x feeds into C_j and the DAG
            // keeps both branches around the meeting constraint C_ell
            int form_target = -1;
            for (int i = 1; i < b.ell; ++i)
                if (hop(i, b.b_vars[i]) && (j < 0 || b.stamps[i - 1] > b.stamps[j - 1])) {
                    j = i;
                    form_target = i;
                }
            for (int i = b.ell + 1; i <= k; ++i)
                if (hop(i, b.b_vars[i - 1]) && (j < 0 || b.stamps[i - 1] > b.stamps[j - 1])) {
                    j = i;
                    form_target = i - 1;
                }
            ECSP_CHECK(j >= 0, "no hop from the prefix endpoint onto the blossom");
            shape = "two_paths";
            if (form_target == j) {
                // x -> C_j joins the rising branch: paths x..C_ell and b_k..C_ell
                for (int i = j; i <= k; ++i) bdag.var_nodes.push_back(b.b_vars[i]);
                bdag.var_nodes.push_back(x);
                for (int i = j; i <= k; ++i)
                    bdag.constraint_nodes.emplace_back(b.b_constraints[i - 1], b.stamps[i - 1]);
                for (int i = j + 1; i <= b.ell; ++i)
                    bdag.edges.push_back({true, b.b_vars[i - 1], b.b_constraints[i - 1], b.stamps[i - 1]});
                for (int i = j; i < b.ell; ++i)
                    bdag.edges.push_back({false, b.b_vars[i], b.b_constraints[i - 1], b.stamps[i - 1]});
                for (int i = b.ell; i <= k; ++i)
                    bdag.edges.push_back({true, b.b_vars[i], b.b_constraints[i - 1], b.stamps[i - 1]});
                for (int i = b.ell + 1; i <= k; ++i)
                    bdag.edges.push_back({false, b.b_vars[i - 1], b.b_constraints[i - 1], b.stamps[i - 1]});
                bdag.edges.push_back({true, x, b.b_constraints[j - 1], b.stamps[j - 1]});
            } else {
                // mirrored: x -> C_j joins the falling branch
                for (int i = 0; i < j; ++i) bdag.var_nodes.push_back(b.b_vars[i]);
                bdag.var_nodes.push_back(x);
                for (int i = 1; i <= j; ++i)
                    bdag.constraint_nodes.emplace_back(b.b_constraints[i - 1], b.stamps[i - 1]);
                for (int i = 1; i <= b.ell; ++i)
                    bdag.edges.push_back({true, b.b_vars[i - 1], b.b_constraints[i - 1], b.stamps[i - 1]});
                for (int i = 1; i < b.ell; ++i)
                    bdag.edges.push_back({false, b.b_vars[i], b.b_constraints[i - 1], b.stamps[i - 1]});
                for (int i = b.ell; i <= j - 1; ++i)
                    bdag.edges.push_back({true, b.b_vars[i], b.b_constraints[i - 1], b.stamps[i - 1]});
                for (int i = b.ell + 1; i <= j; ++i)
                    bdag.edges.push_back({false, b.b_vars[i - 1], b.b_constraints[i - 1], b.stamps[i - 1]});
                bdag.edges.push_back({true, x, b.b_constraints[j - 1], b.stamps[j - 1]});
            }
        }
    }

    EdgeLabeling g = apply_dag(orig, fprime, bdag);
    ECSP_CHECK(inconsistency_count(orig, g) == before - 2,
               "blossom lift did not reduce the count by two");
    trace({{"event", "lift"}, {"case", shape}, {"hop_index", j}});
    return g;
}

std::optional<EdgeLabeling> improve(const Instance& inst, const EdgeLabeling& f,
                                    const SolveOptions& opts, SolveStats* stats) {
    if (!is_valid(inst, f)) throw PreconditionError("improve: labeling is not valid");

    std::deque<ContractionRecord> records;
    const Instance* cur = &inst;
    EdgeLabeling curf = f;

    while (true) {
        Grower grower(*cur, curf, opts, static_cast<int>(records.size()));
        Grower::Outcome out = grower.run();
        if (out.kind == Grower::Outcome::NoImprovement) {
            if (opts.trace)
                opts.trace->push_back({{"event", "optimal"},
                                       {"depth", static_cast<int>(records.size())},
                                       {"inconsistencies", inconsistency_count(inst, f)}});
            return std::nullopt;
        }
        if (out.kind == Grower::Outcome::Augmented) {
            if (stats) ++stats->augmentations;
            EdgeLabeling g = out.g;
            for (auto it = records.rbegin(); it != records.rend(); ++it)
                g = lift_improvement(*it, g, opts);
            ECSP_CHECK(inconsistency_count(inst, g) == inconsistency_count(inst, f) - 2,
                       "improvement did not reduce the count by exactly two");
            return g;
        }
        if (stats) ++stats->blossoms;
        // a contraction adds a constraint and keeps the variable count, and
        // constraint counts are bounded by the total arity 2|V|
        ECSP_CHECK(static_cast<int>(records.size()) + 1 <= 2 * inst.var_count(),
                   "contraction chain exceeds twice the variable count");
        ContractionRecord rec = contract(*cur, out.f_stem, out.blossom);
        if (opts.trace)
            opts.trace->push_back({{"event", "contract"},
                                   {"depth", static_cast<int>(records.size())},
                                   {"new_constraint", rec.new_constraint},
                                   {"merged", rec.l_ids},
                                   {"fresh_vars", rec.new_vars}});
        if (opts.hooks.on_contract)
            opts.hooks.on_contract(rec, static_cast<int>(records.size()) + 1);
        records.push_back(std::move(rec));
        if (stats) {
            ++stats->contractions;
            stats->max_contraction_depth =
                std::max(stats->max_contraction_depth, static_cast<int>(records.size()));
        }
        cur = &records.back().contracted;
        curf = records.back().f_after;
    }
}

SolveResult optimize(const Instance& inst, const EdgeLabeling& start, const SolveOptions& opts) {
    for (int c = 0; c < inst.constraint_count(); ++c) {
        if (!is_even(inst.relation(c)) || !is_delta_matroid(inst.relation(c)))
            throw RefusalError("constraint '" + inst.constraint_id(c) +
                               "' is not an even delta-matroid; if every constraint has a "
                               "covering oracle, use the coverable solver instead");
    }
    if (!is_valid(inst, start)) throw PreconditionError("optimize: starting labeling invalid");

    SolveResult res;
    res.labeling = start;
    while (true) {
        std::optional<EdgeLabeling> g = improve(inst, res.labeling, opts, &res.stats);
        if (!g) break;
        ++res.stats.improvements;
        res.labeling = std::move(*g);
    }
    res.inconsistencies = inconsistency_count(inst, res.labeling);
    return res;
}

SolveResult optimize(const Instance& inst, const SolveOptions& opts) {
    return optimize(inst, initial_labeling(inst), opts);
}

}  // namespace edgecsp
