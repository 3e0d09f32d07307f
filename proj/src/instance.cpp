#include "edgecsp/instance.hpp"

#include <algorithm>
#include <map>
#include <thread>

namespace edgecsp {

InstanceDiagnostics validate_instance(const InstanceData& data) {
    InstanceDiagnostics diag;
    std::map<std::string, int> declared;
    for (const std::string& v : data.variables) {
        if (declared.count(v))
            diag.problems.push_back("variable '" + v + "' declared twice");
        declared[v] = 0;
    }
    std::map<std::string, int> constraint_ids;
    for (const ConstraintSpec& c : data.constraints) {
        if (constraint_ids.count(c.id))
            diag.problems.push_back("constraint id '" + c.id + "' used twice");
        constraint_ids[c.id] = 1;
        if (c.relation.empty())
            diag.problems.push_back("constraint '" + c.id + "' has an empty relation");
        if (c.relation.arity() == 0)
            diag.problems.push_back("constraint '" + c.id + "' has an empty scope");
        std::map<std::string, int> in_scope;
        for (const std::string& v : c.relation.scope()) {
            if (in_scope.count(v))
                diag.problems.push_back("variable '" + v + "' occurs twice in scope of '"
                                        + c.id + "'");
            in_scope[v] = 1;
            auto it = declared.find(v);
            if (it == declared.end())
                diag.problems.push_back("constraint '" + c.id + "' uses undeclared variable '"
                                        + v + "'");
            else
                ++it->second;
        }
    }
    for (const auto& [v, degree] : declared)
        if (degree != 2)
            diag.problems.push_back("variable '" + v + "' has degree "
                                    + std::to_string(degree) + ", expected 2");
    return diag;
}

InstanceData normalize_degree(const InstanceData& relaxed) {
    std::map<std::string, int> degree;
    for (const std::string& v : relaxed.variables)
        degree[v] = 0;
    for (const ConstraintSpec& c : relaxed.constraints)
        for (const std::string& v : c.relation.scope()) {
            auto it = degree.find(v);
            if (it == degree.end())
                throw PreconditionError("normalize_degree: undeclared variable '" + v + "'");
            ++it->second;
        }
    for (const auto& [v, d] : degree) {
        if (d > 2)
            throw PreconditionError("normalize_degree: variable '" + v + "' has degree "
                                    + std::to_string(d));
        if (d == 0)
            throw PreconditionError("normalize_degree: variable '" + v + "' has degree 0");
    }

    InstanceData doubled;
    for (const std::string& v : relaxed.variables) {
        if (degree[v] == 2) {
            doubled.variables.push_back(v + "#1");
            doubled.variables.push_back(v + "#2");
        } else {
            doubled.variables.push_back(v);  // fused copy
        }
    }
    for (int copy = 1; copy <= 2; ++copy) {
        for (const ConstraintSpec& c : relaxed.constraints) {
            std::vector<std::string> scope;
            for (const std::string& v : c.relation.scope())
                scope.push_back(degree[v] == 2 ? v + "#" + std::to_string(copy) : v);
            doubled.constraints.push_back(
                {c.id + "#" + std::to_string(copy), rename_scope(c.relation, std::move(scope))});
        }
    }
    return doubled;
}

Instance Instance::create(InstanceData data) {
    InstanceDiagnostics diag = validate_instance(data);
    if (!diag.ok()) {
        std::string msg = "invalid instance:";
        for (const std::string& p : diag.problems)
            msg += "\n  " + p;
        throw PreconditionError(msg);
    }
    Instance inst;
    inst.data_ = std::move(data);
    inst.variables_ = inst.data_.variables;
    for (int i = 0; i < inst.var_count(); ++i)
        inst.var_index_[inst.variables_[static_cast<std::size_t>(i)]] = i;
    inst.incidences_.resize(inst.variables_.size());
    std::vector<int> seen(inst.variables_.size(), 0);
    for (int c = 0; c < inst.constraint_count(); ++c) {
        const ConstraintSpec& spec = inst.data_.constraints[static_cast<std::size_t>(c)];
        inst.constraint_index_[spec.id] = c;
        std::vector<int> vars;
        for (int p = 0; p < spec.relation.arity(); ++p) {
            const int v = inst.var_index_.at(spec.relation.scope()[static_cast<std::size_t>(p)]);
            vars.push_back(v);
            inst.incidences_[static_cast<std::size_t>(v)][static_cast<std::size_t>(
                seen[static_cast<std::size_t>(v)]++)] = {c, p};
        }
        inst.scope_vars_.push_back(std::move(vars));
    }
    return inst;
}

int Instance::variable_index(std::string_view name) const {
    auto it = var_index_.find(std::string(name));
    return it == var_index_.end() ? -1 : it->second;
}

const std::string& Instance::constraint_id(int c) const {
    return data_.constraints[static_cast<std::size_t>(c)].id;
}

int Instance::constraint_index(std::string_view id) const {
    auto it = constraint_index_.find(std::string(id));
    return it == constraint_index_.end() ? -1 : it->second;
}

const Relation& Instance::relation(int c) const {
    return data_.constraints[static_cast<std::size_t>(c)].relation;
}

const std::array<Instance::Incidence, 2>& Instance::incidences(int v) const {
    return incidences_[static_cast<std::size_t>(v)];
}

int Instance::other_constraint(int v, int c) const {
    const auto& inc = incidences(v);
    if (inc[0].constraint == c)
        return inc[1].constraint;
    ECSP_CHECK(inc[1].constraint == c, "other_constraint: variable not incident");
    return inc[0].constraint;
}

int Instance::position_in(int v, int c) const {
    const auto& inc = incidences(v);
    if (inc[0].constraint == c)
        return inc[0].position;
    if (inc[1].constraint == c)
        return inc[1].position;
    return -1;
}

int Instance::var_at(int c, int position) const {
    return scope_vars_[static_cast<std::size_t>(c)][static_cast<std::size_t>(position)];
}

const std::vector<int>& Instance::scope_vars(int c) const {
    return scope_vars_[static_cast<std::size_t>(c)];
}

bool EdgeLabeling::half_edge(const Instance& inst, int v, int c) const {
    const int p = inst.position_in(v, c);
    if (p < 0)
        throw PreconditionError("half_edge: variable not in scope of constraint");
    return bit(tuple(c), p);
}

EdgeLabeling initial_labeling(const Instance& inst) {
    std::vector<BitTuple> per;
    per.reserve(static_cast<std::size_t>(inst.constraint_count()));
    for (int c = 0; c < inst.constraint_count(); ++c)
        per.push_back(inst.relation(c).tuples().front());
    return EdgeLabeling(std::move(per));
}

bool is_valid(const Instance& inst, const EdgeLabeling& f) {
    if (f.constraint_count() != inst.constraint_count())
        return false;
    for (int c = 0; c < inst.constraint_count(); ++c)
        if (!inst.relation(c).contains(f.tuple(c)))
            return false;
    return true;
}

bool variable_consistent(const Instance& inst, const EdgeLabeling& f, int v) {
    const auto& inc = inst.incidences(v);
    return bit(f.tuple(inc[0].constraint), inc[0].position)
           == bit(f.tuple(inc[1].constraint), inc[1].position);
}

int inconsistency_count(const Instance& inst, const EdgeLabeling& f) {
    int count = 0;
    for (int v = 0; v < inst.var_count(); ++v)
        if (!variable_consistent(inst, f, v))
            ++count;
    return count;
}

std::vector<int> inconsistent_variables(const Instance& inst, const EdgeLabeling& f) {
    std::vector<int> vars;
    for (int v = 0; v < inst.var_count(); ++v)
        if (!variable_consistent(inst, f, v))
            vars.push_back(v);
    return vars;
}

namespace {

struct BruteState {
    int best = -1;
    std::vector<std::size_t> choice;  // tuple indices per constraint
};

// Enumerate all tuple choices with the first constraint's index fixed per
// worker stride; keep the lexicographically-first minimum, which matches the
// sequential first-strict-improvement scan.
void brute_force_range(const Instance& inst, std::size_t first_lo, std::size_t stride,
                       BruteState& out) {
    const int m = inst.constraint_count();
    std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c)
        sizes[static_cast<std::size_t>(c)] = inst.relation(c).size();
    EdgeLabeling f(std::vector<BitTuple>(static_cast<std::size_t>(m), 0));
    for (std::size_t first = first_lo; first < sizes[0]; first += stride) {
        idx.assign(static_cast<std::size_t>(m), 0);
        idx[0] = first;
        while (true) {
            for (int c = 0; c < m; ++c)
                f.set_tuple(c, inst.relation(c).tuples()[idx[static_cast<std::size_t>(c)]]);
            const int count = inconsistency_count(inst, f);
            if (out.best < 0 || count < out.best) {
                out.best = count;
                out.choice = idx;
            }
            // advance the odometer over constraints 1..m-1
            int c = m - 1;
            while (c >= 1) {
                if (++idx[static_cast<std::size_t>(c)] < sizes[static_cast<std::size_t>(c)])
                    break;
                idx[static_cast<std::size_t>(c)] = 0;
                --c;
            }
            if (c < 1)
                break;
        }
    }
}

}  // namespace

BruteForceResult brute_force_optimum(const Instance& inst, long long bound, int workers) {
    long long space = 1;
    for (int c = 0; c < inst.constraint_count(); ++c) {
        space *= static_cast<long long>(inst.relation(c).size());
        if (space > bound)
            throw PreconditionError("brute_force_optimum: search space exceeds bound of "
                                    + std::to_string(bound));
    }
    if (inst.constraint_count() == 0)
        throw PreconditionError("brute_force_optimum: instance has no constraints");

    const std::size_t first_size = inst.relation(0).size();
    const std::size_t nworkers =
        std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)),
                                                       first_size));
    std::vector<BruteState> states(nworkers);
    if (nworkers == 1) {
        brute_force_range(inst, 0, 1, states[0]);
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < nworkers; ++w)
            threads.emplace_back(brute_force_range, std::cref(inst), w, nworkers,
                                 std::ref(states[w]));
        for (auto& t : threads)
            t.join();
    }
    const BruteState* best = nullptr;
    for (const BruteState& s : states) {
        if (s.best < 0)
            continue;
        if (!best || s.best < best->best || (s.best == best->best && s.choice < best->choice))
            best = &s;
    }
    ECSP_CHECK(best != nullptr, "brute_force_optimum: no labeling enumerated");

    BruteForceResult result;
    result.optimum = best->best;
    std::vector<BitTuple> per;
    for (int c = 0; c < inst.constraint_count(); ++c)
        per.push_back(inst.relation(c).tuples()[best->choice[static_cast<std::size_t>(c)]]);
    result.witness = EdgeLabeling(std::move(per));
    return result;
}

bool parity_invariant_check(const Instance& inst, const EdgeLabeling& f,
                            const EdgeLabeling& g) {
    if (!is_valid(inst, f) || !is_valid(inst, g))
        throw PreconditionError("parity_invariant_check: labeling is not valid");
    return (inconsistency_count(inst, f) & 1) == (inconsistency_count(inst, g) & 1);
}

}  // namespace edgecsp
