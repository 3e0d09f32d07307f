#include "edgecsp/coverable.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <deque>
#include <random>
#include <thread>
#include <utility>

namespace edgecsp {

namespace {

int tuple_parity(BitTuple t) { return std::popcount(t) & 1; }

void require_member(const Relation& m, BitTuple alpha, const std::string& who) {
    if (m.empty())
        throw PreconditionError(who + ": relation is empty");
    if (!m.contains(alpha))
        throw PreconditionError(who + ": tuple " + m.tuple_string(alpha)
                                + " is not a member of the relation");
}

std::vector<BitTuple> parity_class_of(const Relation& m, BitTuple alpha) {
    std::vector<BitTuple> out;
    for (BitTuple t : m.tuples())
        if (tuple_parity(t) == tuple_parity(alpha)) out.push_back(t);
    return out;
}

}  // namespace

// --- even-neighbor reachability ---------------------------------------------

std::vector<BitTuple> even_neighbors(const Relation& m, BitTuple alpha) {
    require_member(m, alpha, "even_neighbors");
    std::vector<BitTuple> out;
    for (BitTuple beta : m.tuples()) {
        const BitTuple diff = alpha ^ beta;
        if (std::popcount(diff) != 2) continue;
        const int u = std::countr_zero(diff);
        const int v = std::countr_zero(diff & (diff - 1));
        if (!m.contains(alpha ^ bitmask(u)) || !m.contains(alpha ^ bitmask(v)))
            out.push_back(beta);
    }
    return out;
}

std::set<BitTuple> reachable_set(const Relation& m, BitTuple alpha) {
    require_member(m, alpha, "reachable_set");
    std::set<BitTuple> seen{alpha};
    std::deque<BitTuple> frontier{alpha};
    while (!frontier.empty()) {
        const BitTuple cur = frontier.front();
        frontier.pop_front();
        for (BitTuple next : even_neighbors(m, cur))
            if (seen.insert(next).second) frontier.push_back(next);
    }
    return seen;
}

// --- covers ------------------------------------------------------------------

CoverCheck verify_cover(const Relation& m, BitTuple alpha, const Relation& cover) {
    require_member(m, alpha, "verify_cover");
    CoverCheck check;
    if (cover.arity() != m.arity()) {
        check.problems.push_back("cover arity " + std::to_string(cover.arity())
                                 + " differs from relation arity "
                                 + std::to_string(m.arity()));
        return check;
    }
    if (cover.scope() != m.scope())
        check.problems.push_back("cover scope differs from the relation scope");

    if (cover.empty()) {
        check.problems.push_back("cover is empty");
    } else {
        if (!is_delta_matroid(cover))
            check.problems.push_back("cover is not a delta-matroid");
        if (!is_even(cover))
            check.problems.push_back("cover mixes tuple parities");
    }

    const std::set<BitTuple> reach = reachable_set(m, alpha);
    for (BitTuple gamma : reach)
        if (!cover.contains(gamma))
            check.problems.push_back("reachable tuple " + m.tuple_string(gamma)
                                     + " is missing from the cover");

    for (BitTuple gamma : reach) {
        for (int u = 0; u < m.arity(); ++u) {
            for (int v = u + 1; v < m.arity(); ++v) {
                const BitTuple exit = gamma ^ bitmask(u) ^ bitmask(v);
                if (!cover.contains(exit) || m.contains(exit)) continue;
                if (!m.contains(gamma ^ bitmask(u)) || !m.contains(gamma ^ bitmask(v)))
                    check.problems.push_back(
                        "cover admits " + m.tuple_string(exit) + " next to reachable "
                        + m.tuple_string(gamma)
                        + " but a single flip between them leaves the relation");
            }
        }
    }

    check.ok = check.problems.empty();
    return check;
}

bool is_coindependent(const Relation& m) {
    if (m.empty())
        throw PreconditionError("is_coindependent: relation is empty");
    const BitTuple limit = BitTuple{1} << m.arity();
    for (BitTuple t = 0; t < limit; ++t) {
        if (m.contains(t)) continue;
        for (int v = 0; v < m.arity(); ++v)
            if (!m.contains(t ^ bitmask(v))) return false;
    }
    return true;
}

Relation cover_coindependent(const Relation& m, BitTuple alpha) {
    require_member(m, alpha, "cover_coindependent");
    if (!is_coindependent(m))
        throw PreconditionError("cover_coindependent: relation is not co-independent");
    ECSP_CHECK(2 * m.size() >= (std::size_t{1} << m.arity()),
               "a co-independent relation fills at least half the cube");
    std::vector<BitTuple> tuples;
    const BitTuple limit = BitTuple{1} << m.arity();
    for (BitTuple t = 0; t < limit; ++t)
        if (tuple_parity(t) == tuple_parity(alpha)) tuples.push_back(t);
    return Relation(m.scope(), std::move(tuples));
}

GcFunction gc_ones() {
    return {"ones", [](BitTuple t) { return std::popcount(t); }};
}

CoverCheck check_gc_function(const GcFunction& f, int arity) {
    if (arity < 1 || arity > kMaxArity)
        throw PreconditionError("check_gc_function: arity out of range");
    CoverCheck check;
    constexpr std::size_t kMaxProblems = 8;
    const BitTuple limit = BitTuple{1} << arity;

    for (BitTuple t = 0; t < limit && check.problems.size() < kMaxProblems; ++t) {
        const int val = f(t);
        if (val < 0 || val > arity) {
            check.problems.push_back("value " + std::to_string(val) + " out of range at tuple "
                                     + std::to_string(t));
            continue;
        }
        for (int v = 0; v < arity; ++v) {
            const int step = f(t ^ bitmask(v)) - val;
            if (step != 1 && step != -1) {
                check.problems.push_back("single flip of position " + std::to_string(v)
                                         + " moves tuple " + std::to_string(t) + " by "
                                         + std::to_string(step));
                break;
            }
        }
    }

    auto pair_ok = [&](BitTuple a, BitTuple b) {
        if (f(a) < f(b)) std::swap(a, b);
        if (f(a) == f(b)) return true;
        bool down = false, up = false;
        const BitTuple diff = a ^ b;
        for (int v = 0; v < arity; ++v) {
            if (!bit(diff, v)) continue;
            down = down || f(a ^ bitmask(v)) == f(a) - 1;
            up = up || f(b ^ bitmask(v)) == f(b) + 1;
        }
        return down && up;
    };
    auto flag_pair = [&](BitTuple a, BitTuple b) {
        if (check.problems.size() < kMaxProblems && !pair_ok(a, b))
            check.problems.push_back("tuples " + std::to_string(a) + " and " + std::to_string(b)
                                     + " violate the exchange condition");
    };
    if (arity <= 8) {
        for (BitTuple a = 0; a < limit; ++a)
            for (BitTuple b = a + 1; b < limit; ++b) flag_pair(a, b);
    } else {
        std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
        std::uniform_int_distribution<BitTuple> pick(0, limit - 1);
        for (int i = 0; i < 20000; ++i) flag_pair(pick(rng), pick(rng));
    }

    check.ok = check.problems.empty();
    return check;
}

bool is_gap2_free(const std::set<int>& s) {
    if (s.empty()) return true;
    const int lo = *s.begin();
    const int hi = *s.rbegin();
    for (int x = lo + 1; x < hi; ++x)
        if (!s.count(x) && (!s.count(x - 1) || !s.count(x + 1))) return false;
    return true;
}

bool is_compact_like(const Relation& m, const GcFunction& f, const std::set<int>& s) {
    const BitTuple limit = BitTuple{1} << m.arity();
    for (BitTuple t = 0; t < limit; ++t)
        if (m.contains(t) != (s.count(f(t)) > 0)) return false;
    return true;
}

Relation compact_like_relation(std::vector<std::string> scope, const GcFunction& f,
                               const std::set<int>& s) {
    if (scope.empty() || scope.size() > static_cast<std::size_t>(kMaxArity))
        throw PreconditionError("compact_like_relation: scope size out of range");
    std::vector<BitTuple> tuples;
    const BitTuple limit = BitTuple{1} << scope.size();
    for (BitTuple t = 0; t < limit; ++t)
        if (s.count(f(t))) tuples.push_back(t);
    return Relation(std::move(scope), std::move(tuples));
}

Relation cover_compact(const Relation& m, const GcFunction& f, const std::set<int>& s,
                       BitTuple alpha) {
    require_member(m, alpha, "cover_compact");
    if (s.empty() || !is_gap2_free(s))
        throw PreconditionError("cover_compact: level set must be nonempty and 2-gap free");
    const CoverCheck axioms = check_gc_function(f, m.arity());
    if (!axioms.ok)
        throw PreconditionError("cover_compact: not a gc-function: " + axioms.problems.front());
    if (!is_compact_like(m, f, s))
        throw PreconditionError(
            "cover_compact: function and level set do not describe the relation");

    const int lo = *s.begin();
    const int hi = *s.rbegin();
    std::set<BitTuple> out;
    for (BitTuple t : m.tuples()) {
        if (tuple_parity(t) == tuple_parity(alpha)) {
            out.insert(t);
            continue;
        }
        for (int v = 0; v < m.arity(); ++v) {
            const BitTuple flip = t ^ bitmask(v);
            const int val = f(flip);
            if (lo < val && val < hi) out.insert(flip);
        }
    }
    Relation cover(m.scope(), std::vector<BitTuple>(out.begin(), out.end()));
    ECSP_CHECK(!cover.empty() && is_delta_matroid(cover) && is_even(cover),
               "compact listing must produce an even delta-matroid");
    return cover;
}

Relation cover_interference_free(const Relation& m, BitTuple alpha) {
    require_member(m, alpha, "cover_interference_free");
    if (contains_interference_minor(m))
        throw PreconditionError("cover_interference_free: relation has an interference minor");
    Relation cover(m.scope(), parity_class_of(m, alpha));
    ECSP_CHECK(is_delta_matroid(cover) && is_even(cover),
               "parity class of an interference-free relation must be an even delta-matroid");
    return cover;
}

std::optional<Relation> even_zebra_cover_search(const Relation& m, BitTuple alpha,
                                                int max_arity) {
    require_member(m, alpha, "even_zebra_cover_search");
    if (m.arity() > max_arity)
        throw PreconditionError("even_zebra_cover_search: arity above the configured bound");
    const int arity = m.arity();
    const int parity = tuple_parity(alpha);

    // additions outside m are only usable when every double flip back into m
    // comes with both single flips in m
    auto admissible = [&](BitTuple g) {
        for (int u = 0; u < arity; ++u)
            for (int v = u + 1; v < arity; ++v)
                if (m.contains(g ^ bitmask(u) ^ bitmask(v))
                    && (!m.contains(g ^ bitmask(u)) || !m.contains(g ^ bitmask(v))))
                    return false;
        return true;
    };
    std::vector<BitTuple> pool;
    const BitTuple limit = BitTuple{1} << arity;
    for (BitTuple t = 0; t < limit; ++t)
        if (tuple_parity(t) == parity && !m.contains(t) && admissible(t)) pool.push_back(t);

    // first unwitnessed exchange in the candidate set, reported as the list
    // of pool tuples whose addition would witness it
    auto violation_fixes =
        [&](const std::set<BitTuple>& s) -> std::optional<std::vector<BitTuple>> {
        for (BitTuple a : s) {
            for (BitTuple b : s) {
                const BitTuple diff = a ^ b;
                for (int v = 0; v < arity; ++v) {
                    if (!bit(diff, v)) continue;
                    bool witnessed = false;
                    for (int u = 0; u < arity && !witnessed; ++u)
                        if (u != v && bit(diff, u)
                            && s.count(a ^ bitmask(u) ^ bitmask(v)))
                            witnessed = true;
                    if (witnessed) continue;
                    std::vector<BitTuple> fixes;
                    for (int u = 0; u < arity; ++u) {
                        if (u == v || !bit(diff, u)) continue;
                        const BitTuple cand = a ^ bitmask(u) ^ bitmask(v);
                        if (std::binary_search(pool.begin(), pool.end(), cand))
                            fixes.push_back(cand);
                    }
                    std::sort(fixes.begin(), fixes.end());
                    return fixes;
                }
            }
        }
        return std::nullopt;
    };

    std::set<std::vector<BitTuple>> failed;
    std::function<bool(std::set<BitTuple>&)> search = [&](std::set<BitTuple>& s) -> bool {
        const auto fixes = violation_fixes(s);
        if (!fixes) return true;
        const std::vector<BitTuple> key(s.begin(), s.end());
        if (failed.count(key)) return false;
        for (BitTuple add : *fixes) {
            if (s.count(add)) continue;
            s.insert(add);
            if (search(s)) return true;
            s.erase(add);
        }
        if (failed.size() >= (std::size_t{1} << 20))
            throw PreconditionError("even_zebra_cover_search: search space too large");
        failed.insert(key);
        return false;
    };

    const std::vector<BitTuple> base = parity_class_of(m, alpha);
    std::set<BitTuple> s(base.begin(), base.end());
    if (!search(s)) return std::nullopt;

    Relation witness(m.scope(), std::vector<BitTuple>(s.begin(), s.end()));
    ECSP_CHECK(is_delta_matroid(witness) && is_even(witness),
               "zebra witness must be an even delta-matroid");
    for (BitTuple beta : m.tuples())
        for (int u = 0; u < arity; ++u)
            for (int v = u + 1; v < arity; ++v) {
                const BitTuple exit = beta ^ bitmask(u) ^ bitmask(v);
                if (witness.contains(exit) && !m.contains(exit))
                    ECSP_CHECK(m.contains(beta ^ bitmask(u)) && m.contains(beta ^ bitmask(v)),
                               "zebra witness violates the exit condition");
            }
    return witness;
}

// --- covering oracles --------------------------------------------------------

Relation CoverOracle::cover(const Relation& m, BitTuple alpha) const {
    if (kind == "coindependent") return cover_coindependent(m, alpha);
    if (kind == "compact") return cover_compact(m, gc, levels, alpha);
    if (kind == "interference_free") return cover_interference_free(m, alpha);
    if (custom) return custom(m, alpha);
    throw PreconditionError("cover oracle: kind '" + kind + "' without a callback");
}

CoverOracle coindependent_oracle() { return {.kind = "coindependent"}; }

CoverOracle compact_oracle(GcFunction gc, std::set<int> levels) {
    CoverOracle oracle;
    oracle.kind = "compact";
    oracle.gc = std::move(gc);
    oracle.levels = std::move(levels);
    return oracle;
}

CoverOracle interference_free_oracle() { return {.kind = "interference_free"}; }

CoverOracle custom_oracle(std::function<Relation(const Relation&, BitTuple)> fn) {
    CoverOracle oracle;
    oracle.kind = "custom";
    oracle.custom = std::move(fn);
    return oracle;
}

CoverOracle detect_cover_oracle(const Relation& m) {
    if (is_coindependent(m)) return coindependent_oracle();
    std::set<int> levels;
    for (BitTuple t : m.tuples()) levels.insert(std::popcount(t));
    if (is_gap2_free(levels) && is_compact_like(m, gc_ones(), levels))
        return compact_oracle(gc_ones(), levels);
    if (!is_delta_matroid(m)) throw RefusalError("relation is not a delta-matroid");
    if (!contains_interference_minor(m)) return interference_free_oracle();
    if (m.arity() <= 8) {
        CoverOracle oracle;
        oracle.kind = "zebra_search";
        oracle.custom = [](const Relation& r, BitTuple alpha) {
            const auto cover = even_zebra_cover_search(r, alpha);
            if (!cover)
                throw RefusalError("no even cover found for tuple "
                                   + r.tuple_string(alpha));
            return *cover;
        };
        return oracle;
    }
    throw RefusalError("relation is outside the covered classes");
}

OracleMap detect_oracles(const Instance& inst, OracleMap configured) {
    for (int c = 0; c < inst.constraint_count(); ++c) {
        const std::string& id = inst.constraint_id(c);
        if (configured.count(id)) continue;
        try {
            configured.emplace(id, detect_cover_oracle(inst.relation(c)));
        } catch (const RefusalError& e) {
            throw RefusalError("constraint '" + id + "': " + e.what());
        }
    }
    return configured;
}

// --- the solver --------------------------------------------------------------

Instance build_restricted_instance(const Instance& inst, const EdgeLabeling& f, int c,
                                   const Relation& sub, const OracleMap& oracles) {
    if (c < 0 || c >= inst.constraint_count())
        throw PreconditionError("build_restricted_instance: constraint index out of range");
    if (!is_valid(inst, f))
        throw PreconditionError("build_restricted_instance: labeling must be valid");
    const Relation& full = inst.relation(c);
    if (sub.empty() || sub.scope() != full.scope())
        throw PreconditionError(
            "build_restricted_instance: replacement must be nonempty over the same scope");
    for (BitTuple t : sub.tuples())
        if (!full.contains(t))
            throw PreconditionError(
                "build_restricted_instance: replacement is not a subset of the constraint");

    InstanceData data = inst.data();
    data.constraints[static_cast<std::size_t>(c)].relation = sub;
    for (int d = 0; d < inst.constraint_count(); ++d) {
        if (d == c) continue;
        const std::string& id = inst.constraint_id(d);
        const auto it = oracles.find(id);
        if (it == oracles.end())
            throw PreconditionError("build_restricted_instance: no cover oracle for constraint '"
                                    + id + "'");
        data.constraints[static_cast<std::size_t>(d)].relation =
            it->second.cover(inst.relation(d), f.tuple(d));
    }
    return Instance::create(std::move(data));
}

Walk find_general_augmenting_walk(const Instance& inst, const EdgeLabeling& f,
                                  const EdgeLabeling& better) {
    if (!is_valid(inst, f) || !is_valid(inst, better))
        throw PreconditionError("find_general_augmenting_walk: labelings must be valid");
    if (inconsistency_count(inst, better) >= inconsistency_count(inst, f))
        throw PreconditionError(
            "find_general_augmenting_walk: second labeling must be strictly better");

    const int guard = 4 * inst.var_count() + 4;

    // the unique half-edge of v on which a and b disagree; v must be
    // consistent in one of them and inconsistent in the other
    auto differing_constraint = [&](const EdgeLabeling& a, const EdgeLabeling& b, int v) {
        int c = -1, count = 0;
        for (const auto& inc : inst.incidences(v))
            if (a.half_edge(inst, v, inc.constraint) != b.half_edge(inst, v, inc.constraint)) {
                c = inc.constraint;
                ++count;
            }
        ECSP_CHECK(count == 1, "split variable has a unique differing half-edge");
        return c;
    };
    // scope variable w != v with {w,C} differing between a and b and
    // base + w inside the relation, in scope order
    auto exchange_partner = [&](const EdgeLabeling& a, const EdgeLabeling& b, int c, int v,
                                BitTuple base) {
        const Relation& rel = inst.relation(c);
        for (int pos = 0; pos < rel.arity(); ++pos) {
            const int w = inst.var_at(c, pos);
            if (w == v) continue;
            if (a.half_edge(inst, w, c) == b.half_edge(inst, w, c)) continue;
            if (rel.contains(base ^ bitmask(pos))) return w;
        }
        ECSP_CHECK(false, "delta-matroid exchange yields a partner variable");
        return -1;
    };

    // stage one: align g with f on every f-consistent variable, taking the
    // single flip whenever the relation allows it
    EdgeLabeling g = better;
    for (int rounds = 0;; ++rounds) {
        ECSP_CHECK(rounds <= guard, "homogenizing stage must terminate");
        int v = -1;
        for (int cand = 0; cand < inst.var_count() && v < 0; ++cand)
            if (variable_consistent(inst, f, cand) && !variable_consistent(inst, g, cand))
                v = cand;
        if (v < 0) break;
        const int c = differing_constraint(f, g, v);
        const BitTuple single = g.tuple(c) ^ bitmask(inst.position_in(v, c));
        if (inst.relation(c).contains(single)) {
            g.set_tuple(c, single);
            continue;
        }
        const int w = exchange_partner(f, g, c, v, single);
        g.set_tuple(c, single ^ bitmask(inst.position_in(w, c)));
    }
    ECSP_CHECK(is_valid(inst, g), "homogenized labeling stays valid");
    ECSP_CHECK(inconsistency_count(inst, g) < inconsistency_count(inst, f),
               "homogenizing never increases the inconsistency count");

    // stage two: grow the walk inside the symmetric difference until it hits
    // an f-inconsistent variable or a constraint that absorbs a single flip
    int start = -1;
    for (int cand = 0; cand < inst.var_count() && start < 0; ++cand)
        if (!variable_consistent(inst, f, cand) && variable_consistent(inst, g, cand))
            start = cand;
    ECSP_CHECK(start >= 0, "a strictly better labeling fixes some inconsistent variable");

    Walk walk(start);
    EdgeLabeling fs = f;
    for (int rounds = 0;; ++rounds) {
        ECSP_CHECK(rounds <= guard, "walk extraction must terminate");
        const int v = walk.end_var();
        const int c = differing_constraint(fs, g, v);
        const BitTuple single = fs.tuple(c) ^ bitmask(inst.position_in(v, c));
        if (inst.relation(c).contains(single)) {
            walk.append_tail(inst, c);
            break;
        }
        const int w = exchange_partner(fs, g, c, v, single);
        walk.append(inst, c, w);
        fs.set_tuple(c, single ^ bitmask(inst.position_in(w, c)));
        if (!variable_consistent(inst, f, w)) break;
    }
    ECSP_CHECK(is_augmenting(inst, f, walk), "extracted walk must augment");
    return walk;
}

Walk lift_general(const Instance& inst, const EdgeLabeling& f, int c, BitTuple alpha,
                  const EdgeLabeling& g, const OracleMap& oracles) {
    if (c < 0 || c >= inst.constraint_count())
        throw PreconditionError("lift_general: constraint index out of range");
    if (!inst.relation(c).contains(alpha))
        throw PreconditionError("lift_general: tuple must belong to the constraint");
    if (g.tuple(c) != alpha)
        throw PreconditionError("lift_general: labeling must assign the forced tuple");

    const Instance covered = build_restricted_instance(inst, f, c, inst.relation(c), oracles);
    if (!is_valid(covered, g))
        throw PreconditionError("lift_general: labeling must be valid for the covered instance");
    ECSP_CHECK(is_valid(covered, f),
               "current labeling stays valid once the other constraints are covered");

    const int base = inconsistency_count(inst, f);
    const Walk q = find_general_augmenting_walk(covered, f, g);

    auto finish = [&](const Walk& w) {
        const EdgeLabeling lifted = apply_walk(inst, f, w);
        ECSP_CHECK(is_valid(inst, lifted), "lifted walk keeps the labeling valid");
        const int drop = w.half_integral() ? 1 : 2;
        ECSP_CHECK(inconsistency_count(inst, lifted) == base - drop,
                   "lifted walk lowers the inconsistency count");
        return w;
    };

    // shortest prefix that stops early inside a constraint of the original
    // instance; the cover condition turns the first covered-only transition
    // into such a stop
    for (int i = 0; i < q.length(); ++i) {
        Walk prefix = q.prefix(i);
        prefix.append_tail(inst, q.steps()[static_cast<std::size_t>(i)].constraint);
        if (is_augmenting(inst, f, prefix)) return finish(prefix);
    }
    ECSP_CHECK(is_augmenting(inst, f, q),
               "covered-instance walk must augment the original instance");
    return finish(q);
}

SolveResult solve_coverable(const Instance& inst, const OracleMap& oracles,
                            const CoverableOptions& opts) {
    const int nconstraints = inst.constraint_count();
    for (int c = 0; c < nconstraints; ++c) {
        const std::string& id = inst.constraint_id(c);
        if (!oracles.count(id))
            throw PreconditionError("solve_coverable: no cover oracle for constraint '" + id
                                    + "'");
        if (!is_delta_matroid(inst.relation(c)))
            throw RefusalError("constraint '" + id + "' is not a delta-matroid");
    }
    const int workers = std::max(1, opts.workers);

    EdgeLabeling f = initial_labeling(inst);
    SolveStats stats;

    // covers are deterministic, so compute and (in strict mode) verify each
    // (constraint, tuple) pair once
    std::map<std::pair<int, BitTuple>, Relation> cover_cache;
    auto covered_relation = [&](int d, BitTuple t) -> const Relation& {
        const auto key = std::make_pair(d, t);
        const auto it = cover_cache.find(key);
        if (it != cover_cache.end()) return it->second;
        const Relation& rel = inst.relation(d);
        Relation cover = oracles.at(inst.constraint_id(d)).cover(rel, t);
        if (opts.strict) {
            const CoverCheck check = verify_cover(rel, t, cover);
            if (!check.ok)
                throw RefusalError("cover for constraint '" + inst.constraint_id(d) + "' at "
                                   + rel.tuple_string(t) + " rejected: " + check.problems.front());
            if (opts.trace)
                opts.trace->push_back({{"event", "cover_verified"},
                                       {"constraint", inst.constraint_id(d)},
                                       {"tuple", rel.tuple_string(t)}});
        }
        return cover_cache.emplace(key, std::move(cover)).first->second;
    };

    for (;;) {
        const int base = inconsistency_count(inst, f);
        if (base == 0) break;

        // all candidates share the covers taken at the current labeling
        InstanceData covered_data = inst.data();
        for (int d = 0; d < nconstraints; ++d)
            covered_data.constraints[static_cast<std::size_t>(d)].relation =
                covered_relation(d, f.tuple(d));

        struct Candidate {
            int constraint;
            BitTuple tuple;
        };
        std::vector<Candidate> candidates;
        for (int c = 0; c < nconstraints; ++c)
            for (BitTuple t : inst.relation(c).tuples()) candidates.push_back({c, t});
        const int total = static_cast<int>(candidates.size());

        std::vector<std::optional<EdgeLabeling>> found(candidates.size());
        std::vector<SolveStats> found_stats(candidates.size());
        std::atomic<int> best{total};

        auto evaluate = [&](int idx) {
            const Candidate& cand = candidates[static_cast<std::size_t>(idx)];
            InstanceData data = covered_data;
            data.constraints[static_cast<std::size_t>(cand.constraint)].relation =
                Relation(inst.relation(cand.constraint).scope(), {cand.tuple});
            const Instance restricted = Instance::create(std::move(data));
            EdgeLabeling cur = f;
            cur.set_tuple(cand.constraint, cand.tuple);
            SolveStats local;
            while (inconsistency_count(restricted, cur) >= base) {
                auto step = improve(restricted, cur, {}, &local);
                if (!step) return;
                cur = std::move(*step);
            }
            found[static_cast<std::size_t>(idx)] = std::move(cur);
            found_stats[static_cast<std::size_t>(idx)] = local;
            int prev = best.load();
            while (idx < prev && !best.compare_exchange_weak(prev, idx)) {
            }
        };
        auto work = [&](int stripe) {
            for (int idx = stripe; idx < total; idx += workers) {
                if (idx > best.load()) continue;  // an earlier candidate already won
                evaluate(idx);
            }
        };

        if (workers == 1) {
            for (int idx = 0; idx < total && idx <= best.load(); ++idx) evaluate(idx);
        } else {
            std::vector<std::thread> threads;
            std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
            for (int i = 0; i < workers; ++i)
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

        const int winner = best.load();
        if (winner >= total) break;

        const Candidate& cand = candidates[static_cast<std::size_t>(winner)];
        const Walk walk =
            lift_general(inst, f, cand.constraint, cand.tuple, *found[winner], oracles);
        EdgeLabeling next = apply_walk(inst, f, walk);
        const int drop = walk.half_integral() ? 1 : 2;
        ECSP_CHECK(is_valid(inst, next) && inconsistency_count(inst, next) == base - drop,
                   "applied walk lowers the inconsistency count");
        if (opts.trace)
            opts.trace->push_back({{"event", "coverable_improve"},
                                   {"constraint", inst.constraint_id(cand.constraint)},
                                   {"tuple", inst.relation(cand.constraint).tuple_string(cand.tuple)},
                                   {"from", base},
                                   {"to", base - drop},
                                   {"half_integral", walk.half_integral()},
                                   {"walk", walk.to_string(inst)}});
        f = std::move(next);
        ++stats.improvements;
        const SolveStats& inner = found_stats[static_cast<std::size_t>(winner)];
        stats.augmentations += inner.augmentations;
        stats.blossoms += inner.blossoms;
        stats.contractions += inner.contractions;
        stats.max_contraction_depth =
            std::max(stats.max_contraction_depth, inner.max_contraction_depth);
    }

    SolveResult out;
    out.inconsistencies = inconsistency_count(inst, f);
    out.labeling = std::move(f);
    out.stats = stats;
    if (opts.trace)
        opts.trace->push_back(
            {{"event", "coverable_optimal"}, {"inconsistencies", out.inconsistencies}});
    return out;
}

}  // namespace edgecsp
