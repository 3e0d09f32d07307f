#include <CLI11.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "edgecsp/blossom_solver.hpp"
#include "edgecsp/coverable.hpp"
#include "edgecsp/dmatroid.hpp"
#include "edgecsp/instance.hpp"
#include "edgecsp/json_io.hpp"
#include "edgecsp/matching.hpp"

namespace {

using namespace edgecsp;

void print_output(const Json& out) { std::cout << out.dump(2) << "\n"; }

void write_trace(const std::string& path, const std::vector<TraceEvent>& events) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write trace file '" + path + "'");
    for (const TraceEvent& e : events) out << e.dump() << "\n";
}

// Number of valid labelings, saturating at cap + 1.
long long search_space(const Instance& inst, long long cap) {
    long long space = 1;
    for (int c = 0; c < inst.constraint_count(); ++c) {
        space *= static_cast<long long>(inst.relation(c).size());
        if (space > cap) return cap + 1;
    }
    return space;
}

Json stats_to_json(const SolveStats& s) {
    return Json{{"improvements", s.improvements},
                {"augmentations", s.augmentations},
                {"blossoms", s.blossoms},
                {"contractions", s.contractions},
                {"max_contraction_depth", s.max_contraction_depth}};
}

std::set<int> observed_levels(const Relation& m) {
    std::set<int> levels;
    for (BitTuple t : m.tuples()) levels.insert(std::popcount(t));
    return levels;
}

int cmd_solve(const std::string& path, const std::string& trace_path, bool verify,
              int workers, bool validate_forest, bool coverable) {
    const Json doc = load_json_file(path);
    const Instance inst = Instance::create(instance_from_json(doc));
    std::vector<TraceEvent> events;

    SolveResult result;
    Json oracle_kinds = Json::object();
    if (coverable) {
        const OracleMap oracles = detect_oracles(inst, oracles_from_json(doc));
        for (const auto& [id, oracle] : oracles) oracle_kinds[id] = oracle.kind;
        CoverableOptions opts;
        opts.workers = workers;
        opts.trace = trace_path.empty() ? nullptr : &events;
        result = solve_coverable(inst, oracles, opts);
    } else {
        SolveOptions opts;
        opts.validate_forest = validate_forest;
        opts.trace = trace_path.empty() ? nullptr : &events;
        result = optimize(inst, opts);
    }
    write_trace(trace_path, events);

    Json out{{"schema", kSchemaVersion},
             {"command", coverable ? "solve-coverable" : "solve"},
             {"count", result.inconsistencies},
             {"labeling", labeling_to_json(inst, result.labeling)},
             {"stats", stats_to_json(result.stats)}};
    if (coverable) out["oracles"] = std::move(oracle_kinds);

    bool disagree = false;
    if (verify) {
        const long long bound = 10'000'000;
        if (search_space(inst, bound) <= bound) {
            const BruteForceResult brute = brute_force_optimum(inst, bound, workers);
            disagree = brute.optimum != result.inconsistencies;
            out["oracle"] = Json{{"checked", true},
                                 {"count", brute.optimum},
                                 {"agree", !disagree}};
        } else {
            out["oracle"] = Json{{"checked", false}};
        }
    }

    print_output(out);
    std::cerr << "optimum " << result.inconsistencies << " on " << inst.var_count()
              << " variables, " << inst.constraint_count() << " constraints\n";
    if (disagree) {
        std::cerr << "solver disagrees with the brute-force oracle\n";
        return 3;
    }
    return 0;
}

int cmd_check_relation(const std::string& path) {
    const Relation r = relation_from_json(load_json_file(path));
    const bool dm = is_delta_matroid(r);
    const std::set<int> levels = observed_levels(r);
    Json out{{"schema", kSchemaVersion},
             {"command", "check-relation"},
             {"arity", r.arity()},
             {"tuples", static_cast<int>(r.size())},
             {"delta_matroid", dm},
             {"even", is_even(r)},
             {"coindependent", is_coindependent(r)},
             {"compact_witness_ok",
              is_gap2_free(levels) && is_compact_like(r, gc_ones(), levels)},
             {"interference_free", dm && !contains_interference_minor(r)},
             {"self_complementary", is_self_complementary(r)},
             {"d_transform_even", r.arity() >= 2 && is_even(d_transform(r))}};
    print_output(out);
    std::cerr << r.size() << " tuples over " << r.arity() << " variables\n";
    return 0;
}

int cmd_check_cover(const std::string& path) {
    const Json doc = load_json_file(path);
    const InstanceData data = instance_from_json(doc);
    const OracleMap configured = oracles_from_json(doc);

    Json constraints = Json::array();
    bool all_ok = true;
    for (const ConstraintSpec& spec : data.constraints) {
        Json entry{{"id", spec.id}};
        std::vector<std::string> problems;
        int checked = 0;
        try {
            const auto it = configured.find(spec.id);
            const CoverOracle oracle = it == configured.end()
                                           ? detect_cover_oracle(spec.relation)
                                           : it->second;
            entry["oracle"] = oracle.kind;
            for (BitTuple alpha : spec.relation.tuples()) {
                const Relation cover = oracle.cover(spec.relation, alpha);
                const CoverCheck check = verify_cover(spec.relation, alpha, cover);
                ++checked;
                for (const std::string& p : check.problems)
                    problems.push_back(spec.relation.tuple_string(alpha) + ": " + p);
            }
        } catch (const Error& e) {
            problems.push_back(e.what());
        }
        entry["tuples_checked"] = checked;
        entry["ok"] = problems.empty();
        entry["problems"] = problems;
        all_ok = all_ok && problems.empty();
        std::cerr << spec.id << ": " << (problems.empty() ? "ok" : "FAIL") << " ("
                  << checked << " tuples)\n";
        constraints.push_back(std::move(entry));
    }
    print_output(Json{{"schema", kSchemaVersion},
                      {"command", "check-cover"},
                      {"ok", all_ok},
                      {"constraints", std::move(constraints)}});
    return 0;
}

int cmd_oracle(const std::string& path, long long bound, int workers) {
    const Instance inst = Instance::create(instance_from_json(load_json_file(path)));
    const BruteForceResult result = brute_force_optimum(inst, bound, workers);
    print_output(Json{{"schema", kSchemaVersion},
                      {"command", "oracle"},
                      {"count", result.optimum},
                      {"labeling", labeling_to_json(inst, result.witness)}});
    std::cerr << "brute-force optimum " << result.optimum << " over "
              << search_space(inst, bound) << " valid labelings\n";
    return 0;
}

int cmd_realize(const std::string& path, int workers) {
    const PinnedGraph pg = pinned_graph_from_json(load_json_file(path));
    const Relation r = realize(pg.graph, pg.pins, workers);
    Json out = relation_to_json(r);
    out["schema"] = kSchemaVersion;
    out["command"] = "realize";
    print_output(out);
    std::cerr << "realized " << r.size() << " tuples over " << r.arity() << " pins\n";
    return 0;
}

int cmd_planar_report(const std::string& path) {
    const Json doc = load_json_file(path);
    const Json* list = nullptr;
    if (doc.is_array()) {
        list = &doc;
    } else if (doc.is_object() && doc.contains("relations")) {
        list = &doc.at("relations");
    } else {
        throw ParseError("expected an array of relations or {\"relations\": [...]}");
    }
    std::vector<Relation> gamma;
    for (const Json& entry : *list) gamma.push_back(relation_from_json(entry));
    const PlanarReport report = planar_tractability_report(gamma);
    Json out = planar_report_to_json(report);
    out["command"] = "planar-report";
    print_output(out);
    std::cerr << "tractability condition "
              << (report.condition_holds ? "holds" : "fails") << " for " << gamma.size()
              << " relations\n";
    return 0;
}

// --- random smoke instances for verify-fixtures ------------------------------

using Rng = std::mt19937_64;

int draw(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::vector<std::string> numbered_scope(int arity) {
    std::vector<std::string> scope;
    for (int i = 0; i < arity; ++i) scope.push_back("p" + std::to_string(i + 1));
    return scope;
}

// Pin profile of a random graph; retried until some deletion is matchable.
Relation random_realized_relation(Rng& rng, int arity) {
    for (;;) {
        const int n = arity + draw(rng, 0, 2);
        std::vector<std::string> nodes;
        for (int i = 0; i < n; ++i) nodes.push_back("n" + std::to_string(i + 1));
        std::vector<std::pair<std::string, std::string>> edges;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (draw(rng, 0, 99) < 55) edges.emplace_back(nodes[a], nodes[b]);
        const Relation r =
            realize(SimpleGraph::create(nodes, edges),
                    {nodes.begin(), nodes.begin() + arity});
        if (!r.empty()) return r;
    }
}

// Complement is a random independent set of the hypercube, which makes the
// remainder co-independent by construction.
Relation random_coindependent_relation(Rng& rng, int arity) {
    const BitTuple cube = bitmask(arity);
    std::vector<BitTuple> order(cube);
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<char> removed(cube, 0);
    for (BitTuple t : order) {
        if (draw(rng, 0, 99) >= 40) continue;
        bool isolated = true;
        for (int p = 0; p < arity && isolated; ++p)
            if (removed[t ^ bitmask(p)]) isolated = false;
        if (isolated) removed[t] = 1;
    }
    std::vector<BitTuple> tuples;
    for (BitTuple t = 0; t < cube; ++t)
        if (!removed[t]) tuples.push_back(t);
    return Relation(numbered_scope(arity), tuples);
}

// Level set of a random interval or same-parity ladder of ones-counts; both
// are gap-2-free.
Relation random_compact_relation(Rng& rng, int arity) {
    const int lo = draw(rng, 0, arity);
    const int hi = draw(rng, lo, arity);
    const int step = draw(rng, 0, 1) ? 2 : 1;
    std::set<int> s;
    for (int v = lo; v <= hi; v += step) s.insert(v);
    return compact_like_relation(numbered_scope(arity), gc_ones(), s);
}

Relation random_even_relation(Rng& rng, int arity) {
    Relation r;
    switch (draw(rng, 0, 2)) {
        case 0: r = matching_relation(arity); break;
        case 1: r = even_relation(arity); break;
        default: r = random_realized_relation(rng, arity); break;
    }
    FlipSet flips;
    for (int p = 0; p < arity; ++p)
        if (draw(rng, 0, 1)) flips.push_back(p);
    return flip_values(r, flips);
}

// Wire the given relations into an edge CSP by pairing up scope slots across
// constraints. Always matching the two constraints with the most unpaired
// slots keeps the rest reachable, given that no constraint holds more than
// half of all slots.
InstanceData random_instance(Rng& rng, const std::vector<Relation>& relations) {
    std::vector<std::vector<int>> open(relations.size());
    for (std::size_t c = 0; c < relations.size(); ++c) {
        open[c].resize(static_cast<std::size_t>(relations[c].arity()));
        std::iota(open[c].begin(), open[c].end(), 0);
        std::shuffle(open[c].begin(), open[c].end(), rng);
    }
    InstanceData data;
    std::vector<std::vector<std::string>> scopes;
    for (const Relation& r : relations)
        scopes.emplace_back(static_cast<std::size_t>(r.arity()));
    for (;;) {
        std::vector<int> order(relations.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return open[static_cast<std::size_t>(a)].size()
                   > open[static_cast<std::size_t>(b)].size();
        });
        auto& first = open[static_cast<std::size_t>(order[0])];
        auto& second = open[static_cast<std::size_t>(order[1])];
        if (second.empty()) break;
        const std::string name = "v" + std::to_string(data.variables.size() + 1);
        data.variables.push_back(name);
        scopes[static_cast<std::size_t>(order[0])][static_cast<std::size_t>(first.back())] =
            name;
        scopes[static_cast<std::size_t>(order[1])]
              [static_cast<std::size_t>(second.back())] = name;
        first.pop_back();
        second.pop_back();
    }
    for (std::size_t c = 0; c < relations.size(); ++c)
        data.constraints.push_back(
            {"C" + std::to_string(c + 1), rename_scope(relations[c], scopes[c])});
    return data;
}

std::vector<int> random_arities(Rng& rng, int count) {
    for (;;) {
        std::vector<int> arities;
        int total = 0;
        int largest = 0;
        for (int i = 0; i < count; ++i) {
            arities.push_back(draw(rng, 2, 4));
            total += arities.back();
            largest = std::max(largest, arities.back());
        }
        if (total % 2 == 0 && 2 * largest <= total) return arities;
    }
}

int cmd_verify_fixtures(std::uint64_t seed, int rounds, int workers) {
    Json fixtures = Json::array();
    bool all_ok = true;
    const auto run = [&](const std::string& name, const std::function<bool()>& body) {
        Json entry{{"name", name}};
        try {
            entry["ok"] = body();
        } catch (const Error& e) {
            entry["ok"] = false;
            entry["note"] = e.what();
        }
        if (!entry["ok"].get<bool>()) all_ok = false;
        std::cerr << (entry["ok"].get<bool>() ? "ok   " : "FAIL ") << name;
        if (entry.contains("note")) std::cerr << ": " << entry["note"].get<std::string>();
        std::cerr << "\n";
        fixtures.push_back(std::move(entry));
    };

    run("interference_relation_structure", [] {
        const Relation m = interference_relation();
        return is_delta_matroid(m) && !is_even(m) && contains_interference_minor(m)
               && !is_self_complementary(m);
    });

    run("arity6_not_matching_realizable", [] {
        const Relation r = counterexample_arity6();
        if (!is_even(r) || !is_delta_matroid(r) || r.size() != 19) return false;
        const PairDecomposition pd = check_pair_decomposition(r, 0, (1u << 6) - 1);
        const std::vector<std::pair<int, int>> expected = {
            {0, 3}, {1, 2}, {2, 3}, {2, 4}, {3, 5}};
        return !pd.partition && pd.admissible_pairs == expected;
    });

    run("triangle_pin_profile", [] {
        const Relation y = fixture_relation_y();
        return y == Relation::from_bit_strings(y.scope(), {"001", "010", "100", "111"});
    });

    run("supernode_pin_profile", [] {
        const Relation x = fixture_relation_x();
        return x == Relation::from_bit_strings(x.scope(),
                                               {"10000", "01000", "00100", "00010",
                                                "11001", "10101", "10011"});
    });

    run("single_edge_realization", [] {
        const SimpleGraph g = SimpleGraph::create({"u", "w"}, {{"u", "w"}});
        return realize(g, {"u", "w"})
               == Relation::from_bit_strings({"u", "w"}, {"00", "11"});
    });

    run("zebra_interference_even_tuple", [] {
        const Relation m = interference_relation();
        const auto cover = even_zebra_cover_search(m, 0);
        return cover
               && *cover == Relation::from_bit_strings(m.scope(),
                                                       {"000", "110", "101", "011"});
    });

    run("zebra_interference_odd_tuple", [] {
        const Relation m = interference_relation();
        const auto cover = even_zebra_cover_search(m, 7);
        return cover && *cover == Relation::from_bit_strings(m.scope(), {"111"});
    });

    run("zebra_product_no_cover", [] {
        const Relation m = interference_relation();
        const Relation p = direct_product(m, rename_scope(m, {"w1", "w2", "w3"}));
        const BitTuple alpha = 0b111000;  // (000, 111), odd ones-count
        return p.contains(alpha) && !even_zebra_cover_search(p, alpha);
    });

    run("planar_condition_examples", [] {
        const Relation pair = even_relation(2);
        if (d_transform(pair).tuples() != std::vector<BitTuple>{0}) return false;
        if (!planar_tractability_report({pair}).condition_holds) return false;
        if (planar_tractability_report({interference_relation()}).condition_holds)
            return false;
        const Relation free1({"v"}, {0, 1});
        const Relation zero1({"v"}, {0});
        return planar_tractability_report({free1}).condition_holds
               && !planar_tractability_report({zero1}).condition_holds;
    });

    run("matching_optimum_counts", [] {
        const SimpleGraph k3 = triangle_graph();
        const SimpleGraph pet = petersen_graph();
        return max_matching_size(k3) == 1 && max_matching_size(pet) == 5
               && !has_perfect_matching(k3) && has_perfect_matching(pet)
               && optimize(graph_to_instance(k3)).inconsistencies == 1
               && optimize(graph_to_instance(pet)).inconsistencies == 0;
    });

    Rng rng(seed);
    run("random_even_instances", [&] {
        for (int round = 0; round < rounds; ++round) {
            std::vector<Relation> relations;
            for (int a : random_arities(rng, draw(rng, 2, 4)))
                relations.push_back(random_even_relation(rng, a));
            const Instance inst = Instance::create(random_instance(rng, relations));
            const SolveResult solved = optimize(inst);
            if (solved.inconsistencies != brute_force_optimum(inst).optimum)
                return false;
            if (!is_valid(inst, solved.labeling)) return false;
        }
        return true;
    });

    run("random_coverable_instances", [&] {
        for (int round = 0; round < rounds; ++round) {
            std::vector<Relation> relations;
            for (int a : random_arities(rng, draw(rng, 2, 3))) {
                switch (draw(rng, 0, 2)) {
                    case 0: relations.push_back(random_coindependent_relation(rng, a)); break;
                    case 1: relations.push_back(random_compact_relation(rng, a)); break;
                    default: relations.push_back(random_even_relation(rng, a)); break;
                }
            }
            const Instance inst = Instance::create(random_instance(rng, relations));
            const OracleMap oracles = detect_oracles(inst);
            CoverableOptions opts;
            opts.workers = workers;
            const SolveResult solved = solve_coverable(inst, oracles, opts);
            if (solved.inconsistencies != brute_force_optimum(inst).optimum)
                return false;
        }
        return true;
    });

    print_output(Json{{"schema", kSchemaVersion},
                      {"command", "verify-fixtures"},
                      {"seed", seed},
                      {"rounds", rounds},
                      {"ok", all_ok},
                      {"fixtures", std::move(fixtures)}});
    if (!all_ok) {
        std::cerr << "fixture failures\n";
        return 3;
    }
    std::cerr << "all fixtures ok\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"edge CSP solver for delta-matroid constraints given as tuple lists"};
    app.require_subcommand(1);

    std::string instance_path;
    std::string relation_path;
    std::string graph_path;
    std::string gamma_path;
    std::string trace_path;
    bool verify_oracle = false;
    bool validate_forest = false;
    int workers = 1;
    long long bound = 10'000'000;
    std::uint64_t seed = 1;
    int rounds = 12;

    CLI::App* solve = app.add_subcommand(
        "solve", "optimal labeling for even delta-matroid constraints");
    solve->add_option("instance", instance_path, "instance JSON file")->required();
    solve->add_option("--trace", trace_path, "write the solver trace as JSON lines");
    solve->add_flag("--verify-oracle", verify_oracle,
                    "cross-check the result against exhaustive search");
    solve->add_flag("--validate-forest", validate_forest,
                    "validate the search forest after every mutation");
    solve->add_option("--workers", workers, "worker threads");

    CLI::App* solve_cov = app.add_subcommand(
        "solve-coverable", "optimal labeling via per-tuple covering oracles");
    solve_cov->add_option("instance", instance_path, "instance JSON file")->required();
    solve_cov->add_option("--trace", trace_path, "write the solver trace as JSON lines");
    solve_cov->add_flag("--verify-oracle", verify_oracle,
                        "cross-check the result against exhaustive search");
    solve_cov->add_option("--workers", workers, "worker threads");

    CLI::App* check_rel =
        app.add_subcommand("check-relation", "classify a relation file");
    check_rel->add_option("relation", relation_path, "relation JSON file")->required();

    CLI::App* check_cov = app.add_subcommand(
        "check-cover", "verify covering oracles for every constraint and tuple");
    check_cov->add_option("instance", instance_path, "instance JSON file")->required();

    CLI::App* oracle =
        app.add_subcommand("oracle", "exhaustive optimum, the brute-force reference");
    oracle->add_option("instance", instance_path, "instance JSON file")->required();
    oracle->add_option("--bound", bound, "largest admissible search space");
    oracle->add_option("--workers", workers, "worker threads");

    CLI::App* realize_cmd =
        app.add_subcommand("realize", "pin profile of a graph with pinned nodes");
    realize_cmd->add_option("graph", graph_path, "graph JSON file")->required();
    realize_cmd->add_option("--workers", workers, "worker threads");

    CLI::App* planar = app.add_subcommand(
        "planar-report", "planar tractability condition for a relation list");
    planar->add_option("relations", gamma_path, "relation list JSON file")->required();

    CLI::App* fixtures = app.add_subcommand(
        "verify-fixtures", "run the built-in fixtures and seeded random smoke checks");
    fixtures->add_option("--seed", seed, "seed for the random smoke instances");
    fixtures->add_option("--rounds", rounds, "random rounds per smoke check");
    fixtures->add_option("--workers", workers, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*solve)
            return cmd_solve(instance_path, trace_path, verify_oracle, workers,
                             validate_forest, false);
        if (*solve_cov)
            return cmd_solve(instance_path, trace_path, verify_oracle, workers, false,
                             true);
        if (*check_rel) return cmd_check_relation(relation_path);
        if (*check_cov) return cmd_check_cover(instance_path);
        if (*oracle) return cmd_oracle(instance_path, bound, workers);
        if (*realize_cmd) return cmd_realize(graph_path, workers);
        if (*planar) return cmd_planar_report(gamma_path);
        if (*fixtures) return cmd_verify_fixtures(seed, rounds, workers);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const RefusalError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 1;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
