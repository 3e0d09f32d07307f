#include <doctest.h>

#include <algorithm>
#include <bit>
#include <set>
#include <string>
#include <vector>

#include "edgecsp/blossom_solver.hpp"
#include "edgecsp/coverable.hpp"
#include "edgecsp/dmatroid.hpp"
#include "edgecsp/instance.hpp"
#include "edgecsp/matching.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace edgecsp;

namespace {

std::set<std::string> as_strings(const Relation& m, const std::vector<BitTuple>& tuples) {
    std::set<std::string> out;
    for (BitTuple t : tuples) out.insert(m.tuple_string(t));
    return out;
}

std::set<std::string> as_strings(const Relation& m, const std::set<BitTuple>& tuples) {
    return as_strings(m, std::vector<BitTuple>(tuples.begin(), tuples.end()));
}

BitTuple tuple_of(const Relation& m, const std::string& bits) {
    BitTuple t = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] == '1') t |= bitmask(static_cast<int>(i));
    REQUIRE(m.contains(t));
    return t;
}

Relation over(const Relation& like, const std::vector<std::string>& bits) {
    return Relation::from_bit_strings(like.scope(), bits);
}

}  // namespace

TEST_CASE("even neighbors and reachability follow the definition") {
    const Relation inter = interference_relation();

    // all three double flips of 000 have their intermediate single flip
    // outside the relation
    CHECK(as_strings(inter, even_neighbors(inter, tuple_of(inter, "000")))
          == std::set<std::string>{"110", "101", "011"});
    // 111 has no member at distance two at all
    CHECK(even_neighbors(inter, tuple_of(inter, "111")).empty());
    CHECK(reachable_set(inter, tuple_of(inter, "111")) == std::set<BitTuple>{tuple_of(inter, "111")});
    CHECK(as_strings(inter, reachable_set(inter, tuple_of(inter, "000")))
          == std::set<std::string>{"000", "110", "101", "011"});

    // a full cube has every intermediate inside, so no even-neighbors anywhere
    const Relation cube = cover_coindependent(
        Relation::from_bit_strings({"a", "b"}, {"00", "01", "10", "11"}), 0);
    const Relation full = Relation::from_bit_strings({"a", "b"}, {"00", "01", "10", "11"});
    for (BitTuple t : full.tuples()) CHECK(even_neighbors(full, t).empty());
    CHECK(cube.size() == 2);  // parity class of 00

    CHECK_THROWS_AS(even_neighbors(inter, tuple_of(full, "01")), PreconditionError);

    testgen::Rng rng(411);
    for (int round = 0; round < 40; ++round) {
        const Relation m = testgen::random_delta_matroid(rng, 2 + round % 3);
        for (BitTuple alpha : m.tuples()) {
            const int parity = std::popcount(alpha) & 1;
            for (BitTuple beta : reachable_set(m, alpha)) {
                CHECK((std::popcount(beta) & 1) == parity);
                CHECK(m.contains(beta));
            }
        }
    }
}

TEST_CASE("verify_cover checks the three conditions") {
    const Relation inter = interference_relation();
    CHECK(verify_cover(inter, tuple_of(inter, "000"),
                       over(inter, {"000", "110", "101", "011"}))
              .ok);
    CHECK(verify_cover(inter, tuple_of(inter, "111"), over(inter, {"111"})).ok);

    // dropping a reachable tuple violates containment
    const CoverCheck missing =
        verify_cover(inter, tuple_of(inter, "000"), over(inter, {"000", "110", "101"}));
    CHECK_FALSE(missing.ok);
    CHECK(missing.problems.front().find("missing") != std::string::npos);

    // mixing parities breaks evenness
    const CoverCheck mixed = verify_cover(inter, tuple_of(inter, "000"),
                                          over(inter, {"000", "110", "101", "011", "111"}));
    CHECK_FALSE(mixed.ok);

    // a cover member at distance two from a reachable tuple whose connecting
    // single flips leave the relation
    const Relation pair = Relation::from_bit_strings({"a", "b", "c", "d"}, {"0000", "1100"});
    const CoverCheck leak = verify_cover(pair, 0, over(pair, {"0000", "1100", "0011", "1111"}));
    CHECK_FALSE(leak.ok);
    CHECK(leak.problems.front().find("single flip") != std::string::npos);

    // arity mismatch is reported, not silently compared
    CHECK_FALSE(verify_cover(inter, 0, pair).ok);
}

TEST_CASE("co-independent relations cover by parity class") {
    const Relation m = Relation::from_bit_strings({"a", "b"}, {"00", "01", "11"});
    CHECK(is_coindependent(m));
    const Relation cover = cover_coindependent(m, tuple_of(m, "00"));
    CHECK(cover.scope() == m.scope());
    CHECK(as_strings(cover, cover.tuples()) == std::set<std::string>{"00", "11"});
    CHECK(verify_cover(m, tuple_of(m, "00"), cover).ok);

    // a single missing neighbor breaks the property
    CHECK_FALSE(is_coindependent(Relation::from_bit_strings({"a", "b"}, {"00"})));
    CHECK_THROWS_AS(cover_coindependent(Relation::from_bit_strings({"a", "b"}, {"00"}), 0),
                    PreconditionError);

    testgen::Rng rng(733);
    int checked = 0;
    for (int round = 0; round < 60; ++round) {
        const Relation r = testgen::random_coindependent(rng, 1 + round % 4);
        CHECK(is_coindependent(r));
        CHECK(testoracle::is_delta_matroid_strings(testoracle::relation_strings(r)));
        CHECK(2 * r.size() >= std::size_t{1} << r.arity());
        for (BitTuple alpha : r.tuples()) {
            CHECK(verify_cover(r, alpha, cover_coindependent(r, alpha)).ok);
            ++checked;
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("gc functions and gap-free level sets describe compact relations") {
    CHECK(check_gc_function(gc_ones(), 4).ok);

    // agreements against a fixed reference tuple also satisfy both axioms
    const GcFunction agree{"agree",
                           [](BitTuple t) { return 4 - std::popcount((t ^ 0b0101u) & 0xfu); }};
    CHECK(check_gc_function(agree, 4).ok);

    const GcFunction flat{"flat", [](BitTuple) { return 0; }};
    const CoverCheck broken = check_gc_function(flat, 3);
    CHECK_FALSE(broken.ok);
    CHECK(broken.problems.front().find("single flip") != std::string::npos);

    CHECK(is_gap2_free({}));
    CHECK(is_gap2_free({1}));
    CHECK(is_gap2_free({0, 2}));
    CHECK(is_gap2_free({0, 1, 2}));
    CHECK_FALSE(is_gap2_free({0, 3}));
    CHECK_FALSE(is_gap2_free({1, 4, 5}));

    // exactly-one-bit relations are the ones-count level set of {1}
    CHECK(compact_like_relation(matching_relation(3).scope(), gc_ones(), {1})
          == matching_relation(3));
    CHECK(is_compact_like(matching_relation(5), gc_ones(), {1}));
    CHECK_FALSE(is_compact_like(matching_relation(3), gc_ones(), {0, 1}));

    testgen::Rng rng(5150);
    for (int round = 0; round < 60; ++round) {
        const auto [relation, levels] = testgen::random_compact_like(rng, 1 + round % 5);
        CHECK(is_compact_like(relation, gc_ones(), levels));
        // every compact-like set satisfies the exchange axiom
        CHECK(testoracle::is_delta_matroid_strings(testoracle::relation_strings(relation)));
    }
}

TEST_CASE("compact covers follow the listing construction") {
    const Relation all2 = Relation::from_bit_strings({"a", "b"}, {"00", "01", "10", "11"});
    const Relation c00 = cover_compact(all2, gc_ones(), {0, 1, 2}, tuple_of(all2, "00"));
    CHECK(as_strings(c00, c00.tuples()) == std::set<std::string>{"00", "11"});
    const Relation c01 = cover_compact(all2, gc_ones(), {0, 1, 2}, tuple_of(all2, "01"));
    CHECK(as_strings(c01, c01.tuples()) == std::set<std::string>{"01", "10"});

    const Relation even2 = Relation::from_bit_strings({"a", "b"}, {"00", "11"});
    const Relation cg = cover_compact(even2, gc_ones(), {0, 2}, tuple_of(even2, "00"));
    CHECK(as_strings(cg, cg.tuples()) == std::set<std::string>{"00", "11"});

    CHECK_THROWS_AS(cover_compact(even2, gc_ones(), {0, 3}, 0), PreconditionError);
    CHECK_THROWS_AS(cover_compact(even2, gc_ones(), {0, 1, 2}, 0), PreconditionError);

    testgen::Rng rng(20121);
    int verified = 0;
    for (int round = 0; round < 80; ++round) {
        const auto [relation, levels] = testgen::random_compact_like(rng, 1 + round % 5);
        const int lo = *levels.begin();
        const int hi = *levels.rbegin();
        for (BitTuple alpha : relation.tuples()) {
            const Relation cover = cover_compact(relation, gc_ones(), levels, alpha);
            CHECK(verify_cover(relation, alpha, cover).ok);
            // the listing equals the direct level-set description
            std::set<int> inside;
            for (int x = lo; x <= hi; ++x)
                if (x % 2 == std::popcount(alpha) % 2) inside.insert(x);
            CHECK(cover == compact_like_relation(relation.scope(), gc_ones(), inside));
            ++verified;
        }
    }
    CHECK(verified > 150);
}

TEST_CASE("interference-free relations cover by parity class") {
    CHECK_THROWS_AS(cover_interference_free(interference_relation(), 0), PreconditionError);

    // an even relation is covered by itself
    const Relation y = fixture_relation_y();
    for (BitTuple alpha : y.tuples()) CHECK(cover_interference_free(y, alpha) == y);

    const Relation one_var = Relation::from_bit_strings({"a"}, {"0", "1"});
    CHECK(as_strings(one_var, cover_interference_free(one_var, 0).tuples())
          == std::set<std::string>{"0"});
    CHECK(as_strings(one_var, cover_interference_free(one_var, 1).tuples())
          == std::set<std::string>{"1"});

    testgen::Rng rng(86);
    int covered = 0, odd_pairs = 0;
    for (int round = 0; round < 50; ++round) {
        const Relation m = testgen::random_interference_free(rng, 2 + round % 4);
        for (BitTuple alpha : m.tuples()) {
            CHECK(verify_cover(m, alpha, cover_interference_free(m, alpha)).ok);
            ++covered;
        }
        // odd-distance members always admit a single flip staying inside
        for (BitTuple alpha : m.tuples())
            for (BitTuple beta : m.tuples()) {
                const BitTuple diff = alpha ^ beta;
                if (std::popcount(diff) % 2 == 0) continue;
                ++odd_pairs;
                bool found = false;
                for (int v = 0; v < m.arity() && !found; ++v)
                    found = bit(diff, v) && m.contains(alpha ^ bitmask(v));
                CHECK(found);
            }
    }
    CHECK(covered > 100);
    CHECK(odd_pairs > 50);
}

TEST_CASE("zebra search finds the interference covers and rejects the product") {
    const Relation inter = interference_relation();

    const auto w000 = even_zebra_cover_search(inter, tuple_of(inter, "000"));
    REQUIRE(w000.has_value());
    CHECK(as_strings(*w000, w000->tuples()) == std::set<std::string>{"000", "110", "101", "011"});
    CHECK(verify_cover(inter, tuple_of(inter, "000"), *w000).ok);

    const auto w111 = even_zebra_cover_search(inter, tuple_of(inter, "111"));
    REQUIRE(w111.has_value());
    CHECK(as_strings(*w111, w111->tuples()) == std::set<std::string>{"111"});

    // an even relation is its own witness
    const Relation y = fixture_relation_y();
    const auto wy = even_zebra_cover_search(y, y.tuples().front());
    REQUIRE(wy.has_value());
    CHECK(*wy == y);

    // the product of the interference relation with itself has no witness
    // for the odd parity class
    Relation right = inter;
    right = rename_scope(right, {"w1", "w2", "w3"});
    const Relation product = direct_product(inter, right);
    BitTuple odd_alpha = 0;
    bool found = false;
    for (BitTuple t : product.tuples())
        if (std::popcount(t) % 2 == 1 && !found) {
            odd_alpha = t;
            found = true;
        }
    REQUIRE(found);
    CHECK_FALSE(even_zebra_cover_search(product, odd_alpha).has_value());

    CHECK_THROWS_AS(even_zebra_cover_search(even_relation(9), 0), PreconditionError);
}

TEST_CASE("restricted instances replace constraints with covers") {
    // two constraints over the same two variables
    InstanceData data;
    data.variables = {"x", "y"};
    data.constraints.push_back({"C1", Relation::from_bit_strings({"x", "y"}, {"00", "01", "11"})});
    data.constraints.push_back({"C2", Relation::from_bit_strings({"x", "y"}, {"00", "11"})});
    const Instance inst = Instance::create(data);
    OracleMap oracles;
    oracles.emplace("C1", coindependent_oracle());
    oracles.emplace("C2", interference_free_oracle());

    const EdgeLabeling f = initial_labeling(inst);
    const Relation forced(inst.relation(0).scope(), {tuple_of(inst.relation(0), "11")});
    const Instance restricted = build_restricted_instance(inst, f, 0, forced, oracles);
    CHECK(restricted.relation(0) == forced);
    // C2 is even, so its cover is C2 itself
    CHECK(restricted.relation(1) == inst.relation(1));
    CHECK(is_even(restricted.relation(0)));
    CHECK(is_even(restricted.relation(1)));

    // with the original relation kept, the labeling stays valid
    const Instance covered = build_restricted_instance(inst, f, 0, inst.relation(0), oracles);
    CHECK(is_valid(covered, f));

    OracleMap missing;
    missing.emplace("C1", coindependent_oracle());
    CHECK_THROWS_WITH_AS(build_restricted_instance(inst, f, 0, forced, missing),
                         doctest::Contains("C2"), PreconditionError);
    CHECK_THROWS_AS(
        build_restricted_instance(
            inst, f, 0, Relation::from_bit_strings({"x", "y"}, {"10"}), oracles),
        PreconditionError);

    // mixed random instances: every cover in the restricted instance is even
    testgen::Rng rng(664);
    for (int round = 0; round < 25; ++round) {
        const auto sample = testgen::random_coverable_instance(rng, 4, 3);
        const Instance mixed = Instance::create(sample.data);
        const EdgeLabeling g = initial_labeling(mixed);
        const Relation first(mixed.relation(0).scope(), {mixed.relation(0).tuples().front()});
        const Instance forced_first = build_restricted_instance(mixed, g, 0, first, sample.oracles);
        for (int c = 0; c < forced_first.constraint_count(); ++c) {
            CHECK(is_even(forced_first.relation(c)));
            CHECK(is_delta_matroid(forced_first.relation(c)));
        }
    }
}

TEST_CASE("general augmenting walks may end inside a constraint") {
    // x is inconsistent and a single flip inside C2 repairs it
    InstanceData data;
    data.variables = {"x", "y"};
    data.constraints.push_back({"C1", Relation::from_bit_strings({"x", "y"}, {"00", "11"})});
    data.constraints.push_back({"C2", Relation::from_bit_strings({"x", "y"}, {"00", "10", "11"})});
    const Instance inst = Instance::create(data);

    EdgeLabeling f = initial_labeling(inst);
    f.set_tuple(1, tuple_of(inst.relation(1), "10"));
    REQUIRE(inconsistency_count(inst, f) == 1);
    EdgeLabeling g = initial_labeling(inst);
    REQUIRE(inconsistency_count(inst, g) == 0);

    const Walk tail = find_general_augmenting_walk(inst, f, g);
    CHECK(tail.half_integral());
    CHECK(tail.length() == 0);
    CHECK(inst.constraint_id(tail.tail_constraint()) == "C2");
    CHECK(inconsistency_count(inst, apply_walk(inst, f, tail)) == 0);

    CHECK_THROWS_AS(find_general_augmenting_walk(inst, g, f), PreconditionError);

    // on even instances the walk never ends inside a constraint
    testgen::Rng rng(90210);
    int integral = 0, half = 0;
    for (int round = 0; round < 240; ++round) {
        const bool even_only = round % 2 == 0;
        Instance cur = [&] {
            if (even_only) return Instance::create(testgen::random_even_instance(rng, 4, 3));
            return Instance::create(testgen::random_coverable_instance(rng, 4, 3).data);
        }();
        const auto best = brute_force_optimum(cur);
        const EdgeLabeling from = testgen::random_labeling(rng, cur);
        if (best.optimum >= inconsistency_count(cur, from)) continue;
        const Walk walk = find_general_augmenting_walk(cur, from, best.witness);
        CHECK(is_augmenting(cur, from, walk));
        const int drop = walk.half_integral() ? 1 : 2;
        CHECK(inconsistency_count(cur, apply_walk(cur, from, walk))
              == inconsistency_count(cur, from) - drop);
        if (even_only) CHECK_FALSE(walk.half_integral());
        ++(walk.half_integral() ? half : integral);
    }
    CHECK(integral >= 40);
    CHECK(half >= 5);
}

TEST_CASE("lifting pulls covered-instance improvements back to the original") {
    testgen::Rng rng(31337);
    int lifted = 0, half = 0;
    for (int round = 0; round < 120 && lifted < 40; ++round) {
        const auto sample = testgen::random_coverable_instance(rng, 4, 3);
        const Instance inst = Instance::create(sample.data);
        const EdgeLabeling f = initial_labeling(inst);
        const int base = inconsistency_count(inst, f);
        if (base == 0) continue;

        // first candidate whose forced instance improves on f
        for (int c = 0; c < inst.constraint_count() && lifted < 40; ++c) {
            for (BitTuple alpha : inst.relation(c).tuples()) {
                const Relation forced(inst.relation(c).scope(), {alpha});
                const Instance restricted =
                    build_restricted_instance(inst, f, c, forced, sample.oracles);
                EdgeLabeling cur = f;
                cur.set_tuple(c, alpha);
                bool better = inconsistency_count(restricted, cur) < base;
                while (!better) {
                    auto step = improve(restricted, cur);
                    if (!step) break;
                    cur = std::move(*step);
                    better = inconsistency_count(restricted, cur) < base;
                }
                if (!better) continue;

                const Walk walk = lift_general(inst, f, c, alpha, cur, sample.oracles);
                CHECK(is_augmenting(inst, f, walk));
                const int drop = walk.half_integral() ? 1 : 2;
                CHECK(inconsistency_count(inst, apply_walk(inst, f, walk)) == base - drop);
                if (walk.half_integral()) ++half;
                ++lifted;
                break;
            }
        }
    }
    CHECK(lifted >= 30);
    CHECK(half >= 3);
}

TEST_CASE("solve_coverable matches exhaustive search") {
    testgen::Rng rng(20260814);
    int improved_total = 0;
    for (int round = 0; round < 60; ++round) {
        const auto sample = testgen::random_coverable_instance(rng, 4, 3);
        const Instance inst = Instance::create(sample.data);

        CoverableOptions opts;
        const SolveResult got = solve_coverable(inst, sample.oracles, opts);
        CHECK(is_valid(inst, got.labeling));
        CHECK(inconsistency_count(inst, got.labeling) == got.inconsistencies);

        const auto expected = brute_force_optimum(inst);
        CHECK(got.inconsistencies == expected.optimum);
        CHECK(got.inconsistencies
              == testoracle::optimum_by_enumeration(sample.data));

        improved_total += got.stats.improvements;

        if (round % 10 == 0) {
            CoverableOptions parallel;
            parallel.workers = 3;
            const SolveResult multi = solve_coverable(inst, sample.oracles, parallel);
            CHECK(multi.inconsistencies == got.inconsistencies);
            CHECK(multi.labeling == got.labeling);
            CHECK(multi.stats.improvements == got.stats.improvements);
        }
    }
    CHECK(improved_total > 20);
}

TEST_CASE("solve_coverable handles odd augmentations and refusals") {
    // co-independent pair whose initial labeling is one short of optimal
    InstanceData data;
    data.variables = {"x", "y"};
    data.constraints.push_back({"C1", Relation::from_bit_strings({"x", "y"}, {"00", "11"})});
    data.constraints.push_back({"C2", Relation::from_bit_strings({"x", "y"}, {"10", "01", "11"})});
    const Instance inst = Instance::create(data);
    REQUIRE(inconsistency_count(inst, initial_labeling(inst)) == 1);

    OracleMap oracles;
    oracles.emplace("C1", coindependent_oracle());
    oracles.emplace("C2", coindependent_oracle());

    std::vector<TraceEvent> trace;
    CoverableOptions opts;
    opts.trace = &trace;
    const SolveResult res = solve_coverable(inst, oracles, opts);
    CHECK(res.inconsistencies == 0);
    CHECK(res.stats.improvements == 1);
    bool saw_half = false;
    for (const TraceEvent& ev : trace)
        if (ev.value("event", "") == "coverable_improve") saw_half = ev.value("half_integral", false);
    CHECK(saw_half);

    // identical traces for identical inputs
    std::vector<TraceEvent> again;
    CoverableOptions repeat;
    repeat.trace = &again;
    solve_coverable(inst, oracles, repeat);
    CHECK(TraceEvent(trace).dump() == TraceEvent(again).dump());

    // an even instance agrees with the direct solver
    testgen::Rng rng(1123);
    const Instance even_inst = Instance::create(testgen::random_even_instance(rng, 4, 3));
    OracleMap even_oracles;
    for (int c = 0; c < even_inst.constraint_count(); ++c)
        even_oracles.emplace(even_inst.constraint_id(c), interference_free_oracle());
    CHECK(solve_coverable(even_inst, even_oracles).inconsistencies
          == optimize(even_inst).inconsistencies);

    // a cover that forgets reachable tuples is rejected in strict mode
    OracleMap bad;
    bad.emplace("C1", coindependent_oracle());
    bad.emplace("C2", custom_oracle([](const Relation& m, BitTuple alpha) {
                    return Relation(m.scope(), {alpha});
                }));
    CHECK_THROWS_WITH_AS(solve_coverable(inst, bad), doctest::Contains("rejected"), RefusalError);

    // constraints must at least be delta-matroids
    InstanceData notdm;
    notdm.variables = {"x", "y", "z"};
    notdm.constraints.push_back({"A", Relation::from_bit_strings({"x", "y", "z"}, {"000", "111"})});
    notdm.constraints.push_back({"B", even_relation(3)});
    notdm.constraints.back().relation =
        rename_scope(notdm.constraints.back().relation, {"x", "y", "z"});
    OracleMap dummy;
    dummy.emplace("A", interference_free_oracle());
    dummy.emplace("B", interference_free_oracle());
    CHECK_THROWS_WITH_AS(solve_coverable(Instance::create(notdm), dummy),
                         doctest::Contains("delta-matroid"), RefusalError);

    // oracle map must cover every constraint
    OracleMap partial;
    partial.emplace("C1", coindependent_oracle());
    CHECK_THROWS_AS(solve_coverable(inst, partial), PreconditionError);
}

TEST_CASE("covers respect products and identification") {
    testgen::Rng rng(777);
    int product_checked = 0, identify_checked = 0, reach_checked = 0;
    for (int round = 0; round < 25; ++round) {
        const Relation a = testgen::random_coindependent(rng, 3, {"a1", "a2", "a3"});
        const Relation b = testgen::random_coindependent(rng, 2, {"b1", "b2"});
        const Relation ab = direct_product(a, b);

        // reachability in the product projects to reachability in the parts
        for (BitTuple alpha : a.tuples())
            for (BitTuple beta : b.tuples()) {
                const BitTuple pair = alpha | (beta << a.arity());
                const auto reach_a = reachable_set(a, alpha);
                const auto reach_b = reachable_set(b, beta);
                for (BitTuple joint : reachable_set(ab, pair)) {
                    const BitTuple low = joint & (bitmask(a.arity()) - 1);
                    const BitTuple high = joint >> a.arity();
                    CHECK(reach_a.count(low));
                    CHECK(reach_b.count(high));
                    ++reach_checked;
                }
                // the product of the two covers is a cover of the product
                const Relation joint_cover =
                    direct_product(cover_coindependent(a, alpha), cover_coindependent(b, beta));
                CHECK(verify_cover(ab, pair, joint_cover).ok);
                ++product_checked;
                if (product_checked >= 40) break;
            }

        // identifying two variables in the cover of a witness covers the
        // identification
        const Relation merged = identify(a, "a1", "a2");
        if (merged.empty()) continue;
        for (BitTuple gamma : merged.tuples()) {
            BitTuple witness = 0;
            bool found = false;
            for (BitTuple t : a.tuples()) {
                if (bit(t, 0) != bit(t, 1)) continue;
                BitTuple projected = 0;
                int j = 0;
                for (int i = 2; i < a.arity(); ++i, ++j)
                    if (bit(t, i)) projected |= bitmask(j);
                if (projected == gamma && !found) {
                    witness = t;
                    found = true;
                }
            }
            REQUIRE(found);
            const Relation lifted_cover = cover_coindependent(a, witness);
            const Relation merged_cover = identify(lifted_cover, "a1", "a2");
            CHECK(verify_cover(merged, gamma, merged_cover).ok);
            ++identify_checked;
        }
    }
    CHECK(product_checked >= 40);
    CHECK(identify_checked >= 10);
    CHECK(reach_checked >= 40);
}

TEST_CASE("oracle detection picks the cheapest applicable class") {
    CHECK(detect_cover_oracle(even_relation(3)).kind == "coindependent");
    CHECK(detect_cover_oracle(interference_relation()).kind == "coindependent");
    CHECK(detect_cover_oracle(matching_relation(3)).kind == "compact");
    CHECK(detect_cover_oracle(fixture_relation_x()).kind == "interference_free");

    // padding the interference relation defeats the three direct classes:
    // both factors have nonempty complements, the ones-levels are not a level
    // set, and fixing the pad to 00 recovers the interference minor
    const Relation padded = direct_product(interference_relation(), even_relation(2));
    const CoverOracle fallback = detect_cover_oracle(padded);
    CHECK(fallback.kind == "zebra_search");
    for (BitTuple alpha : {padded.tuples().front(), padded.tuples().back()}) {
        const Relation cover = fallback.cover(padded, alpha);
        CHECK(verify_cover(padded, alpha, cover).ok);
    }

    // detection refuses what is not a delta-matroid, naming the constraint
    InstanceData data;
    data.variables = {"a", "b", "c", "d"};
    data.constraints.push_back({"C1", Relation::from_bit_strings({"a", "b"}, {"00", "11"})});
    data.constraints.push_back(
        {"C2", Relation::from_bit_strings({"a", "c", "d"}, {"000", "111"})});
    data.constraints.push_back(
        {"C3", Relation::from_bit_strings({"b", "c", "d"}, {"000", "110", "101", "011"})});
    const Instance broken = Instance::create(data);
    CHECK_THROWS_WITH_AS(detect_oracles(broken), doctest::Contains("C2"), RefusalError);

    // configured entries survive detection untouched
    data.constraints[1].relation =
        Relation::from_bit_strings({"a", "c", "d"}, {"000", "110", "101", "011"});
    const Instance fine = Instance::create(data);
    OracleMap configured;
    configured.emplace("C1", custom_oracle([](const Relation& m, BitTuple) { return m; }));
    const OracleMap oracles = detect_oracles(fine, configured);
    CHECK(oracles.at("C1").kind == "custom");
    CHECK(oracles.at("C2").kind == "coindependent");
    CHECK(oracles.size() == 3);

    const SolveResult solved = solve_coverable(fine, oracles);
    CHECK(solved.inconsistencies == brute_force_optimum(fine).optimum);
}
