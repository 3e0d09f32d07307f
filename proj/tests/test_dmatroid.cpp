#include <doctest.h>

#include <algorithm>
#include <bit>
#include <set>
#include <string>
#include <vector>

#include "edgecsp/dmatroid.hpp"
#include "edgecsp/matching.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace edgecsp;

namespace {

std::set<std::string> strings_of(const Relation& r) {
    const auto v = r.tuple_strings();
    return {v.begin(), v.end()};
}

// string-level second implementations, sharing nothing with the library
std::set<std::string> product_strings(const std::set<std::string>& a,
                                      const std::set<std::string>& b) {
    std::set<std::string> out;
    for (const auto& s : a)
        for (const auto& t : b) out.insert(s + t);
    return out;
}

std::set<std::string> identify_strings(const std::set<std::string>& m, int i, int j) {
    std::set<std::string> out;
    for (std::string s : m) {
        if (s[static_cast<std::size_t>(i)] != s[static_cast<std::size_t>(j)]) continue;
        s.erase(static_cast<std::size_t>(std::max(i, j)), 1);
        s.erase(static_cast<std::size_t>(std::min(i, j)), 1);
        out.insert(s);
    }
    return out;
}

std::set<std::string> fix_strings(const std::set<std::string>& m, int i, char value) {
    std::set<std::string> out;
    for (std::string s : m) {
        if (s[static_cast<std::size_t>(i)] != value) continue;
        s.erase(static_cast<std::size_t>(i), 1);
        out.insert(s);
    }
    return out;
}

std::set<std::string> d_transform_strings(const std::set<std::string>& m) {
    std::set<std::string> out;
    for (const std::string& s : m) {
        std::string d(s.size(), '0');
        for (std::size_t i = 0; i < s.size(); ++i)
            d[i] = s[i] != s[(i + 1) % s.size()] ? '1' : '0';
        out.insert(d);
    }
    return out;
}

Relation relation_over(int arity, const std::vector<BitTuple>& tuples) {
    std::vector<std::string> scope;
    for (int i = 1; i <= arity; ++i) scope.push_back("p" + std::to_string(i));
    return Relation(std::move(scope), tuples);
}

}  // namespace

TEST_CASE("relations store sorted deduplicated tuples over a named scope") {
    const Relation r = Relation::from_bit_strings({"x", "y"}, {"10", "01", "10"});
    CHECK(r.arity() == 2);
    CHECK(r.size() == 2);
    CHECK(r.tuples() == std::vector<BitTuple>{1, 2});  // sorted by value
    CHECK(r.tuple_string(1) == "10");                  // leftmost char = position 0
    CHECK(r.tuple_string(2) == "01");
    CHECK(r.contains(1));
    CHECK_FALSE(r.contains(0));
    CHECK(r.position_of("y") == 1);
    CHECK(r.position_of("z") == -1);

    CHECK(Relation().empty());
    const Relation point({}, {0});  // arity 0 with the empty tuple
    CHECK_FALSE(point.empty());
    CHECK(point.size() == 1);

    CHECK_THROWS_AS(Relation::from_bit_strings({"x"}, {"00"}), ParseError);
    CHECK_THROWS_AS(Relation::from_bit_strings({"x"}, {"2"}), ParseError);
    CHECK_THROWS_AS(Relation::from_bit_strings({"x", "x"}, {"00"}), PreconditionError);
    CHECK_THROWS_AS(Relation({"x"}, {4}), PreconditionError);
    std::vector<std::string> wide;
    for (int i = 0; i <= kMaxArity; ++i) wide.push_back("w" + std::to_string(i));
    CHECK_THROWS_AS(Relation(wide, {}), PreconditionError);
}

TEST_CASE("membership checks agree with the string oracle on every small relation") {
    for (int arity = 1; arity <= 3; ++arity) {
        const BitTuple limit = bitmask(arity);
        for (std::uint32_t mask = 1; mask < (1u << (1u << arity)); ++mask) {
            std::vector<BitTuple> tuples;
            for (BitTuple t = 0; t < limit; ++t)
                if ((mask >> t) & 1u) tuples.push_back(t);
            const Relation r = relation_over(arity, tuples);
            const auto m = testoracle::relation_strings(r);
            CHECK(is_delta_matroid(r) == testoracle::is_delta_matroid_strings(m));
            CHECK(is_even(r) == testoracle::is_even_strings(m));
        }
    }

    testgen::Rng rng(1812);
    for (int round = 0; round < 300; ++round) {
        std::vector<BitTuple> tuples;
        for (BitTuple t = 0; t < bitmask(4); ++t)
            if (testgen::draw(rng, 0, 99) < 35) tuples.push_back(t);
        if (tuples.empty()) continue;
        const Relation r = relation_over(4, tuples);
        const auto m = testoracle::relation_strings(r);
        CHECK(is_delta_matroid(r) == testoracle::is_delta_matroid_strings(m));
        CHECK(is_even(r) == testoracle::is_even_strings(m));
    }

    CHECK(is_delta_matroid(interference_relation()));
    CHECK_FALSE(is_even(interference_relation()));
    CHECK(is_delta_matroid(even_relation(4)));
    CHECK(is_even(even_relation(4)));
    CHECK(is_even(matching_relation(5)));
    CHECK_FALSE(is_delta_matroid(relation_over(3, {0, 7})));
    CHECK_THROWS_AS(is_delta_matroid(Relation()), PreconditionError);
    CHECK_THROWS_AS(is_even(Relation()), PreconditionError);
}

TEST_CASE("direct products concatenate scopes and tuples") {
    const Relation a = Relation::from_bit_strings({"a"}, {"0", "1"});
    const Relation b = Relation::from_bit_strings({"b1", "b2"}, {"01", "10"});
    const Relation ab = direct_product(a, b);
    CHECK(ab.scope() == std::vector<std::string>{"a", "b1", "b2"});
    CHECK(strings_of(ab) == std::set<std::string>{"001", "010", "101", "110"});
    CHECK(strings_of(ab) == product_strings(strings_of(a), strings_of(b)));

    CHECK_THROWS_AS(direct_product(a, rename_scope(b, {"a", "c"})), PreconditionError);

    testgen::Rng rng(42);
    for (int round = 0; round < 40; ++round) {
        const Relation x = testgen::random_delta_matroid(rng, 1 + round % 3, {"x1", "x2", "x3"});
        const Relation y = testgen::random_delta_matroid(rng, 1 + (round / 2) % 3,
                                                         {"y1", "y2", "y3"});
        const Relation xy = direct_product(x, y);
        CHECK(xy.size() == x.size() * y.size());
        CHECK(strings_of(xy) == product_strings(strings_of(x), strings_of(y)));
        CHECK(testoracle::is_delta_matroid_strings(strings_of(xy)));
        const Relation ex = testgen::random_even_delta_matroid(rng, 2, {"e1", "e2"});
        const Relation ey = testgen::random_even_delta_matroid(rng, 3, {"f1", "f2", "f3"});
        CHECK(is_even(direct_product(ex, ey)));
    }
}

TEST_CASE("identify keeps agreeing tuples and drops both variables") {
    const Relation inter = interference_relation();
    const Relation merged = identify(inter, "v1", "v2");
    CHECK(merged.scope() == std::vector<std::string>{"v3"});
    CHECK(strings_of(merged) == std::set<std::string>{"0", "1"});
    CHECK(strings_of(merged) == identify_strings(strings_of(inter), 0, 1));

    // identification can empty out a relation entirely
    const Relation skew = Relation::from_bit_strings({"x", "y"}, {"01", "10"});
    CHECK(identify(skew, "x", "y").empty());

    CHECK_THROWS_AS(identify(inter, "v1", "v9"), PreconditionError);
    CHECK_THROWS_AS(identify(inter, "v1", "v1"), PreconditionError);

    testgen::Rng rng(9001);
    for (int round = 0; round < 60; ++round) {
        const int arity = 2 + round % 4;
        const Relation m = testgen::random_delta_matroid(rng, arity);
        const int i = testgen::draw(rng, 0, arity - 1);
        int j = testgen::draw(rng, 0, arity - 2);
        if (j >= i) ++j;
        const Relation out = identify(m, m.scope()[static_cast<std::size_t>(i)],
                                      m.scope()[static_cast<std::size_t>(j)]);
        CHECK(strings_of(out) == identify_strings(strings_of(m), std::min(i, j), std::max(i, j)));
        if (!out.empty()) CHECK(testoracle::is_delta_matroid_strings(strings_of(out)));
    }
}

TEST_CASE("minors fix a variable and delete its position") {
    const Relation inter = interference_relation();
    const Relation low = minor_fix(inter, "v1", false);
    CHECK(low.scope() == std::vector<std::string>{"v2", "v3"});
    CHECK(strings_of(low) == std::set<std::string>{"00", "11"});
    const Relation high = minor_fix(inter, "v1", true);
    CHECK(strings_of(high) == std::set<std::string>{"10", "01", "11"});
    CHECK_THROWS_AS(minor_fix(inter, "nope", false), PreconditionError);

    testgen::Rng rng(77);
    for (int round = 0; round < 60; ++round) {
        const int arity = 2 + round % 4;
        const Relation m = testgen::random_delta_matroid(rng, arity);
        const int i = testgen::draw(rng, 0, arity - 1);
        const bool value = testgen::draw(rng, 0, 1) == 1;
        const Relation out = minor_fix(m, m.scope()[static_cast<std::size_t>(i)], value);
        CHECK(strings_of(out) == fix_strings(strings_of(m), i, value ? '1' : '0'));
        if (!out.empty()) CHECK(testoracle::is_delta_matroid_strings(strings_of(out)));
    }
}

TEST_CASE("value flips and scope permutations preserve structure") {
    const Relation inter = interference_relation();
    CHECK(flip_values(inter, {}) == inter);
    CHECK(strings_of(flip_values(inter, {0}))
          == std::set<std::string>{"100", "010", "001", "111", "011"});
    CHECK(strings_of(flip_values(relation_over(3, {0}), {0, 1, 2}))
          == std::set<std::string>{"111"});
    CHECK_THROWS_AS(flip_values(inter, {3}), PreconditionError);

    const Relation cycled = reorder_scope(inter, {2, 0, 1});
    CHECK(cycled.scope() == std::vector<std::string>{"v3", "v1", "v2"});
    // "110" (v1=1, v2=1, v3=0) becomes v3 v1 v2 = "011"
    CHECK(cycled.contains(6));
    CHECK_THROWS_AS(reorder_scope(inter, {0, 1}), PreconditionError);
    CHECK_THROWS_AS(reorder_scope(inter, {0, 1, 1}), PreconditionError);

    testgen::Rng rng(31415);
    for (int round = 0; round < 60; ++round) {
        const int arity = 1 + round % 5;
        const Relation m = testgen::random_delta_matroid(rng, arity);
        FlipSet flips;
        for (int i = 0; i < arity; ++i)
            if (testgen::draw(rng, 0, 1)) flips.push_back(i);
        const Relation flipped = flip_values(m, flips);
        CHECK(flipped.size() == m.size());
        CHECK(is_delta_matroid(flipped) == is_delta_matroid(m));
        CHECK(is_even(flipped) == is_even(m));
        CHECK(flip_values(flipped, flips) == m);

        std::vector<int> order;
        for (int i = 0; i < arity; ++i) order.push_back(i);
        std::shuffle(order.begin(), order.end(), rng);
        const Relation shuffled = reorder_scope(m, order);
        CHECK(is_delta_matroid(shuffled) == is_delta_matroid(m));
        CHECK(is_even(shuffled) == is_even(m));
    }
}

TEST_CASE("interference minors are found through fixes, renamings and flips") {
    const Relation inter = interference_relation();
    CHECK(contains_interference_minor(inter));
    CHECK(contains_interference_minor(flip_values(inter, {0, 2})));
    CHECK(contains_interference_minor(reorder_scope(inter, {1, 2, 0})));

    // padding with a free variable keeps the minor reachable
    const Relation padded = direct_product(inter, Relation::from_bit_strings({"w"}, {"0", "1"}));
    CHECK(contains_interference_minor(padded));

    CHECK_FALSE(contains_interference_minor(even_relation(3)));
    CHECK_FALSE(contains_interference_minor(fixture_relation_x()));
    CHECK_FALSE(contains_interference_minor(Relation::from_bit_strings({"a", "b"}, {"00", "11"})));

    testgen::Rng rng(271828);
    for (int round = 0; round < 40; ++round) {
        const Relation m = testgen::random_even_delta_matroid(rng, 2 + round % 4);
        CHECK_FALSE(contains_interference_minor(m));
    }
}

TEST_CASE("d-transform and self-complementarity match the dichotomy examples") {
    CHECK(strings_of(d_transform(Relation::from_bit_strings({"a", "b"}, {"00", "11"})))
          == std::set<std::string>{"00"});
    CHECK(strings_of(d_transform(relation_over(2, {0, 1, 2, 3})))
          == std::set<std::string>{"00", "11"});
    CHECK(strings_of(d_transform(relation_over(3, {0, 7}))) == std::set<std::string>{"000"});
    CHECK_THROWS_AS(d_transform(relation_over(1, {0})), PreconditionError);

    CHECK(is_self_complementary(Relation::from_bit_strings({"a", "b"}, {"00", "11"})));
    CHECK(is_self_complementary(relation_over(3, {0, 7, 2, 5})));
    CHECK_FALSE(is_self_complementary(relation_over(3, {0})));
    CHECK_THROWS_AS(is_self_complementary(Relation()), PreconditionError);

    testgen::Rng rng(161803);
    for (int round = 0; round < 60; ++round) {
        const int arity = 2 + round % 4;
        const BitTuple full = bitmask(arity) - 1;
        std::set<BitTuple> closed;
        for (int k = 0; k < 3; ++k) {
            const BitTuple t = static_cast<BitTuple>(testgen::draw(rng, 0, static_cast<int>(full)));
            closed.insert(t);
            closed.insert(t ^ full);
        }
        const Relation r = relation_over(arity, {closed.begin(), closed.end()});
        CHECK(is_self_complementary(r));
        const Relation dr = d_transform(r);
        // complement pairs collapse to single images, nothing else collides
        CHECK(dr.size() * 2 == r.size());
        CHECK(strings_of(dr) == d_transform_strings(strings_of(r)));
    }
}

TEST_CASE("planar tractability reports per-relation flags and the verdict") {
    const Relation eq2 = Relation::from_bit_strings({"a", "b"}, {"00", "11"});
    const PlanarReport good = planar_tractability_report({eq2, even_relation(2)});
    REQUIRE(good.relations.size() == 2);
    CHECK(good.relations[0].self_complementary);
    CHECK(good.relations[0].d_transform_applicable);
    CHECK(good.relations[0].d_transform_even_delta_matroid);
    CHECK(good.relations[0].satisfies_condition);
    CHECK(good.condition_holds);
    CHECK(good.even_constants
          == std::vector<Relation>{even_relation(1), even_relation(2), even_relation(3)});

    const PlanarReport bad = planar_tractability_report({eq2, relation_over(3, {0})});
    CHECK_FALSE(bad.relations[1].self_complementary);
    CHECK_FALSE(bad.relations[1].satisfies_condition);
    CHECK_FALSE(bad.condition_holds);

    // arity-1 relations skip the d-transform; {0,1} is the trivial constraint
    const PlanarReport tiny = planar_tractability_report(
        {Relation::from_bit_strings({"a"}, {"0", "1"}), relation_over(1, {0})});
    CHECK(tiny.relations[0].satisfies_condition);
    CHECK_FALSE(tiny.relations[0].d_transform_applicable);
    CHECK_FALSE(tiny.relations[1].satisfies_condition);
    CHECK_FALSE(tiny.condition_holds);

    CHECK_THROWS_AS(planar_tractability_report({}), PreconditionError);
}
