#include "doctest.h"

#include "fki/fuzzy.hpp"
#include "fki/kb_json.hpp"
#include "oracle.hpp"

using namespace fki;

namespace {

KnowledgeBase two_feature_kb()
{
    KnowledgeBase kb;
    kb.features = {FeatureSpec::numeric("a", 0, 10), FeatureSpec::numeric("b", 0, 10)};
    kb.classes = {"Die", "Live"};
    kb.partitions = {LinguisticPartition{{{0, 5}, {5, 2}, {10, 5}}}, LinguisticPartition{{{0, 5}, {5, 5}, {10, 5}}}};
    return kb;
}

Instance inst(std::initializer_list<std::optional<double>> v) { return Instance{std::vector<std::optional<double>>(v)}; }

} // namespace

TEST_CASE("membership of an isosceles triangle")
{
    const TriangularMF mf{5, 2};
    CHECK(membership_degree(mf, 5) == 1.0);
    CHECK(membership_degree(mf, 7) == 0.0);
    CHECK(membership_degree(mf, 6) == 0.5);
    CHECK(membership_degree(mf, 3) == 0.0);
    CHECK(membership_degree(mf, -100) == 0.0);
}

TEST_CASE("membership properties")
{
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const TriangularMF mf{rng.uniform(-10, 10), rng.uniform(0.01, 5)};
        const double x = rng.uniform(-20, 20);
        const double d = membership_degree(mf, x);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK((d == 0.0) == (std::abs(x - mf.center) >= mf.half_width));
        CHECK((d == 1.0) == (x == mf.center));
    }
}

TEST_CASE("firing strength uses the product t-norm")
{
    auto kb = two_feature_kb();
    // degree on a's middle triangle at 6 is 0.5; on b's upper triangle at 9 is 0.8
    FuzzyRule rule{{AntecedentToken::linguistic(1), AntecedentToken::linguistic(2)}, 0};
    CHECK(firing_strength(rule, kb, inst({6.0, 9.0})) == doctest::Approx(0.4).epsilon(1e-15));

    FuzzyRule any{{AntecedentToken::dont_care(), AntecedentToken::dont_care()}, 1};
    CHECK(firing_strength(any, kb, inst({6.0, 9.0})) == 1.0);

    SUBCASE("missing values contribute a factor of one")
    {
        CHECK(firing_strength(rule, kb, inst({6.0, std::nullopt})) == 0.5);
    }
}

TEST_CASE("categorical mismatch annihilates the product")
{
    KnowledgeBase kb;
    kb.features = {FeatureSpec::categorical("sq", {"x", "o", "b"})};
    kb.classes = {"positive", "negative"};
    FuzzyRule rule{{AntecedentToken::category(0)}, 0};
    CHECK(firing_strength(rule, kb, inst({1.0})) == 0.0);
    CHECK(firing_strength(rule, kb, inst({0.0})) == 1.0);
}

TEST_CASE("firing strength is monotone in each antecedent degree")
{
    auto kb = two_feature_kb();
    FuzzyRule rule{{AntecedentToken::linguistic(1), AntecedentToken::linguistic(2)}, 0};
    double prev = 2.0;
    for (double a = 5.0; a <= 7.5; a += 0.25) {
        const double s = firing_strength(rule, kb, inst({a, 9.0}));
        CHECK(s <= prev);
        prev = s;
    }
}

TEST_CASE("classification")
{
    auto kb = two_feature_kb();

    SUBCASE("single candidate")
    {
        kb.rules = {FuzzyRule{{AntecedentToken::linguistic(1), AntecedentToken::dont_care()}, 1}};
        // 1 - |6.4 - 5| / 2 = 0.3
        CHECK(classify_instance(kb, inst({6.4, 1.0})) == std::optional<int>(1));
    }
    SUBCASE("nothing fires")
    {
        kb.rules = {FuzzyRule{{AntecedentToken::linguistic(1), AntecedentToken::dont_care()}, 1}};
        CHECK_FALSE(classify_instance(kb, inst({0.0, 1.0})).has_value());
    }
    SUBCASE("ties go to the lowest rule index")
    {
        kb.rules = {FuzzyRule{{AntecedentToken::linguistic(1), AntecedentToken::dont_care()}, 0},
                    FuzzyRule{{AntecedentToken::linguistic(0), AntecedentToken::dont_care()}, 1},
                    FuzzyRule{{AntecedentToken::dont_care(), AntecedentToken::linguistic(1)}, 1}};
        // rule 0 at a=6 and rule 2 at b=2.5 both give 0.5
        const auto x = inst({6.0, 2.5});
        REQUIRE(firing_strength(kb.rules[0], kb, x) == firing_strength(kb.rules[2], kb, x));
        CHECK(classify_instance(kb, x) == std::optional<int>(0));
    }
}

TEST_CASE("accuracy counts correct predictions")
{
    KnowledgeBase kb;
    kb.features = {FeatureSpec::categorical("c", {"p", "q"})};
    kb.classes = {"A", "B"};
    kb.rules = {FuzzyRule{{AntecedentToken::category(0)}, 0}, FuzzyRule{{AntecedentToken::category(1)}, 1}};
    LabeledDataset data{kb.features, kb.classes, {}};
    data.rows = {{inst({0.0}), 0}, {inst({1.0}), 1}, {inst({0.0}), 0}, {inst({1.0}), 0}};
    CHECK(accuracy(kb, data) == 0.75);

    SUBCASE("universal rule predicting every row's class")
    {
        KnowledgeBase all = kb;
        all.rules = {FuzzyRule{{AntecedentToken::dont_care()}, 0}};
        LabeledDataset zeros = data;
        for (auto& r : zeros.rows)
            r.label = 0;
        CHECK(accuracy(all, zeros) == 1.0);
    }
    SUBCASE("no rule fires")
    {
        KnowledgeBase none = kb;
        none.rules = {FuzzyRule{{AntecedentToken::category(0)}, 0}};
        LabeledDataset ones = data;
        for (auto& r : ones.rows)
            r.instance.values[0] = 1.0;
        CHECK(accuracy(none, ones) == 0.0);
    }
    SUBCASE("empty dataset is an error")
    {
        LabeledDataset empty{kb.features, kb.classes, {}};
        CHECK_THROWS_AS(accuracy(kb, empty), std::invalid_argument);
    }
}

TEST_CASE("complexity is the rule-count ratio")
{
    const std::vector<std::size_t> two{8, 12}, one{5}, three{5, 5, 5};
    CHECK(complexity(10, two) == 1.0);
    CHECK(complexity(10, one) == 2.0);
    CHECK(complexity(5, three) == 1.0);
    CHECK_THROWS_AS(complexity(3, std::vector<std::size_t>{}), std::invalid_argument);
}

TEST_CASE("fitness trades accuracy against complexity")
{
    CHECK(fitness(0.9, 2.0, 1.0) == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(fitness(0.9, 2.0, 0.0) == 0.9);
    // 0.9 / 2^0.01 evaluated at 40 digits with mpmath
    CHECK(std::abs(fitness(0.9, 2.0, 0.01) - 0.8937832458933323) < 1e-12);
    CHECK_THROWS_AS(fitness(0.9, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(fitness(0.9, -1.0, 1.0), std::invalid_argument);

    SUBCASE("monotonicity")
    {
        CHECK(fitness(0.6, 1.5, 0.5) < fitness(0.7, 1.5, 0.5));
        CHECK(fitness(0.6, 1.5, 0.5) > fitness(0.6, 1.6, 0.5));
    }
}

TEST_CASE("repair_partition")
{
    const auto f = FeatureSpec::numeric("x", 0, 10);

    SUBCASE("sorts centers")
    {
        const auto p = repair_partition({{{5, 1}, {2, 1}, {8, 1}}}, f);
        CHECK(p.mfs[0].center == 2);
        CHECK(p.mfs[1].center == 5);
        CHECK(p.mfs[2].center == 8);
    }
    SUBCASE("raises widths to the floor")
    {
        const auto p = repair_partition({{{5, -1}, {2, 1}, {8, 1}}}, f);
        CHECK(p.mfs[1].half_width == doctest::Approx(0.1).epsilon(1e-15));
    }
    SUBCASE("valid partitions are unchanged")
    {
        const LinguisticPartition p{{{0, 5}, {5, 5}, {10, 5}}};
        CHECK(repair_partition(p, f) == p);
    }
    SUBCASE("idempotent on random input")
    {
        Rng rng(5);
        for (int i = 0; i < 100; ++i) {
            LinguisticPartition p;
            for (int j = 0; j < 4; ++j)
                p.mfs.push_back({rng.uniform(-20, 30), rng.uniform(-5, 20)});
            const auto once = repair_partition(p, f);
            CHECK(repair_partition(once, f) == once);
        }
    }
    CHECK_THROWS(repair_partition({}, FeatureSpec::categorical("c", {"a"})));
}

TEST_CASE("accuracy matches the straight-line reference")
{
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto p = oracle::random_problem(seed);
        CAPTURE(seed);
        REQUIRE_NOTHROW(validate(p.kb));
        const auto expected = oracle::correct(p.kb, p.data);
        CHECK(correct_count(p.kb, p.data) == expected);
        CHECK(CompiledDataset(p.data).correct_count(p.kb) == expected);
        // accuracy * rows is an integer
        const double a = accuracy(p.kb, p.data) * static_cast<double>(p.data.rows.size());
        CHECK(a == std::round(a));
    }
}

TEST_CASE("classification is deterministic")
{
    const auto p = oracle::random_problem(77);
    for (const auto& row : p.data.rows)
        CHECK(classify_instance(p.kb, row.instance) == classify_instance(p.kb, row.instance));
}

TEST_CASE("knowledge base validation")
{
    auto kb = two_feature_kb();
    CHECK_THROWS(validate(kb)); // no rules
    kb.rules = {FuzzyRule{{AntecedentToken::linguistic(3), AntecedentToken::dont_care()}, 0}};
    CHECK_THROWS(validate(kb));
    kb.rules = {FuzzyRule{{AntecedentToken::linguistic(2), AntecedentToken::dont_care()}, 2}};
    CHECK_THROWS(validate(kb));
    kb.rules = {FuzzyRule{{AntecedentToken::category(0), AntecedentToken::dont_care()}, 0}};
    CHECK_THROWS(validate(kb));
    kb.rules = {FuzzyRule{{AntecedentToken::linguistic(2), AntecedentToken::dont_care()}, 1}};
    CHECK_NOTHROW(validate(kb));
    CHECK_THROWS(validate(FeatureSpec::numeric("x", 1, 1)));
    CHECK_THROWS(validate(FeatureSpec::categorical("c", {"a", "a"})));
}

TEST_CASE("knowledge base JSON")
{
    auto kb = two_feature_kb();
    kb.features.push_back(FeatureSpec::categorical("c", {"x", "o"}));
    kb.partitions[0].mfs[1].center = 0.1 + 0.2; // needs 17 significant digits
    kb.rules = {FuzzyRule{{AntecedentToken::linguistic(2), AntecedentToken::dont_care(), AntecedentToken::category(1)}, 1}};
    const auto text = dump_kb(kb);
    CHECK(parse_kb(text) == kb);

    const auto j = ordered_json::parse(text);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items())
        keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"features", "classes", "partitions", "rules"});
    CHECK(j["rules"][0]["antecedents"][0] == ordered_json{{"lv", 2}});
    CHECK(j["rules"][0]["antecedents"][1] == "dc");
    CHECK(j["rules"][0]["antecedents"][2] == ordered_json{{"cat", 1}});
    CHECK(j["rules"][0]["class"] == 1);

    CHECK_THROWS_AS(parse_kb("{not json"), DataError);
    auto bad = j;
    bad["rules"][0]["class"] = 5;
    CHECK_THROWS_AS(kb_from_json(bad), DataError);
}
