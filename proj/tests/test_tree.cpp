#include "helpers.hpp"
#include "qshedge/tree.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qshedge;
using qshedge::testing::make_g3;

namespace {

EventTree binary_t2() {
    return EventTree::validate(2, {{0, 0, std::nullopt, 1.0},
                                   {1, 1, 0, 1.2},
                                   {2, 1, 0, 0.8},
                                   {3, 2, 1, 1.5},
                                   {4, 2, 1, 1.0},
                                   {5, 2, 2, 1.0},
                                   {6, 2, 2, 0.5}});
}

TEST(TreeValidate, SmallestLegalTree) {
    EventTree t = EventTree::validate(
        1, {{0, 0, std::nullopt, 1.0}, {1, 1, 0, 2.0}, {2, 1, 0, 0.5}});
    EXPECT_EQ(t.size(), 3u);
    EXPECT_EQ(t.leaves().size(), 2u);
    EXPECT_EQ(t.root(), 0);
    EXPECT_TRUE(t.is_leaf(1));
}

TEST(TreeValidate, TimeSkew) {
    try {
        EventTree::validate(2, {{0, 0, std::nullopt, 1.0}, {1, 2, 0, 1.0}, {2, 1, 0, 1.0}, {3, 2, 2, 1.0}});
        FAIL() << "expected TimeSkew";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TimeSkew);
    }
}

TEST(TreeValidate, G3IsValid) {
    EventTree g3 = make_g3();
    EXPECT_EQ(g3.leaves().size(), 3u);
    EXPECT_EQ(g3.interior().size(), 1u);
    EXPECT_DOUBLE_EQ(g3.price(3), 2.0);
}

TEST(TreeValidate, DuplicateId) {
    EXPECT_THROW(EventTree::validate(1, {{0, 0, std::nullopt, 1.0}, {1, 1, 0, 1.0}, {1, 1, 0, 2.0}}), Error);
}

TEST(TreeValidate, OrphanAndSecondRoot) {
    try {
        EventTree::validate(1, {{0, 0, std::nullopt, 1.0}, {1, 1, 7, 1.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::OrphanNode);
    }
    try {
        EventTree::validate(1, {{0, 0, std::nullopt, 1.0}, {1, 0, std::nullopt, 1.0}, {2, 1, 0, 1.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::OrphanNode);
    }
}

TEST(TreeValidate, ChildlessInterior) {
    try {
        EventTree::validate(2, {{0, 0, std::nullopt, 1.0}, {1, 1, 0, 1.0}, {2, 1, 0, 2.0}, {3, 2, 1, 1.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ChildlessInterior);
    }
}

TEST(TreeValidate, NonFinitePrice) {
    EXPECT_THROW(
        EventTree::validate(1, {{0, 0, std::nullopt, 1.0}, {1, 1, 0, std::numeric_limits<double>::quiet_NaN()},
                                {2, 1, 0, 1.0}}),
        Error);
}

TEST(PathOf, DepthOne) {
    EventTree g3 = make_g3();
    auto path = path_of(g3, 3);
    ASSERT_EQ(path.size(), 2u);
    EXPECT_EQ(path[0], 0);
    EXPECT_EQ(path[1], 3);
}

TEST(PathOf, TimesIncrease) {
    EventTree t = binary_t2();
    for (NodeId leaf : t.leaves()) {
        auto path = path_of(t, leaf);
        ASSERT_EQ(path.size(), 3u);
        for (std::size_t i = 0; i < path.size(); ++i) EXPECT_EQ(t.time_of(path[i]), static_cast<int>(i));
    }
}

TEST(PathOf, UnknownLeaf) {
    EventTree g3 = make_g3();
    try {
        path_of(g3, 42);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnknownLeaf);
    }
    // interior node is not a leaf either
    EXPECT_THROW(path_of(g3, 0), Error);
}

TEST(Wealth, ZeroStrategyIsZero) {
    EventTree t = binary_t2();
    Strategy h;
    for (NodeId n : t.interior()) h.values[n] = 0.0;
    for (NodeId leaf : t.leaves()) EXPECT_DOUBLE_EQ(wealth(t, h, leaf), 0.0);
}

TEST(Wealth, G3HandValues) {
    EventTree g3 = make_g3();
    Strategy h{{{0, 2.0 / 3.0}}};
    EXPECT_NEAR(wealth(g3, h, 3), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(wealth(g3, h, 1), -1.0 / 3.0, 1e-15);
}

TEST(Wealth, Errors) {
    EventTree g3 = make_g3();
    Strategy empty;
    EXPECT_THROW(wealth(g3, empty, 3), Error);
    Strategy h{{{0, 1.0}}};
    try {
        wealth(g3, h, 99);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnknownLeaf);
    }
}

TEST(Wealth, LinearityProperty) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        Instance inst = qshedge::testing::random_instance(static_cast<std::uint64_t>(trial));
        Strategy h = qshedge::testing::random_strategy(inst.tree, rng);
        Strategy g = qshedge::testing::random_strategy(inst.tree, rng);
        const double c = 4.0 * qshedge::testing::uniform01(rng) - 2.0;
        Strategy sum, scaled;
        for (NodeId n : inst.tree.interior()) {
            sum.values[n] = h.values[n] + g.values[n];
            scaled.values[n] = c * h.values[n];
        }
        for (NodeId leaf : inst.tree.leaves()) {
            EXPECT_NEAR(wealth(inst.tree, sum, leaf), wealth(inst.tree, h, leaf) + wealth(inst.tree, g, leaf),
                        1e-9);
            EXPECT_NEAR(wealth(inst.tree, scaled, leaf), c * wealth(inst.tree, h, leaf), 1e-9);
        }
    }
}

TEST(Wealth, FlatPathGivesZero) {
    // single-child chain with constant price: every strategy has zero wealth
    EventTree t = EventTree::validate(2, {{0, 0, std::nullopt, 1.0}, {1, 1, 0, 1.0}, {2, 2, 1, 1.0}});
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Strategy h = qshedge::testing::random_strategy(t, rng, 10.0);
        EXPECT_DOUBLE_EQ(wealth(t, h, 2), 0.0);
    }
}

TEST(Wealth, PrefixAgreesWithTerminal) {
    EventTree t = binary_t2();
    std::mt19937_64 rng(11);
    Strategy h = qshedge::testing::random_strategy(t, rng);
    for (NodeId leaf : t.leaves()) {
        auto path = path_of(t, leaf);
        EXPECT_DOUBLE_EQ(wealth_at(t, h, path[0]), 0.0);
        EXPECT_NEAR(wealth_at(t, h, path[2]), wealth(t, h, leaf), 1e-15);
    }
}

TEST(StrategyChecks, ExactDomain) {
    EventTree t = binary_t2();
    Strategy missing{{{0, 1.0}}};
    EXPECT_THROW(check_strategy(t, missing), Error);
    Strategy extra{{{0, 1.0}, {1, 0.0}, {2, 0.0}, {3, 1.0}}};
    try {
        check_strategy(t, extra);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MissingStrategyNode);
    }
}

} // namespace
