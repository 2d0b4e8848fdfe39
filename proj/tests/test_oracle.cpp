#include "helpers.hpp"
#include "qshedge/oracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace qshedge;
using qshedge::testing::binomial_instance;
using qshedge::testing::gap3_instance;

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Mirror of the float-side random LP generator, emitted in both arithmetics.
std::pair<LinearProgram, ExactLp> random_lp_pair(std::mt19937_64& rng) {
    const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * 4.0);
    const std::size_t m = 1 + static_cast<std::size_t>(uniform01(rng) * 4.0);
    auto coin = [&](double p) { return uniform01(rng) < p; };
    auto small_int = [&]() { return static_cast<int>(uniform01(rng) * 7.0) - 3; };

    std::vector<int> obj(n);
    for (int& c : obj) c = small_int();
    const Sense sense = coin(0.5) ? Sense::Min : Sense::Max;
    LinearProgram fl = LinearProgram::make(sense, std::vector<double>(obj.begin(), obj.end()));
    ExactLp ex = ExactLp::make(sense, std::vector<Rational>(obj.begin(), obj.end()));
    for (std::size_t j = 0; j < n; ++j) {
        if (coin(0.6)) {
            fl.lower[j] = 0.0;
            ex.lower[j] = Rational(0);
        } else if (coin(0.3)) {
            fl.lower[j] = -2.0;
            ex.lower[j] = Rational(-2);
        }
        if (coin(0.25) && fl.lower[j] > -kInf) {
            const int width = 1 + static_cast<int>(uniform01(rng) * 3.0);
            fl.upper[j] = fl.lower[j] + width;
            ex.upper[j] = *ex.lower[j] + width;
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<int> row(n);
        for (int& a : row) a = small_int();
        const double r = uniform01(rng);
        const Relation rel = r < 0.4 ? Relation::LessEq : (r < 0.8 ? Relation::GreaterEq : Relation::Equal);
        const int rhs = small_int();
        fl.add_constraint(std::vector<double>(row.begin(), row.end()), rel, rhs);
        ex.add_constraint(std::vector<Rational>(row.begin(), row.end()), rel, Rational(rhs));
    }
    return {fl, ex};
}

ExactLp gap3_primal_exact() {
    ExactLp lp = ExactLp::make(Sense::Min, {Rational(1), Rational(0)});
    lp.add_constraint({Rational(1), Rational(-1, 2)}, Relation::GreaterEq, Rational(0));
    lp.add_constraint({Rational(1), Rational(0)}, Relation::GreaterEq, Rational(0));
    lp.add_constraint({Rational(1), Rational(1)}, Relation::GreaterEq, Rational(1));
    return lp;
}

TEST(ExactSolve, TrivialConstraint) {
    ExactLp lp = ExactLp::make(Sense::Min, {Rational(1)});
    lp.add_constraint({Rational(1)}, Relation::GreaterEq, Rational(3));
    ExactSolution sol = exact_solve(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_EQ(sol.value, Rational(3));
    EXPECT_EQ(sol.vertex[0], Rational(3));
}

TEST(ExactSolve, Gap3PrimalIsExactlyOneThird) {
    ExactSolution sol = exact_solve(gap3_primal_exact());
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_EQ(sol.value, Rational(1, 3));
    EXPECT_EQ(sol.vertex[0], Rational(1, 3));
    EXPECT_EQ(sol.vertex[1], Rational(2, 3));
}

TEST(ExactSolve, Gap3DualVertex) {
    ExactLp lp = ExactLp::make(Sense::Max, {Rational(0), Rational(0), Rational(1)});
    for (std::size_t j = 0; j < 3; ++j) lp.lower[j] = Rational(0);
    lp.add_constraint({Rational(1), Rational(1), Rational(1)}, Relation::Equal, Rational(1));
    lp.add_constraint({Rational(-1, 2), Rational(0), Rational(1)}, Relation::Equal, Rational(0));
    ExactSolution sol = exact_solve(lp);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_EQ(sol.value, Rational(1, 3));
    EXPECT_EQ(sol.vertex[0], Rational(2, 3));
    EXPECT_EQ(sol.vertex[1], Rational(0));
    EXPECT_EQ(sol.vertex[2], Rational(1, 3));
}

TEST(ExactSolve, InfeasibleAndUnbounded) {
    ExactLp inf = ExactLp::make(Sense::Min, {Rational(1)});
    inf.add_constraint({Rational(1)}, Relation::GreaterEq, Rational(3));
    inf.add_constraint({Rational(1)}, Relation::LessEq, Rational(2));
    EXPECT_EQ(exact_solve(inf).status, LpStatus::Infeasible);

    ExactLp unb = ExactLp::make(Sense::Min, {Rational(1)});
    unb.add_constraint({Rational(1)}, Relation::LessEq, Rational(5));
    EXPECT_EQ(exact_solve(unb).status, LpStatus::Unbounded);

    // free variable absent from all rows but present in the objective
    ExactLp free_unb = ExactLp::make(Sense::Max, {Rational(1), Rational(1)});
    free_unb.lower[0] = Rational(0);
    free_unb.upper[0] = Rational(1);
    free_unb.add_constraint({Rational(1), Rational(0)}, Relation::LessEq, Rational(1));
    EXPECT_EQ(exact_solve(free_unb).status, LpStatus::Unbounded);
}

TEST(ExactSolve, TooLargeGuard) {
    ExactLp lp = ExactLp::make(Sense::Min, std::vector<Rational>(20, Rational(1)));
    for (int i = 0; i < 10; ++i)
        lp.add_constraint(std::vector<Rational>(20, Rational(1)), Relation::GreaterEq, Rational(0));
    try {
        exact_solve(lp);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooLarge);
    }
}

TEST(ExactSolve, ValueIndependentOfColumnOrder) {
    ExactLp lp = gap3_primal_exact();
    ExactLp permuted = ExactLp::make(Sense::Min, {Rational(0), Rational(1)});
    for (const auto& con : lp.constraints)
        permuted.add_constraint({con.coeffs[1], con.coeffs[0]}, con.rel, con.rhs);
    ExactSolution a = exact_solve(lp);
    ExactSolution b = exact_solve(permuted);
    ASSERT_EQ(a.status, LpStatus::Optimal);
    ASSERT_EQ(b.status, LpStatus::Optimal);
    EXPECT_EQ(a.value, b.value);
    // row order must not matter either
    ExactLp reversed = ExactLp::make(Sense::Min, lp.objective);
    for (auto it = lp.constraints.rbegin(); it != lp.constraints.rend(); ++it)
        reversed.add_constraint(it->coeffs, it->rel, it->rhs);
    EXPECT_EQ(exact_solve(reversed).value, a.value);
}

TEST(ExactSolve, AgreesWithFloatSolverOnRandomLps) {
    std::mt19937_64 rng(555);
    int optimal = 0, infeasible = 0, unbounded = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto [fl, ex] = random_lp_pair(rng);
        ExactSolution es = exact_solve(ex);
        LpSolution fs = solve(fl);
        ASSERT_EQ(fs.status, es.status) << "status mismatch on trial " << trial;
        if (es.status == LpStatus::Optimal) {
            ++optimal;
            const double scale = 1.0 + std::abs(to_double(es.value));
            EXPECT_NEAR(fs.objective, to_double(es.value), 1e-7 * scale) << "trial " << trial;
        } else if (es.status == LpStatus::Infeasible) {
            ++infeasible;
        } else {
            ++unbounded;
        }
    }
    EXPECT_GT(optimal, 50);
    EXPECT_GT(infeasible, 10);
    EXPECT_GT(unbounded, 10);
}

TEST(RationalParsing, DecimalAndFractionForms) {
    EXPECT_EQ(parse_decimal("0.1"), Rational(1, 10));
    EXPECT_EQ(parse_decimal("-2.50"), Rational(-5, 2));
    EXPECT_EQ(parse_decimal("1e-3"), Rational(1, 1000));
    EXPECT_EQ(parse_decimal("12.5e2"), Rational(1250));
    EXPECT_EQ(parse_decimal("3"), Rational(3));
    EXPECT_EQ(parse_rational("1/3"), Rational(1, 3));
    EXPECT_EQ(parse_rational("-4/6"), Rational(-2, 3));
    EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
    EXPECT_THROW(parse_decimal("abc"), Error);
    EXPECT_THROW(parse_rational("1/0"), Error);
    // no binary round trip: one third as printed decimal stays a decimal
    EXPECT_EQ(parse_decimal("0.3333333333333333"), Rational(BigInt("3333333333333333"), BigInt("10000000000000000")));
}

TEST(CrossCheck, Gap3AllThreePrices) {
    Instance inst = gap3_instance();
    ExactInstance e = exact_from_instance(inst);
    // reference weights as true rationals, matching the file-based path
    e.weights[0] = {{1, Rational(1, 3)}, {2, Rational(1, 2)}, {3, Rational(1, 6)}};
    CrossCheckReport report = cross_check(inst, e);
    EXPECT_TRUE(report.ok);
    EXPECT_EQ(report.primal_exact, Rational(1, 3));
    EXPECT_EQ(report.dual_exact, Rational(1, 3));
    EXPECT_EQ(report.sup_exact, Rational(1, 6));
}

TEST(CrossCheck, ZeroClaim) {
    Instance inst = gap3_instance();
    for (auto& [leaf, v] : inst.claim.payoffs) v = 0.0;
    CrossCheckReport report = cross_check(inst);
    EXPECT_TRUE(report.ok);
    EXPECT_EQ(report.primal_exact, Rational(0));
    EXPECT_EQ(report.dual_exact, Rational(0));
}

TEST(CrossCheck, RandomInstancesAgree) {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Instance inst = qshedge::testing::random_instance(seed, 2, 3, 3);
        const std::size_t primal_size = 1 + inst.tree.interior().size() + inst.tree.leaves().size();
        if (primal_size > kOracleCap) continue;
        CrossCheckReport report = cross_check(inst);
        EXPECT_TRUE(report.ok) << "seed " << seed << " max error " << report.max_abs_error;
        ++checked;
    }
    EXPECT_GT(checked, 10);
}

TEST(ClosednessProbe, ConstantSequence) {
    Instance inst = gap3_instance();
    Strategy h{{{0, 1.0}}};
    Claim w;
    for (NodeId leaf : inst.tree.leaves()) w.payoffs[leaf] = wealth(inst.tree, h, leaf);
    std::vector<Claim> no_noise;
    for (int n = 0; n < 6; ++n) no_noise.push_back(Claim{{{1, 0.0}, {2, 0.0}, {3, 0.0}}});
    ClosednessReport report = probe_limit(inst, w, no_noise);
    EXPECT_TRUE(report.ok());
}

TEST(ClosednessProbe, HandBuiltSequence) {
    Instance inst = gap3_instance();
    Strategy h{{{0, 1.0}}};
    Claim w;
    for (NodeId leaf : inst.tree.leaves()) w.payoffs[leaf] = wealth(inst.tree, h, leaf);
    w.payoffs[1] -= 1.0; // member of the cone by construction
    std::vector<Claim> xi;
    double step = 0.5;
    for (int n = 0; n < 8; ++n) {
        xi.push_back(Claim{{{1, 0.0}, {2, -step}, {3, 0.0}}});
        step *= 0.5;
    }
    ClosednessReport report = probe_limit(inst, w, xi);
    EXPECT_TRUE(report.guard_ok);
    EXPECT_TRUE(report.members_ok);
    EXPECT_TRUE(report.limit_ok);
}

TEST(ClosednessProbe, GuardRejectsNonVanishingNoise) {
    Instance inst = gap3_instance();
    Claim w{{{1, 0.0}, {2, 0.0}, {3, 0.0}}};
    std::vector<Claim> xi(6, Claim{{{1, 0.0}, {2, -1.0}, {3, 0.0}}}); // stuck at seminorm 1/2
    ClosednessReport report = probe_limit(inst, w, xi);
    EXPECT_FALSE(report.guard_ok);
    EXPECT_FALSE(report.ok());
}

TEST(ClosednessProbe, SeededRunsPass) {
    Instance gap3 = gap3_instance();
    Instance bino = binomial_instance();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        EXPECT_TRUE(closedness_probe(gap3, 8, seed).ok()) << "seed " << seed;
        EXPECT_TRUE(closedness_probe(bino, 8, seed).ok()) << "seed " << seed;
    }
}

} // namespace
