#pragma once

#include "qshedge/instance.hpp"
#include "qshedge/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace qshedge {

/// Initial capital plus the strategy that superreplicates the claim from it.
struct HedgePlan {
    double price = 0.0;
    Strategy strategy;
};

/// The three prices of an instance and their optimizers. primal_price is the
/// least capital superreplicating the claim on the quasi-sure support;
/// dual_price the best value over normalized positive pricing rules killing
/// the zero-capital cone, i.e. over martingale measures vanishing on the
/// polar leaves; model_sup the best expectation within the given family.
/// primal_price == dual_price up to solver tolerance, while
/// gap = dual_price - model_sup can be strictly positive.
struct DualityReport {
    double primal_price = 0.0;
    double dual_price = 0.0;
    double model_sup = 0.0;
    double gap = 0.0;
    Strategy optimal_strategy;
    std::map<NodeId, double> optimal_dual_measure; // all leaves; zero on polar ones
    std::string argmax_model;
};

struct VerifyResult {
    bool ok = true;
    NodeId worst_leaf = 0;
    double shortfall = 0.0; // claim minus terminal wealth at the worst leaf; positive means violated
};

/// Leaves charged by at least one model, ascending id. Throws EmptySupport
/// when every leaf is polar (a malformed family; probability weights summing
/// to one always charge something).
inline std::vector<NodeId> support_leaves(const Instance& instance) {
    PolarReport polar = polar_set(instance.tree, instance.family);
    if (polar.qs_support.empty()) throw Error(Errc::EmptySupport, "every leaf is polar");
    return polar.qs_support;
}

/// Non-terminal nodes with at least one supported leaf below them, ascending
/// id. Only these contribute rows to the dual program.
inline std::vector<NodeId> reachable_interior(const EventTree& tree, const std::vector<NodeId>& support) {
    std::set<NodeId> reach;
    for (NodeId leaf : support) {
        auto path = path_of(tree, leaf);
        reach.insert(path.begin(), path.end() - 1);
    }
    return {reach.begin(), reach.end()};
}

namespace hedgedetail {

// Primal hedge LP for an arbitrary terminal payoff.
// Variables: [0] initial capital (free), [1..] one position per non-terminal
// node in ascending id order (free). One row per supported leaf:
//   capital + sum over path of position * price increment >= payoff.
inline LinearProgram primal_for(const EventTree& tree, const std::vector<NodeId>& support, const Claim& payoff) {
    const std::vector<NodeId>& interior = tree.interior();
    std::map<NodeId, std::size_t> var_of;
    for (std::size_t k = 0; k < interior.size(); ++k) var_of[interior[k]] = 1 + k;

    std::vector<double> objective(1 + interior.size(), 0.0);
    objective[0] = 1.0;
    LinearProgram lp = LinearProgram::make(Sense::Min, std::move(objective));
    for (NodeId leaf : support) {
        std::vector<double> row(lp.num_vars(), 0.0);
        row[0] = 1.0;
        auto path = path_of(tree, leaf);
        for (std::size_t u = 1; u < path.size(); ++u)
            row[var_of[path[u - 1]]] += tree.price(path[u]) - tree.price(path[u - 1]);
        lp.add_constraint(std::move(row), Relation::GreaterEq, payoff.payoffs.at(leaf));
    }
    return lp;
}

} // namespace hedgedetail

/// Superreplication LP: minimize initial capital subject to terminal
/// domination of the claim on every supported leaf. Polar leaves contribute
/// no row; that is the whole content of the quasi-sure quantifier here.
inline LinearProgram build_primal(const Instance& instance) {
    return hedgedetail::primal_for(instance.tree, support_leaves(instance), instance.claim);
}

/// Algebraic transpose of build_primal: maximize the weighted payoff over
/// nonnegative leaf weights that sum to one and make the price process a
/// martingale node by node. Variables are the supported leaves in ascending
/// id order; row 0 is the normalization, then one row per reachable
/// non-terminal node in ascending id order.
inline LinearProgram build_dual(const Instance& instance) {
    const EventTree& tree = instance.tree;
    const std::vector<NodeId> support = support_leaves(instance);
    const std::vector<NodeId> reach = reachable_interior(tree, support);
    std::map<NodeId, std::size_t> var_of;
    for (std::size_t k = 0; k < support.size(); ++k) var_of[support[k]] = k;

    std::vector<double> objective(support.size(), 0.0);
    for (std::size_t k = 0; k < support.size(); ++k) objective[k] = instance.claim.payoffs.at(support[k]);
    LinearProgram lp = LinearProgram::make(Sense::Max, std::move(objective));
    for (std::size_t k = 0; k < support.size(); ++k) lp.lower[k] = 0.0;

    lp.add_constraint(std::vector<double>(support.size(), 1.0), Relation::Equal, 1.0);

    std::map<NodeId, std::vector<double>> node_row;
    for (NodeId n : reach) node_row[n].assign(support.size(), 0.0);
    for (NodeId leaf : support) {
        auto path = path_of(tree, leaf);
        for (std::size_t u = 1; u < path.size(); ++u)
            node_row[path[u - 1]][var_of[leaf]] = tree.price(path[u]) - tree.price(path[u - 1]);
    }
    for (NodeId n : reach) lp.add_constraint(std::move(node_row[n]), Relation::Equal, 0.0);
    return lp;
}

namespace hedgedetail {

inline LpSolution solve_primal(const Instance& instance, const LinearProgram& lp, double eps) {
    LpSolution sol = solve(lp, eps);
    if (sol.status == LpStatus::Unbounded)
        throw Error(Errc::InconsistentInstance,
                    "superreplication cost is unbounded below; the family cannot consist of "
                    "martingale measures charging the stated support");
    if (sol.status == LpStatus::Infeasible)
        throw Error(Errc::NumericalFailure, "primal hedge LP reported infeasible, impossible for finite claims");
    return sol;
}

inline std::pair<double, Strategy> extract_plan(const EventTree& tree, const LpSolution& sol) {
    Strategy strategy;
    const std::vector<NodeId>& interior = tree.interior();
    for (std::size_t k = 0; k < interior.size(); ++k) strategy.values[interior[k]] = sol.primal[1 + k];
    return {sol.primal[0], strategy};
}

} // namespace hedgedetail

/// Checks x + terminal wealth >= payoff - tol*scale on every supported leaf;
/// polar leaves are exempt. Reports the most violating (or, when all hold,
/// the tightest) leaf.
inline VerifyResult verify_superhedge(const Instance& instance, const HedgePlan& plan, double tol) {
    check_strategy(instance.tree, plan.strategy);
    const double allowance = tol * scale_of(instance);
    VerifyResult res;
    bool first = true;
    for (NodeId leaf : support_leaves(instance)) {
        const double shortfall =
            instance.claim.payoffs.at(leaf) - plan.price - wealth(instance.tree, plan.strategy, leaf);
        if (first || shortfall > res.shortfall) {
            res.worst_leaf = leaf;
            res.shortfall = shortfall;
            first = false;
        }
    }
    res.ok = res.shortfall <= allowance;
    return res;
}

/// Minimal superreplication price together with a strategy attaining it.
inline HedgePlan superhedge(const Instance& instance, double eps = kLpTol) {
    LpSolution sol = hedgedetail::solve_primal(instance, build_primal(instance), eps);
    auto [price, strategy] = hedgedetail::extract_plan(instance.tree, sol);
    HedgePlan plan{price, std::move(strategy)};
    if (!verify_superhedge(instance, plan, 1e-7).ok)
        throw Error(Errc::NumericalFailure, "optimal plan failed verification");
    return plan;
}

struct ModelSup {
    double value = 0.0;
    std::string model_name;
};

/// Best expected payoff within the given family, with the maximizer's name.
inline ModelSup model_sup(const Instance& instance) {
    ModelSup best;
    bool first = true;
    for (const Model& m : instance.family.models) {
        const double e = expectation(m, instance.claim);
        if (first || e > best.value) {
            best.value = e;
            best.model_name = m.name;
            first = false;
        }
    }
    return best;
}

/// Solves both hedge LPs and assembles the full price landscape. Throws
/// NumericalFailure when the solved pair violates the duality identity at
/// 2*eps*scale.
inline DualityReport duality_report(const Instance& instance, double eps = kLpTol) {
    const double scale = scale_of(instance);

    LpSolution primal = hedgedetail::solve_primal(instance, build_primal(instance), eps);
    LinearProgram dual_lp = build_dual(instance);
    LpSolution dual = solve(dual_lp, eps);
    if (dual.status != LpStatus::Optimal)
        throw Error(Errc::NumericalFailure, "dual hedge LP not optimal, impossible for a valid instance");

    DualityReport report;
    report.primal_price = primal.objective;
    report.dual_price = dual.objective;
    auto [price, strategy] = hedgedetail::extract_plan(instance.tree, primal);
    (void)price;
    report.optimal_strategy = std::move(strategy);

    const std::vector<NodeId> support = support_leaves(instance);
    for (NodeId leaf : instance.tree.leaves()) report.optimal_dual_measure[leaf] = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) report.optimal_dual_measure[support[k]] = dual.primal[k];

    ModelSup sup = model_sup(instance);
    report.model_sup = sup.value;
    report.argmax_model = sup.model_name;
    report.gap = report.dual_price - report.model_sup;

    const double tol = 2.0 * eps * scale;
    if (std::abs(report.primal_price - report.dual_price) > tol)
        throw Error(Errc::NumericalFailure, "primal and dual prices disagree beyond tolerance");
    if (report.model_sup > report.dual_price + tol)
        throw Error(Errc::NumericalFailure, "family expectation exceeds the dual price beyond tolerance");
    return report;
}

/// Membership test for the zero-capital superreplication cone: a payoff
/// belongs to it iff its superreplication price is <= 0 up to tolerance.
inline bool in_cone(const Instance& instance, const Claim& payoff, double eps = kLpTol) {
    check_claim(instance.tree, payoff);
    LpSolution sol = hedgedetail::solve_primal(
        instance, hedgedetail::primal_for(instance.tree, support_leaves(instance), payoff), eps);
    const double scale = 1.0 + std::max(instance.tree.max_abs_price(), payoff.max_abs());
    return sol.objective <= eps * scale;
}

} // namespace qshedge
