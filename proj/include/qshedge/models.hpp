#pragma once

#include "qshedge/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace qshedge {

/// Sum-to-one tolerance for probability weights.
inline constexpr double kProbTol = 1e-12;

/// Support / polar determination threshold. Kept at exactly zero: a leaf is
/// in the support iff its weight is literally positive. Thresholding here
/// would silently change the constraint set of the hedge LPs.
inline constexpr double kZeroWeight = 0.0;

/// Default martingale residual tolerance, relative to node mass and price
/// scale.
inline constexpr double kMartingaleTol = 1e-9;

/// Probability measure on scenarios, stored as leaf (path) weights. Weights
/// for omitted leaves are zero.
struct Model {
    std::string name;
    std::map<NodeId, double> leaf_weights;

    double weight(NodeId leaf) const {
        auto it = leaf_weights.find(leaf);
        return it == leaf_weights.end() ? 0.0 : it->second;
    }

    std::vector<NodeId> support(const EventTree& tree) const {
        std::vector<NodeId> s;
        for (NodeId leaf : tree.leaves())
            if (weight(leaf) > kZeroWeight) s.push_back(leaf);
        return s;
    }
};

/// Nonempty collection of candidate models, all on the same tree.
struct ModelFamily {
    std::vector<Model> models;
};

/// Leaves null under every model vs. the rest. The two lists partition the
/// leaf set; "quasi-sure" statements are statements on qs_support.
struct PolarReport {
    std::vector<NodeId> polar_leaves;
    std::vector<NodeId> qs_support;
};

/// Martingale check outcome with the per-node residual table.
struct MartingaleReport {
    struct NodeResidual {
        NodeId node;
        double mass;     // probability of reaching the node
        double residual; // |sum over children of mass(child) * (S(child) - S(node))|
        double bound;    // tolerance this residual was held against
        bool ok;
    };
    bool ok = true;
    std::vector<NodeResidual> residuals; // non-terminal nodes, ascending id
};

/// Throws InvalidModel unless weights are nonnegative, defined on leaves
/// only, and sum to one within kProbTol.
inline void check_model(const EventTree& tree, const Model& model) {
    double sum = 0.0;
    for (const auto& [leaf, w] : model.leaf_weights) {
        if (!tree.has_node(leaf) || !tree.is_leaf(leaf))
            throw Error(Errc::InvalidModel,
                        "model '" + model.name + "' puts weight on non-leaf " + std::to_string(leaf));
        if (!std::isfinite(w) || w < 0.0)
            throw Error(Errc::InvalidModel, "model '" + model.name + "' has invalid weight at leaf " +
                                                std::to_string(leaf));
        sum += w;
    }
    if (std::abs(sum - 1.0) > kProbTol)
        throw Error(Errc::InvalidModel,
                    "model '" + model.name + "' weights sum to " + std::to_string(sum) + ", not 1");
}

/// Mass of the information-set atom containing `node`: total weight of the
/// leaves whose path passes through it. Root mass is 1 for any probability
/// model.
inline double node_mass(const EventTree& tree, const Model& model, NodeId node) {
    if (!tree.has_node(node)) throw Error(Errc::UnknownNode, "unknown node " + std::to_string(node));
    if (tree.is_leaf(node)) return model.weight(node);
    double mass = 0.0;
    for (NodeId child : tree.children(node)) mass += node_mass(tree, model, child);
    return mass;
}

/// Tests whether the price process is a martingale under `model`: at every
/// non-terminal node with positive mass the weighted one-step increment must
/// vanish. The residual at node n is
///   | sum over leaves w through n of weight(w) * (S(child of n on the path to w) - S(n)) |
/// and is accepted when <= tol * mass(n) * (1 + max|S|).
inline MartingaleReport is_martingale_measure(const EventTree& tree, const Model& model,
                                              double tol = kMartingaleTol) {
    MartingaleReport report;
    const double scale = 1.0 + tree.max_abs_price();
    // bottom-up masses, then one residual per interior node
    std::map<NodeId, double> mass;
    for (int t = tree.horizon(); t >= 0; --t) {
        for (NodeId id : tree.nodes_at(t)) {
            if (tree.is_leaf(id)) {
                mass[id] = model.weight(id);
            } else {
                double m = 0.0;
                for (NodeId c : tree.children(id)) m += mass[c];
                mass[id] = m;
            }
        }
    }
    for (NodeId id : tree.interior()) {
        double residual = 0.0;
        for (NodeId c : tree.children(id)) residual += mass[c] * (tree.price(c) - tree.price(id));
        residual = std::abs(residual);
        const double bound = tol * mass[id] * scale;
        const bool ok = mass[id] <= kZeroWeight || residual <= bound;
        report.residuals.push_back({id, mass[id], residual, bound, ok});
        report.ok = report.ok && ok;
    }
    return report;
}

/// Splits the leaves into those null under every model (polar) and the rest
/// (the quasi-sure support).
inline PolarReport polar_set(const EventTree& tree, const ModelFamily& family) {
    if (family.models.empty()) throw Error(Errc::InvalidModel, "model family is empty");
    PolarReport report;
    for (NodeId leaf : tree.leaves()) {
        bool charged = false;
        for (const Model& m : family.models)
            if (m.weight(leaf) > kZeroWeight) {
                charged = true;
                break;
            }
        (charged ? report.qs_support : report.polar_leaves).push_back(leaf);
    }
    return report;
}

inline double expectation(const Model& model, const Claim& claim) {
    double e = 0.0;
    for (const auto& [leaf, f] : claim.payoffs) e += model.weight(leaf) * f;
    return e;
}

/// E[|f|] under one model; one of the seminorms defining quasi-sure
/// convergence.
inline double seminorm(const Model& model, const Claim& claim) {
    double e = 0.0;
    for (const auto& [leaf, f] : claim.payoffs) e += model.weight(leaf) * std::abs(f);
    return e;
}

/// sup over the family of E[|f|]; a norm on claims identified up to polar
/// differences.
inline double l1_norm(const ModelFamily& family, const Claim& claim) {
    if (family.models.empty()) throw Error(Errc::InvalidModel, "model family is empty");
    double best = 0.0;
    for (const Model& m : family.models) best = std::max(best, seminorm(m, claim));
    return best;
}

/// Family-level validation: nonempty, each model a probability measure and
/// (unless disabled) a martingale measure at tolerance `tol`.
inline void check_family(const EventTree& tree, const ModelFamily& family, double tol = kMartingaleTol,
                         bool require_martingale = true) {
    if (family.models.empty()) throw Error(Errc::InvalidModel, "model family is empty");
    for (const Model& m : family.models) {
        check_model(tree, m);
        if (require_martingale) {
            MartingaleReport r = is_martingale_measure(tree, m, tol);
            if (!r.ok) {
                for (const auto& nr : r.residuals)
                    if (!nr.ok)
                        throw Error(Errc::InvalidModel, "model '" + m.name +
                                                            "' is not a martingale measure: residual " +
                                                            std::to_string(nr.residual) + " at node " +
                                                            std::to_string(nr.node));
            }
        }
    }
}

} // namespace qshedge
