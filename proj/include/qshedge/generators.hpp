#pragma once

#include "qshedge/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace qshedge {

namespace gendetail {

// 53-bit uniform in [0,1); pinned to the raw engine output so generated
// instances are reproducible independently of library distribution details.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// One-step transition probabilities over a node's children.
using Transition = std::map<NodeId, double>;

// Extreme points of the martingale transition polytope at a node: point
// masses on children priced exactly at the parent price, and two-point
// transitions on child pairs straddling it.
inline std::vector<Transition> extreme_transitions(const EventTree& tree, NodeId node,
                                                   const std::vector<NodeId>& usable_children) {
    std::vector<Transition> extremes;
    const double s = tree.price(node);
    for (NodeId c : usable_children)
        if (tree.price(c) == s) extremes.push_back({{c, 1.0}});
    for (NodeId clo : usable_children) {
        if (tree.price(clo) >= s) continue;
        for (NodeId chi : usable_children) {
            if (tree.price(chi) <= s) continue;
            const double span = tree.price(chi) - tree.price(clo);
            extremes.push_back({{clo, (tree.price(chi) - s) / span}, {chi, (s - tree.price(clo)) / span}});
        }
    }
    return extremes;
}

// Random point of the polytope: a Dirichlet(1) mixture of its extreme points.
inline Transition sample_transition(const std::vector<Transition>& extremes, std::mt19937_64& rng) {
    std::vector<double> lambda(extremes.size());
    double total = 0.0;
    for (double& l : lambda) {
        l = -std::log(1.0 - uniform01(rng));
        total += l;
    }
    Transition mix;
    for (std::size_t e = 0; e < extremes.size(); ++e)
        for (const auto& [child, q] : extremes[e]) mix[child] += (lambda[e] / total) * q;
    return mix;
}

// Composes node-wise transitions into a path (leaf) measure.
inline Model compose_model(const EventTree& tree, const std::map<NodeId, Transition>& kernel,
                           const std::string& name) {
    Model model;
    model.name = name;
    std::map<NodeId, double> mass;
    mass[tree.root()] = 1.0;
    for (int t = 0; t < tree.horizon(); ++t) {
        for (NodeId n : tree.nodes_at(t)) {
            const double m = mass.count(n) ? mass[n] : 0.0;
            if (m == 0.0) continue;
            const Transition& q = kernel.at(n);
            for (const auto& [child, p] : q)
                if (p > 0.0) mass[child] += m * p;
        }
    }
    for (NodeId leaf : tree.leaves())
        if (mass.count(leaf) && mass[leaf] > 0.0) model.leaf_weights[leaf] = mass[leaf];
    return model;
}

// k models over the given per-node usable-children sets; retries exact
// duplicates a few times (the polytope may be a single point, in which case
// duplicates are unavoidable).
inline ModelFamily sample_family(const EventTree& tree, const std::map<NodeId, std::vector<NodeId>>& usable,
                                 int count, std::mt19937_64& rng) {
    std::map<NodeId, std::vector<Transition>> extremes;
    for (const auto& [node, children] : usable) extremes[node] = extreme_transitions(tree, node, children);

    ModelFamily family;
    for (int j = 0; j < count; ++j) {
        Model candidate;
        for (int attempt = 0; attempt < 8; ++attempt) {
            std::map<NodeId, Transition> kernel;
            for (const auto& [node, ex] : extremes) kernel[node] = sample_transition(ex, rng);
            candidate = compose_model(tree, kernel, "P" + std::to_string(j));
            bool duplicate = false;
            for (const Model& m : family.models)
                if (m.leaf_weights == candidate.leaf_weights) {
                    duplicate = true;
                    break;
                }
            if (!duplicate) break;
        }
        family.models.push_back(std::move(candidate));
    }
    return family;
}

// At-the-money call on the terminal price, struck at the initial price.
inline Claim atm_call(const EventTree& tree) {
    Claim claim;
    const double strike = tree.price(tree.root());
    for (NodeId leaf : tree.leaves()) claim.payoffs[leaf] = std::max(tree.price(leaf) - strike, 0.0);
    return claim;
}

} // namespace gendetail

/// Recombining-free m-ary tree whose one-step price ratios run over a linear
/// grid in [lo, hi] (which must contain 1 in its interior so martingale
/// transitions exist), carrying `model_count` sampled martingale models and
/// an at-the-money call claim. Deterministic in `seed`.
inline Instance gen_interval_instance(int horizon, double lo, double hi, int ratios_per_node, int model_count,
                                      std::uint64_t seed) {
    if (!(lo < 1.0 && 1.0 < hi))
        throw Error(Errc::InfeasibleInterval, "interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                                  "] does not contain 1 in its interior");
    if (ratios_per_node < 2) throw Error(Errc::InfeasibleInterval, "need at least 2 ratios per node");
    if (model_count < 1) throw Error(Errc::InvalidModel, "need at least one model");
    if (horizon < 1) throw Error(Errc::TimeSkew, "horizon must be >= 1");

    std::vector<double> ratios(static_cast<std::size_t>(ratios_per_node));
    for (int i = 0; i < ratios_per_node; ++i)
        ratios[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (ratios_per_node - 1);

    std::vector<RawNode> nodes;
    nodes.push_back({0, 0, std::nullopt, 1.0});
    NodeId next_id = 1;
    std::vector<NodeId> frontier{0};
    for (int t = 1; t <= horizon; ++t) {
        std::vector<NodeId> next_frontier;
        for (NodeId parent : frontier) {
            const double base = nodes[static_cast<std::size_t>(parent)].price;
            for (double r : ratios) {
                nodes.push_back({next_id, t, parent, base * r});
                next_frontier.push_back(next_id);
                ++next_id;
            }
        }
        frontier = std::move(next_frontier);
    }
    EventTree tree = EventTree::validate(horizon, nodes);

    std::map<NodeId, std::vector<NodeId>> usable;
    for (NodeId n : tree.interior()) usable[n] = tree.children(n);
    std::mt19937_64 rng(seed);
    ModelFamily family = gendetail::sample_family(tree, usable, model_count, rng);
    Claim claim = gendetail::atm_call(tree);
    return Instance::make(std::move(tree), std::move(family), std::move(claim));
}

/// Martingale models on an existing tree whose support avoids the given
/// leaves. Transitions are restricted to children whose subtrees still offer
/// a viable continuation; NoViableModel signals that every martingale
/// measure charges the forbidden set.
inline Instance gen_nullset_instance(const EventTree& tree, const std::set<NodeId>& forbidden_leaves,
                                     int model_count, std::uint64_t seed) {
    if (model_count < 1) throw Error(Errc::InvalidModel, "need at least one model");
    for (NodeId leaf : forbidden_leaves)
        if (!tree.has_node(leaf) || !tree.is_leaf(leaf))
            throw Error(Errc::UnknownLeaf, "forbidden id " + std::to_string(leaf) + " is not a leaf");

    // bottom-up viability: a node is viable when a martingale transition
    // supported on viable children exists
    std::map<NodeId, bool> viable;
    std::map<NodeId, std::vector<NodeId>> usable;
    for (int t = tree.horizon(); t >= 0; --t) {
        for (NodeId n : tree.nodes_at(t)) {
            if (tree.is_leaf(n)) {
                viable[n] = forbidden_leaves.count(n) == 0;
                continue;
            }
            std::vector<NodeId> ok_children;
            for (NodeId c : tree.children(n))
                if (viable[c]) ok_children.push_back(c);
            const double s = tree.price(n);
            bool equal = false, below = false, above = false;
            for (NodeId c : ok_children) {
                if (tree.price(c) == s) equal = true;
                if (tree.price(c) < s) below = true;
                if (tree.price(c) > s) above = true;
            }
            viable[n] = equal || (below && above);
            if (viable[n]) usable[n] = std::move(ok_children);
        }
    }
    if (!viable[tree.root()])
        throw Error(Errc::NoViableModel, "every martingale measure charges the forbidden leaves");
    // drop nodes that can never be reached from the root through viable ones
    std::map<NodeId, std::vector<NodeId>> reachable_usable;
    std::vector<NodeId> stack{tree.root()};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        if (tree.is_leaf(n)) continue;
        reachable_usable[n] = usable.at(n);
        for (NodeId c : reachable_usable[n])
            if (!tree.is_leaf(c) && viable[c]) stack.push_back(c);
    }

    std::mt19937_64 rng(seed);
    ModelFamily family = gendetail::sample_family(tree, reachable_usable, model_count, rng);
    Claim claim = gendetail::atm_call(tree);
    return Instance::make(tree, std::move(family), std::move(claim));
}

} // namespace qshedge
