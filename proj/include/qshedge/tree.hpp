#pragma once

#include "qshedge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qshedge {

using NodeId = std::int64_t;

/// One node of an event tree as supplied by a caller or a file, before
/// validation.
struct RawNode {
    NodeId id = 0;
    int time = 0;
    std::optional<NodeId> parent; // empty for the root
    double price = 0.0;
};

/// Finite rooted tree carrying the horizon T, the information structure
/// (node partition per time) and the scalar price process S. Leaves are the
/// time-T nodes; a leaf identifies the whole root-to-leaf scenario.
/// Immutable after construction.
class EventTree {
public:
    /// Validates a raw node list and builds the tree, deriving children and
    /// leaf indices. Throws Error with one of DuplicateId, OrphanNode,
    /// TimeSkew, ChildlessInterior, NonFinitePrice.
    static EventTree validate(int horizon, const std::vector<RawNode>& raw) {
        if (horizon < 1) throw Error(Errc::TimeSkew, "horizon must be >= 1");
        EventTree t;
        t.horizon_ = horizon;
        for (const auto& n : raw) {
            if (t.nodes_.count(n.id))
                throw Error(Errc::DuplicateId, "node id " + std::to_string(n.id) + " appears twice");
            if (!std::isfinite(n.price))
                throw Error(Errc::NonFinitePrice, "node " + std::to_string(n.id) + " has non-finite price");
            if (n.time < 0 || n.time > horizon)
                throw Error(Errc::TimeSkew,
                            "node " + std::to_string(n.id) + " has time " + std::to_string(n.time) +
                                " outside {0.." + std::to_string(horizon) + "}");
            t.nodes_.emplace(n.id, n);
        }

        NodeId root = 0;
        bool have_root = false;
        for (const auto& [id, n] : t.nodes_) {
            if (!n.parent) {
                if (n.time != 0)
                    throw Error(Errc::OrphanNode,
                                "node " + std::to_string(id) + " has no parent but time " + std::to_string(n.time));
                if (have_root)
                    throw Error(Errc::OrphanNode, "more than one root (nodes " + std::to_string(root) +
                                                      " and " + std::to_string(id) + ")");
                root = id;
                have_root = true;
            } else {
                auto it = t.nodes_.find(*n.parent);
                if (it == t.nodes_.end())
                    throw Error(Errc::OrphanNode, "node " + std::to_string(id) + " references missing parent " +
                                                      std::to_string(*n.parent));
                if (it->second.time != n.time - 1)
                    throw Error(Errc::TimeSkew, "node " + std::to_string(id) + " at time " +
                                                    std::to_string(n.time) + " has parent at time " +
                                                    std::to_string(it->second.time));
                if (n.time == 0)
                    throw Error(Errc::TimeSkew, "time-0 node " + std::to_string(id) + " has a parent");
            }
        }
        if (!have_root) throw Error(Errc::OrphanNode, "tree has no root");
        t.root_ = root;

        t.levels_.assign(static_cast<std::size_t>(horizon) + 1, {});
        for (const auto& [id, n] : t.nodes_) {
            t.levels_[static_cast<std::size_t>(n.time)].push_back(id);
            if (n.parent) t.children_[*n.parent].push_back(id);
        }
        for (const auto& [id, n] : t.nodes_) {
            if (n.time < horizon) {
                if (!t.children_.count(id))
                    throw Error(Errc::ChildlessInterior,
                                "node " + std::to_string(id) + " at time " + std::to_string(n.time) +
                                    " has no children");
                t.interior_.push_back(id);
            } else {
                t.leaves_.push_back(id);
            }
        }
        // std::map iteration already yields sorted ids; keep the derived
        // lists sorted too so every traversal order is deterministic.
        std::sort(t.leaves_.begin(), t.leaves_.end());
        std::sort(t.interior_.begin(), t.interior_.end());
        for (auto& [id, ch] : t.children_) std::sort(ch.begin(), ch.end());
        return t;
    }

    int horizon() const { return horizon_; }
    std::size_t size() const { return nodes_.size(); }
    NodeId root() const { return root_; }
    const std::vector<NodeId>& leaves() const { return leaves_; }
    const std::vector<NodeId>& interior() const { return interior_; }
    const std::vector<NodeId>& nodes_at(int time) const {
        if (time < 0 || time > horizon_) throw Error(Errc::UnknownNode, "no nodes at time " + std::to_string(time));
        return levels_[static_cast<std::size_t>(time)];
    }
    const std::vector<NodeId>& children(NodeId id) const {
        require(id);
        static const std::vector<NodeId> none;
        auto it = children_.find(id);
        return it == children_.end() ? none : it->second;
    }

    bool has_node(NodeId id) const { return nodes_.count(id) > 0; }
    bool is_leaf(NodeId id) const { return time_of(id) == horizon_; }
    int time_of(NodeId id) const { return require(id).time; }
    double price(NodeId id) const { return require(id).price; }
    std::optional<NodeId> parent(NodeId id) const { return require(id).parent; }

    double max_abs_price() const {
        double m = 0.0;
        for (const auto& [id, n] : nodes_) m = std::max(m, std::abs(n.price));
        return m;
    }

private:
    EventTree() = default;

    const RawNode& require(NodeId id) const {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) throw Error(Errc::UnknownNode, "unknown node " + std::to_string(id));
        return it->second;
    }

    int horizon_ = 0;
    NodeId root_ = 0;
    std::map<NodeId, RawNode> nodes_;
    std::map<NodeId, std::vector<NodeId>> children_;
    std::vector<NodeId> leaves_;
    std::vector<NodeId> interior_;
    std::vector<std::vector<NodeId>> levels_;
};

/// Predictable trading strategy: the position held over the period that
/// starts at each non-terminal node.
struct Strategy {
    std::map<NodeId, double> values;
};

/// Terminal payoff, one finite value per leaf.
struct Claim {
    std::map<NodeId, double> payoffs;

    double max_abs() const {
        double m = 0.0;
        for (const auto& [id, v] : payoffs) m = std::max(m, std::abs(v));
        return m;
    }
};

/// Checks that a strategy is defined on exactly the non-terminal nodes with
/// finite values. Throws MissingStrategyNode.
inline void check_strategy(const EventTree& tree, const Strategy& strategy) {
    for (NodeId id : tree.interior())
        if (!strategy.values.count(id))
            throw Error(Errc::MissingStrategyNode, "strategy missing node " + std::to_string(id));
    for (const auto& [id, v] : strategy.values) {
        if (!tree.has_node(id) || tree.is_leaf(id))
            throw Error(Errc::MissingStrategyNode,
                        "strategy defined on " + std::to_string(id) + ", which is not a non-terminal node");
        if (!std::isfinite(v))
            throw Error(Errc::MissingStrategyNode, "strategy value at node " + std::to_string(id) + " not finite");
    }
}

/// Checks that a claim is defined on exactly the leaves with finite values.
inline void check_claim(const EventTree& tree, const Claim& claim) {
    for (NodeId id : tree.leaves())
        if (!claim.payoffs.count(id))
            throw Error(Errc::InvalidClaim, "claim missing leaf " + std::to_string(id));
    for (const auto& [id, v] : claim.payoffs) {
        if (!tree.has_node(id) || !tree.is_leaf(id))
            throw Error(Errc::InvalidClaim, "claim defined on " + std::to_string(id) + ", which is not a leaf");
        if (!std::isfinite(v))
            throw Error(Errc::InvalidClaim, "claim value at leaf " + std::to_string(id) + " not finite");
    }
}

/// Root-to-leaf node sequence; length horizon+1 with times 0,1,...,T.
inline std::vector<NodeId> path_of(const EventTree& tree, NodeId leaf) {
    if (!tree.has_node(leaf) || !tree.is_leaf(leaf))
        throw Error(Errc::UnknownLeaf, "unknown leaf " + std::to_string(leaf));
    std::vector<NodeId> path;
    std::optional<NodeId> cur = leaf;
    while (cur) {
        path.push_back(*cur);
        cur = tree.parent(*cur);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

/// Trading gains accumulated from the root up to `node`: the sum of
/// position * price-increment over the periods ending at or before `node`.
inline double wealth_at(const EventTree& tree, const Strategy& strategy, NodeId node) {
    if (!tree.has_node(node)) throw Error(Errc::UnknownNode, "unknown node " + std::to_string(node));
    double total = 0.0;
    NodeId cur = node;
    while (auto p = tree.parent(cur)) {
        auto it = strategy.values.find(*p);
        if (it == strategy.values.end())
            throw Error(Errc::MissingStrategyNode, "strategy missing node " + std::to_string(*p));
        total += it->second * (tree.price(cur) - tree.price(*p));
        cur = *p;
    }
    return total;
}

/// Terminal trading gains along the scenario identified by `leaf`.
inline double wealth(const EventTree& tree, const Strategy& strategy, NodeId leaf) {
    if (!tree.has_node(leaf) || !tree.is_leaf(leaf))
        throw Error(Errc::UnknownLeaf, "unknown leaf " + std::to_string(leaf));
    return wealth_at(tree, strategy, leaf);
}

} // namespace qshedge
