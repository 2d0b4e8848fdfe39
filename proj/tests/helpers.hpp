#pragma once

#include "qshedge/generators.hpp"
#include "qshedge/instance.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace qshedge::testing {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// One-period three-leaf reference tree: root price 1, leaves 0.5 / 1 / 2.
inline EventTree make_g3() {
    return EventTree::validate(1, {{0, 0, std::nullopt, 1.0},
                                   {1, 1, 0, 0.5},
                                   {2, 1, 0, 1.0},
                                   {3, 1, 0, 2.0}});
}

// G3 with the single model (1/3, 1/2, 1/6) and the indicator of the top
// leaf; the instance with a strictly positive dual-vs-family gap.
inline Instance gap3_instance() {
    Model p0{"P0", {{1, 1.0 / 3.0}, {2, 0.5}, {3, 1.0 / 6.0}}};
    Claim claim{{{1, 0.0}, {2, 0.0}, {3, 1.0}}};
    return Instance::make(make_g3(), ModelFamily{{p0}}, claim);
}

// Complete one-period binomial market: root 1, leaves 2 / 0.5, unique
// martingale model (1/3, 2/3), at-the-money call.
inline Instance binomial_instance() {
    EventTree tree = EventTree::validate(1, {{0, 0, std::nullopt, 1.0},
                                             {1, 1, 0, 2.0},
                                             {2, 1, 0, 0.5}});
    Model p{"P", {{1, 1.0 / 3.0}, {2, 2.0 / 3.0}}};
    Claim claim{{{1, 1.0}, {2, 0.0}}};
    return Instance::make(std::move(tree), ModelFamily{{p}}, claim);
}

// Random small instance: horizon <= 3, branching <= 3, up to 4 models,
// randomized interval, deterministic in `seed`.
inline Instance random_instance(std::uint64_t seed, int max_horizon = 3, int max_branching = 3,
                                int max_models = 4) {
    std::mt19937_64 rng(seed * 2654435769ULL + 1);
    const int horizon = 1 + static_cast<int>(uniform01(rng) * max_horizon) % max_horizon;
    const int branching = 2 + static_cast<int>(uniform01(rng) * (max_branching - 1)) % (max_branching - 1);
    const int models = 1 + static_cast<int>(uniform01(rng) * max_models) % max_models;
    const double lo = 0.4 + 0.4 * uniform01(rng);  // in (0.4, 0.8)
    const double hi = 1.2 + 1.6 * uniform01(rng);  // in (1.2, 2.8)
    return gen_interval_instance(horizon, lo, hi, branching, models, seed);
}

inline Claim random_claim(const EventTree& tree, std::mt19937_64& rng, double span = 2.0) {
    Claim claim;
    for (NodeId leaf : tree.leaves()) claim.payoffs[leaf] = span * (2.0 * uniform01(rng) - 1.0);
    return claim;
}

inline Strategy random_strategy(const EventTree& tree, std::mt19937_64& rng, double span = 2.0) {
    Strategy h;
    for (NodeId n : tree.interior()) h.values[n] = span * (2.0 * uniform01(rng) - 1.0);
    return h;
}

} // namespace qshedge::testing
