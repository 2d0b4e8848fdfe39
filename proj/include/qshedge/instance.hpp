#pragma once

#include "qshedge/models.hpp"
#include "qshedge/tree.hpp"

#include <utility>

namespace qshedge {

/// A complete pricing problem: tree, nonempty family of martingale models,
/// and a terminal claim. Immutable and shareable once constructed.
struct Instance {
    EventTree tree;
    ModelFamily family;
    Claim claim;

    /// Validates the standing assumptions: every model is a martingale
    /// measure at tolerance `tol` and the claim covers all leaves.
    static Instance make(EventTree tree, ModelFamily family, Claim claim, double tol = kMartingaleTol) {
        check_family(tree, family, tol);
        check_claim(tree, claim);
        return Instance{std::move(tree), std::move(family), std::move(claim)};
    }
};

/// Affine-invariant magnitude of an instance; all solver tolerances are
/// relative to this.
inline double scale_of(const Instance& instance) {
    return 1.0 + std::max(instance.tree.max_abs_price(), instance.claim.max_abs());
}

} // namespace qshedge
