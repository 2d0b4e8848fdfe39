#pragma once

#include "qshedge/hedge.hpp"
#include "qshedge/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace qshedge {

/// Combined size cap (#variables + #constraints) for the exponential exact
/// solver.
inline constexpr std::size_t kOracleCap = 24;

struct ExactConstraint {
    std::vector<Rational> coeffs;
    Relation rel = Relation::LessEq;
    Rational rhs;
};

/// LinearProgram with exact rational data. Bounds use std::nullopt for an
/// unbounded side.
struct ExactLp {
    Sense sense = Sense::Min;
    std::vector<Rational> objective;
    std::vector<ExactConstraint> constraints;
    std::vector<std::optional<Rational>> lower, upper;

    std::size_t num_vars() const { return objective.size(); }

    static ExactLp make(Sense sense, std::vector<Rational> objective) {
        ExactLp lp;
        lp.sense = sense;
        lp.lower.assign(objective.size(), std::nullopt);
        lp.upper.assign(objective.size(), std::nullopt);
        lp.objective = std::move(objective);
        return lp;
    }

    void add_constraint(std::vector<Rational> coeffs, Relation rel, Rational rhs) {
        constraints.push_back({std::move(coeffs), rel, std::move(rhs)});
    }
};

struct ExactSolution {
    LpStatus status = LpStatus::Optimal;
    Rational value;
    std::vector<Rational> vertex; // original variable space, Optimal only
};

namespace oracledetail {

// Standard form over rationals: min c.z + shift, A z = b, with columns
// classified nonnegative / free / fixed-zero-free.
struct ExactStd {
    std::vector<std::vector<Rational>> A;
    std::vector<Rational> b;
    std::vector<Rational> c;
    Rational shift;

    enum ColState { Nonneg, Free, EliminatedFree, ZeroFree };
    std::vector<ColState> col_state;
    std::vector<bool> row_active;

    struct Elimination {
        std::size_t col = 0;
        std::vector<Rational> row; // snapshot of the consumed row
        Rational rhs;
    };
    std::vector<Elimination> eliminations;

    struct VarMap {
        enum Kind { FixedVal, Shift, Mirror, Direct } kind = Direct;
        std::size_t col = 0;
        Rational offset;
    };
    std::vector<VarMap> vars;
};

inline ExactStd to_standard(const ExactLp& lp) {
    const std::size_t n = lp.num_vars();
    ExactStd sf;
    sf.vars.resize(n);
    const Rational sense_sign = lp.sense == Sense::Max ? Rational(-1) : Rational(1);

    std::size_t cols = 0;
    std::vector<std::size_t> upper_rows;
    for (std::size_t j = 0; j < n; ++j) {
        const auto& lo = lp.lower[j];
        const auto& hi = lp.upper[j];
        auto& vm = sf.vars[j];
        if (lo && hi && *lo == *hi) {
            vm.kind = ExactStd::VarMap::FixedVal;
            vm.offset = *lo;
        } else if (!lo && !hi) {
            vm.kind = ExactStd::VarMap::Direct;
            vm.col = cols++;
            sf.col_state.push_back(ExactStd::Free);
        } else if (lo && !hi) {
            vm.kind = ExactStd::VarMap::Shift;
            vm.offset = *lo;
            vm.col = cols++;
            sf.col_state.push_back(ExactStd::Nonneg);
        } else if (!lo && hi) {
            vm.kind = ExactStd::VarMap::Mirror;
            vm.offset = *hi;
            vm.col = cols++;
            sf.col_state.push_back(ExactStd::Nonneg);
        } else {
            vm.kind = ExactStd::VarMap::Shift;
            vm.offset = *lo;
            vm.col = cols++;
            sf.col_state.push_back(ExactStd::Nonneg);
            upper_rows.push_back(j);
        }
    }

    sf.c.assign(cols, Rational(0));
    for (std::size_t j = 0; j < n; ++j) {
        const Rational cj = sense_sign * lp.objective[j];
        const auto& vm = sf.vars[j];
        switch (vm.kind) {
        case ExactStd::VarMap::FixedVal: sf.shift += cj * vm.offset; break;
        case ExactStd::VarMap::Shift:
        case ExactStd::VarMap::Direct:
            sf.c[vm.col] += cj;
            sf.shift += cj * vm.offset;
            break;
        case ExactStd::VarMap::Mirror:
            sf.c[vm.col] -= cj;
            sf.shift += cj * vm.offset;
            break;
        }
    }

    auto append_row = [&](std::vector<Rational> row, Relation rel, Rational rhs) {
        if (rel != Relation::Equal) {
            for (auto& r : sf.A) r.push_back(Rational(0));
            row.push_back(rel == Relation::LessEq ? Rational(1) : Rational(-1));
            sf.c.push_back(Rational(0));
            sf.col_state.push_back(ExactStd::Nonneg);
        } else {
            row.resize(sf.c.size(), Rational(0));
        }
        row.resize(sf.c.size(), Rational(0));
        sf.A.push_back(std::move(row));
        sf.b.push_back(std::move(rhs));
    };

    for (const auto& con : lp.constraints) {
        std::vector<Rational> row(cols, Rational(0));
        Rational rhs = con.rhs;
        for (std::size_t j = 0; j < n; ++j) {
            const Rational& a = con.coeffs[j];
            if (a == 0) continue;
            const auto& vm = sf.vars[j];
            switch (vm.kind) {
            case ExactStd::VarMap::FixedVal: rhs -= a * vm.offset; break;
            case ExactStd::VarMap::Shift:
            case ExactStd::VarMap::Direct:
                row[vm.col] += a;
                rhs -= a * vm.offset;
                break;
            case ExactStd::VarMap::Mirror:
                row[vm.col] -= a;
                rhs -= a * vm.offset;
                break;
            }
        }
        append_row(std::move(row), con.rel, std::move(rhs));
    }
    for (std::size_t j : upper_rows) {
        std::vector<Rational> row(cols, Rational(0));
        row[sf.vars[j].col] = 1;
        append_row(std::move(row), Relation::LessEq, *lp.upper[j] - *lp.lower[j]);
    }
    for (auto& r : sf.A) r.resize(sf.c.size(), Rational(0));
    sf.row_active.assign(sf.A.size(), true);
    return sf;
}

// Pivots every free column out of the system; each consumes one row.
// Returns false (-> unbounded) when a free column with nonzero reduced cost
// hits no active row.
inline bool eliminate_free(ExactStd& sf) {
    const std::size_t cols = sf.c.size();
    for (std::size_t j = 0; j < cols; ++j) {
        if (sf.col_state[j] != ExactStd::Free) continue;
        std::size_t pivot_row = sf.A.size();
        for (std::size_t r = 0; r < sf.A.size(); ++r)
            if (sf.row_active[r] && sf.A[r][j] != 0) {
                pivot_row = r;
                break;
            }
        if (pivot_row == sf.A.size()) {
            if (sf.c[j] != 0) return false;
            sf.col_state[j] = ExactStd::ZeroFree;
            continue;
        }
        const Rational pivot = sf.A[pivot_row][j];
        for (std::size_t r = 0; r < sf.A.size(); ++r) {
            if (r == pivot_row || !sf.row_active[r] || sf.A[r][j] == 0) continue;
            const Rational f = sf.A[r][j] / pivot;
            for (std::size_t k = 0; k < cols; ++k) sf.A[r][k] -= f * sf.A[pivot_row][k];
            sf.b[r] -= f * sf.b[pivot_row];
        }
        if (sf.c[j] != 0) {
            const Rational f = sf.c[j] / pivot;
            for (std::size_t k = 0; k < cols; ++k) sf.c[k] -= f * sf.A[pivot_row][k];
            sf.shift += f * sf.b[pivot_row];
        }
        sf.eliminations.push_back({j, sf.A[pivot_row], sf.b[pivot_row]});
        sf.row_active[pivot_row] = false;
        sf.col_state[j] = ExactStd::EliminatedFree;
    }
    return true;
}

// Exact row reduction of the active system onto the given columns.
// Returns independent rows as (coeffs over active_cols, rhs); sets
// `inconsistent` when a zero row has nonzero rhs.
inline std::vector<std::pair<std::vector<Rational>, Rational>>
row_reduce(const std::vector<std::vector<Rational>>& rows, const std::vector<Rational>& rhs, bool& inconsistent) {
    auto M = rows;
    auto r = rhs;
    inconsistent = false;
    std::vector<std::pair<std::vector<Rational>, Rational>> out;
    const std::size_t m = M.size();
    const std::size_t n = m == 0 ? 0 : M[0].size();
    std::size_t lead = 0;
    for (std::size_t col = 0; col < n && lead < m; ++col) {
        std::size_t p = lead;
        while (p < m && M[p][col] == 0) ++p;
        if (p == m) continue;
        std::swap(M[p], M[lead]);
        std::swap(r[p], r[lead]);
        for (std::size_t i = 0; i < m; ++i) {
            if (i == lead || M[i][col] == 0) continue;
            const Rational f = M[i][col] / M[lead][col];
            for (std::size_t k = col; k < n; ++k) M[i][k] -= f * M[lead][k];
            r[i] -= f * r[lead];
        }
        ++lead;
    }
    for (std::size_t i = 0; i < m; ++i) {
        bool zero = true;
        for (const Rational& v : M[i])
            if (v != 0) {
                zero = false;
                break;
            }
        if (zero) {
            if (r[i] != 0) inconsistent = true;
        } else if (i < lead) {
            out.emplace_back(M[i], r[i]);
        }
    }
    return out;
}

// Enumerates every basic solution of {z >= 0 : R z = rhs} (R full row rank),
// invoking visit(values-by-column-index). Prunes dependent column prefixes.
struct VertexEnumerator {
    const std::vector<std::pair<std::vector<Rational>, Rational>>& R;
    std::size_t n;

    template <typename Visit> void run(Visit&& visit) {
        const std::size_t r = R.size();
        std::vector<std::vector<Rational>> M(r, std::vector<Rational>(n + 1));
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t k = 0; k < n; ++k) M[i][k] = R[i].first[k];
            M[i][n] = R[i].second;
        }
        std::vector<std::size_t> chosen;
        recurse(M, chosen, 0, visit);
    }

    template <typename Visit>
    void recurse(const std::vector<std::vector<Rational>>& M, std::vector<std::size_t>& chosen,
                 std::size_t next_col, Visit&& visit) {
        const std::size_t r = R.size();
        const std::size_t depth = chosen.size();
        if (depth == r) {
            // fully pivoted: row i defines chosen[i]
            std::map<std::size_t, Rational> values;
            bool feasible = true;
            for (std::size_t i = 0; i < r && feasible; ++i) {
                if (M[i][n] < 0) feasible = false;
                values[chosen[i]] = M[i][n];
            }
            if (feasible) visit(values);
            return;
        }
        if (next_col >= n || n - next_col < r - depth) return;
        for (std::size_t j = next_col; j + (r - depth) <= n; ++j) {
            // pivot column j at row `depth` if independent of the prefix
            std::size_t p = depth;
            while (p < r && M[p][j] == 0) ++p;
            if (p == r) continue;
            auto M2 = M;
            std::swap(M2[depth], M2[p]);
            const Rational pivot = M2[depth][j];
            for (std::size_t k = 0; k <= n; ++k) M2[depth][k] /= pivot;
            for (std::size_t i = 0; i < r; ++i) {
                if (i == depth || M2[i][j] == 0) continue;
                const Rational f = M2[i][j];
                for (std::size_t k = 0; k <= n; ++k) M2[i][k] -= f * M2[depth][k];
            }
            chosen.push_back(j);
            recurse(M2, chosen, j + 1, visit);
            chosen.pop_back();
        }
    }
};

} // namespace oracledetail

/// Exact reference solver: enumerates all basic solutions of the
/// standard-form polyhedron (column subsets of size equal to the reduced
/// row rank), keeps the feasible ones and takes the optimum; extreme rays
/// are enumerated the same way to decide unboundedness. Exponential, hence
/// the size cap. Throws TooLarge above the cap.
inline ExactSolution exact_solve(const ExactLp& lp, std::size_t cap = kOracleCap) {
    using namespace oracledetail;
    if (lp.num_vars() + lp.constraints.size() > cap)
        throw Error(Errc::TooLarge, "exact solver cap: " + std::to_string(lp.num_vars()) + " vars + " +
                                        std::to_string(lp.constraints.size()) + " constraints > " +
                                        std::to_string(cap));
    for (const auto& con : lp.constraints)
        if (con.coeffs.size() != lp.num_vars())
            throw Error(Errc::NumericalFailure, "constraint length mismatch");

    ExactStd sf = to_standard(lp);
    ExactSolution sol;
    const Rational sense_sign = lp.sense == Sense::Max ? Rational(-1) : Rational(1);

    if (!eliminate_free(sf)) {
        sol.status = LpStatus::Unbounded;
        return sol;
    }

    // active system over the nonnegative columns
    const std::size_t cols = sf.c.size();
    std::vector<std::size_t> act_cols;
    for (std::size_t j = 0; j < cols; ++j)
        if (sf.col_state[j] == ExactStd::Nonneg) act_cols.push_back(j);
    std::vector<std::vector<Rational>> rows;
    std::vector<Rational> rhs;
    for (std::size_t r = 0; r < sf.A.size(); ++r) {
        if (!sf.row_active[r]) continue;
        std::vector<Rational> row(act_cols.size());
        for (std::size_t k = 0; k < act_cols.size(); ++k) row[k] = sf.A[r][act_cols[k]];
        rows.push_back(std::move(row));
        rhs.push_back(sf.b[r]);
    }
    bool inconsistent = false;
    auto reduced = row_reduce(rows, rhs, inconsistent);
    if (inconsistent) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }

    std::vector<Rational> act_c(act_cols.size());
    for (std::size_t k = 0; k < act_cols.size(); ++k) act_c[k] = sf.c[act_cols[k]];

    bool found = false;
    Rational best;
    std::vector<Rational> best_z;
    VertexEnumerator{reduced, act_cols.size()}.run([&](const std::map<std::size_t, Rational>& values) {
        Rational v = 0;
        for (const auto& [k, x] : values) v += act_c[k] * x;
        if (!found || v < best) {
            found = true;
            best = v;
            best_z.assign(act_cols.size(), Rational(0));
            for (const auto& [k, x] : values) best_z[k] = x;
        }
    });
    if (!found && !reduced.empty()) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    if (!found) {
        // no equality rows left: the origin is feasible
        found = true;
        best = 0;
        best_z.assign(act_cols.size(), Rational(0));
    }

    // recession cone section {d >= 0 : R d = 0, sum d = 1}; any vertex with
    // negative cost certifies unboundedness
    {
        std::vector<std::vector<Rational>> rrows;
        std::vector<Rational> rrhs;
        for (const auto& [row, b] : reduced) {
            rrows.push_back(row);
            rrhs.push_back(Rational(0));
        }
        rrows.emplace_back(act_cols.size(), Rational(1));
        rrhs.push_back(Rational(1));
        bool ray_inconsistent = false;
        auto ray_reduced = row_reduce(rrows, rrhs, ray_inconsistent);
        bool unbounded = false;
        if (!ray_inconsistent) {
            VertexEnumerator{ray_reduced, act_cols.size()}.run([&](const std::map<std::size_t, Rational>& values) {
                Rational v = 0;
                for (const auto& [k, d] : values) v += act_c[k] * d;
                if (v < 0) unbounded = true;
            });
        }
        if (unbounded) {
            sol.status = LpStatus::Unbounded;
            return sol;
        }
    }

    // assemble the standard-form point, back-substitute the free columns
    std::vector<Rational> z(cols, Rational(0));
    for (std::size_t k = 0; k < act_cols.size(); ++k) z[act_cols[k]] = best_z[k];
    for (auto it = sf.eliminations.rbegin(); it != sf.eliminations.rend(); ++it) {
        Rational v = it->rhs;
        for (std::size_t k = 0; k < cols; ++k)
            if (k != it->col && it->row[k] != 0) v -= it->row[k] * z[k];
        z[it->col] = v / it->row[it->col];
    }

    sol.status = LpStatus::Optimal;
    sol.value = sense_sign * (best + sf.shift);
    sol.vertex.assign(lp.num_vars(), Rational(0));
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        const auto& vm = sf.vars[j];
        switch (vm.kind) {
        case ExactStd::VarMap::FixedVal: sol.vertex[j] = vm.offset; break;
        case ExactStd::VarMap::Shift:
        case ExactStd::VarMap::Direct: sol.vertex[j] = vm.offset + z[vm.col]; break;
        case ExactStd::VarMap::Mirror: sol.vertex[j] = vm.offset - z[vm.col]; break;
        }
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Exact mirror of the hedge pipeline
// ---------------------------------------------------------------------------

/// Exact numeric payload of an instance. File loaders fill this from the
/// decimal text; for instances built in memory the doubles themselves are
/// the data and are converted exactly.
struct ExactInstance {
    std::map<NodeId, Rational> prices;
    std::map<NodeId, Rational> claim;
    std::vector<std::map<NodeId, Rational>> weights; // one map per model, in family order
};

inline ExactInstance exact_from_instance(const Instance& instance) {
    ExactInstance e;
    for (NodeId leaf : instance.tree.leaves()) e.claim[leaf] = rational_from_double(instance.claim.payoffs.at(leaf));
    std::vector<NodeId> all;
    for (int t = 0; t <= instance.tree.horizon(); ++t)
        for (NodeId n : instance.tree.nodes_at(t)) e.prices[n] = rational_from_double(instance.tree.price(n));
    for (const Model& m : instance.family.models) {
        std::map<NodeId, Rational> w;
        for (const auto& [leaf, v] : m.leaf_weights) w[leaf] = rational_from_double(v);
        e.weights.push_back(std::move(w));
    }
    return e;
}

namespace oracledetail {

inline Rational exact_weight(const std::map<NodeId, Rational>& w, NodeId leaf) {
    auto it = w.find(leaf);
    return it == w.end() ? Rational(0) : it->second;
}

inline std::vector<NodeId> exact_support(const EventTree& tree, const ExactInstance& e) {
    std::vector<NodeId> support;
    for (NodeId leaf : tree.leaves()) {
        bool charged = false;
        for (const auto& w : e.weights)
            if (exact_weight(w, leaf) > 0) {
                charged = true;
                break;
            }
        if (charged) support.push_back(leaf);
    }
    if (support.empty()) throw Error(Errc::EmptySupport, "every leaf is polar");
    return support;
}

} // namespace oracledetail

/// Exact counterpart of build_primal, over the decimal-exact data.
inline ExactLp build_primal_exact(const Instance& instance, const ExactInstance& e) {
    const EventTree& tree = instance.tree;
    const std::vector<NodeId> support = oracledetail::exact_support(tree, e);
    const std::vector<NodeId>& interior = tree.interior();
    std::map<NodeId, std::size_t> var_of;
    for (std::size_t k = 0; k < interior.size(); ++k) var_of[interior[k]] = 1 + k;

    std::vector<Rational> objective(1 + interior.size(), Rational(0));
    objective[0] = 1;
    ExactLp lp = ExactLp::make(Sense::Min, std::move(objective));
    for (NodeId leaf : support) {
        std::vector<Rational> row(lp.num_vars(), Rational(0));
        row[0] = 1;
        auto path = path_of(tree, leaf);
        for (std::size_t u = 1; u < path.size(); ++u)
            row[var_of[path[u - 1]]] += e.prices.at(path[u]) - e.prices.at(path[u - 1]);
        lp.add_constraint(std::move(row), Relation::GreaterEq, e.claim.at(leaf));
    }
    return lp;
}

/// Exact counterpart of build_dual.
inline ExactLp build_dual_exact(const Instance& instance, const ExactInstance& e) {
    const EventTree& tree = instance.tree;
    const std::vector<NodeId> support = oracledetail::exact_support(tree, e);
    const std::vector<NodeId> reach = reachable_interior(tree, support);
    std::map<NodeId, std::size_t> var_of;
    for (std::size_t k = 0; k < support.size(); ++k) var_of[support[k]] = k;

    std::vector<Rational> objective(support.size(), Rational(0));
    for (std::size_t k = 0; k < support.size(); ++k) objective[k] = e.claim.at(support[k]);
    ExactLp lp = ExactLp::make(Sense::Max, std::move(objective));
    for (std::size_t k = 0; k < support.size(); ++k) lp.lower[k] = Rational(0);

    lp.add_constraint(std::vector<Rational>(support.size(), Rational(1)), Relation::Equal, Rational(1));
    std::map<NodeId, std::vector<Rational>> node_row;
    for (NodeId n : reach) node_row[n].assign(support.size(), Rational(0));
    for (NodeId leaf : support) {
        auto path = path_of(tree, leaf);
        for (std::size_t u = 1; u < path.size(); ++u)
            node_row[path[u - 1]][var_of[leaf]] = e.prices.at(path[u]) - e.prices.at(path[u - 1]);
    }
    for (NodeId n : reach) lp.add_constraint(std::move(node_row[n]), Relation::Equal, Rational(0));
    return lp;
}

/// Exact price landscape: primal and dual LP optima plus the family
/// expectation supremum, together with the optimizers.
struct ExactDuality {
    Rational primal_price;
    Rational dual_price;
    Rational model_sup;
    Rational gap;
    std::string argmax_model;
    std::map<NodeId, Rational> strategy;     // all non-terminal nodes
    std::map<NodeId, Rational> dual_measure; // all leaves, zero on polar ones
};

inline ExactDuality exact_duality(const Instance& instance, const ExactInstance& e, std::size_t cap = kOracleCap) {
    ExactLp primal = build_primal_exact(instance, e);
    ExactLp dual = build_dual_exact(instance, e);
    ExactSolution ps = exact_solve(primal, cap);
    ExactSolution ds = exact_solve(dual, cap);
    if (ps.status != LpStatus::Optimal || ds.status != LpStatus::Optimal)
        throw Error(Errc::InconsistentInstance, "exact hedge programs must be solvable for a valid instance");

    ExactDuality out;
    out.primal_price = ps.value;
    out.dual_price = ds.value;
    const std::vector<NodeId>& interior = instance.tree.interior();
    for (std::size_t k = 0; k < interior.size(); ++k) out.strategy[interior[k]] = ps.vertex[1 + k];
    const std::vector<NodeId> support = oracledetail::exact_support(instance.tree, e);
    for (NodeId leaf : instance.tree.leaves()) out.dual_measure[leaf] = 0;
    for (std::size_t k = 0; k < support.size(); ++k) out.dual_measure[support[k]] = ds.vertex[k];

    bool first = true;
    for (std::size_t i = 0; i < instance.family.models.size(); ++i) {
        Rational ev = 0;
        for (const auto& [leaf, w] : e.weights[i]) ev += w * e.claim.at(leaf);
        if (first || ev > out.model_sup) {
            out.model_sup = ev;
            out.argmax_model = instance.family.models[i].name;
            first = false;
        }
    }
    out.gap = out.dual_price - out.model_sup;
    return out;
}

/// Runs the floating-point hedge pipeline and the exact one side by side.
struct CrossCheckReport {
    bool ok = true;
    double primal_float = 0.0, dual_float = 0.0, sup_float = 0.0;
    Rational primal_exact, dual_exact, sup_exact;
    double max_abs_error = 0.0;
};

inline CrossCheckReport cross_check(const Instance& instance, const ExactInstance& e,
                                    std::size_t cap = kOracleCap, double tol = 1e-7) {
    DualityReport fl = duality_report(instance);
    ExactDuality ex = exact_duality(instance, e, cap);
    CrossCheckReport report;
    report.primal_float = fl.primal_price;
    report.dual_float = fl.dual_price;
    report.sup_float = fl.model_sup;
    report.primal_exact = ex.primal_price;
    report.dual_exact = ex.dual_price;
    report.sup_exact = ex.model_sup;
    const double err = std::max({std::abs(fl.primal_price - to_double(ex.primal_price)),
                                 std::abs(fl.dual_price - to_double(ex.dual_price)),
                                 std::abs(fl.model_sup - to_double(ex.model_sup))});
    report.max_abs_error = err;
    report.ok = err <= tol * scale_of(instance);
    return report;
}

/// Convenience overload over the instance's own binary values.
inline CrossCheckReport cross_check(const Instance& instance, std::size_t cap = kOracleCap, double tol = 1e-7) {
    return cross_check(instance, exact_from_instance(instance), cap, tol);
}

// ---------------------------------------------------------------------------
// Cone closedness probe
// ---------------------------------------------------------------------------

/// Outcome of feeding a perturbation sequence around a cone member through
/// the membership test. `guard_ok` is the convergence precondition: the n-th
/// perturbation must stay within 2^-n in every seminorm of the family.
struct ClosednessReport {
    bool guard_ok = true;
    bool members_ok = true; // every perturbed payoff stays in the cone
    bool limit_ok = true;   // the limit payoff is in the cone
    bool ok() const { return guard_ok && members_ok && limit_ok; }
};

/// Core of the probe: checks the convergence guard, certifies each member of
/// the sequence, then tests the limit. Assertions after a failed guard are
/// skipped; the input does not qualify as a convergent sequence.
inline ClosednessReport probe_limit(const Instance& instance, const Claim& limit,
                                    const std::vector<Claim>& perturbations, double eps = kLpTol) {
    ClosednessReport report;
    double bound = 0.5;
    for (const Claim& xi : perturbations) {
        for (const Model& m : instance.family.models)
            if (seminorm(m, xi) > bound * (1.0 + 1e-12)) report.guard_ok = false;
        bound *= 0.5;
    }
    if (!report.guard_ok) return report;
    for (const Claim& xi : perturbations) {
        Claim member = limit;
        for (auto& [leaf, v] : member.payoffs) {
            auto it = xi.payoffs.find(leaf);
            if (it != xi.payoffs.end()) v += it->second;
        }
        if (!in_cone(instance, member, eps)) report.members_ok = false;
    }
    report.limit_ok = in_cone(instance, limit, eps);
    return report;
}

/// Seeded probe: builds a random zero-capital cone member
/// W = wealth(H) - K, perturbs it along vanishing nonpositive noise
/// (so every member stays in the cone by construction) and asserts the limit
/// is still recognized as a member.
inline ClosednessReport closedness_probe(const Instance& instance, int n_steps, std::uint64_t seed,
                                         double eps = kLpTol) {
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    Strategy h;
    for (NodeId n : instance.tree.interior()) h.values[n] = 2.0 * uniform() - 1.0;
    Claim limit;
    for (NodeId leaf : instance.tree.leaves())
        limit.payoffs[leaf] = wealth(instance.tree, h, leaf) - uniform();

    const std::vector<NodeId> support = support_leaves(instance);
    std::vector<Claim> perturbations;
    double step = 0.5;
    for (int n = 0; n < n_steps; ++n) {
        Claim xi;
        for (NodeId leaf : instance.tree.leaves()) xi.payoffs[leaf] = 0.0;
        const NodeId pick = support[static_cast<std::size_t>(uniform() * static_cast<double>(support.size())) %
                                    support.size()];
        xi.payoffs[pick] = -step; // nonpositive noise keeps members inside the cone
        step *= 0.5;
        perturbations.push_back(std::move(xi));
    }
    return probe_limit(instance, limit, perturbations, eps);
}

} // namespace qshedge
