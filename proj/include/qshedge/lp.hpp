#pragma once

#include "qshedge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace qshedge {

enum class Sense { Min, Max };
enum class Relation { LessEq, Equal, GreaterEq };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Default certification tolerance for LP solutions.
inline constexpr double kLpTol = 1e-8;

/// Pivot magnitude below which a column entry is treated as zero.
inline constexpr double kPivotTol = 1e-10;

struct LpConstraint {
    std::vector<double> coeffs;
    Relation rel = Relation::LessEq;
    double rhs = 0.0;
};

/// Dense linear program. `lower`/`upper` are per-variable bounds; use
/// +-kInf for unbounded sides. Default bounds are free.
struct LinearProgram {
    Sense sense = Sense::Min;
    std::vector<double> objective;
    std::vector<LpConstraint> constraints;
    std::vector<double> lower, upper;

    std::size_t num_vars() const { return objective.size(); }
    std::size_t num_constraints() const { return constraints.size(); }

    static LinearProgram make(Sense sense, std::vector<double> objective) {
        LinearProgram lp;
        lp.sense = sense;
        lp.lower.assign(objective.size(), -kInf);
        lp.upper.assign(objective.size(), kInf);
        lp.objective = std::move(objective);
        return lp;
    }

    void add_constraint(std::vector<double> coeffs, Relation rel, double rhs) {
        constraints.push_back({std::move(coeffs), rel, rhs});
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// Certified solver output. On Optimal, `primal`/`dual` carry the optimal
/// pair and the three residuals are within the solve tolerance. On
/// Infeasible, `certificate` holds one Farkas multiplier per constraint
/// (aggregating the rows to a contradiction over the variable bounds); on
/// Unbounded it holds an improving feasible ray in variable space.
struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    std::vector<double> primal;
    std::vector<double> dual;
    double objective = 0.0;
    double dual_objective = 0.0;
    double max_primal_infeasibility = 0.0;
    double max_dual_infeasibility = 0.0;
    double complementarity_gap = 0.0;
    std::vector<double> certificate;
};

namespace lpdetail {

// Solves M x = rhs by Gaussian elimination with partial pivoting.
// Returns false when M is numerically singular.
inline bool dense_solve(std::vector<std::vector<double>> M, std::vector<double> rhs, std::vector<double>& out) {
    const std::size_t n = M.size();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t best = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(M[r][k]) > std::abs(M[best][k])) best = r;
        if (std::abs(M[best][k]) < kPivotTol) return false;
        std::swap(M[k], M[best]);
        std::swap(rhs[k], rhs[best]);
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = M[r][k] / M[k][k];
            if (f == 0.0) continue;
            for (std::size_t c = k; c < n; ++c) M[r][c] -= f * M[k][c];
            rhs[r] -= f * rhs[k];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        double v = rhs[k];
        for (std::size_t c = k + 1; c < n; ++c) v -= M[k][c] * out[c];
        out[k] = v / M[k][k];
    }
    return true;
}

// Variable substitution into the all-equality standard form z >= 0.
struct VarMap {
    enum Kind { Fixed, Shifted, Mirrored, Split } kind = Shifted;
    std::size_t col = 0;  // first standard column
    std::size_t col2 = 0; // negative part for Split
    double offset = 0.0;  // x = offset + z (Shifted), x = offset - z (Mirrored), x = offset (Fixed)
};

struct StdForm {
    std::size_t rows = 0, cols = 0;          // cols excludes artificials
    std::vector<std::vector<double>> A;      // rows x cols
    std::vector<double> b;                   // >= 0 after row flips
    std::vector<double> c;                   // min-sense costs
    double shift = 0.0;                      // constant term of the min-sense objective
    std::vector<VarMap> vars;                // original variable -> columns
    std::vector<int> row_of;                 // original row -> std row, -1 if dropped
    std::vector<double> row_sign;            // per original row
    std::vector<int> unit_col;               // per std row: slack column usable as initial basis, -1 if none
    std::vector<std::size_t> bound_row_var;  // std rows beyond the original ones (upper-bound rows)
};

inline bool convert(const LinearProgram& lp, StdForm& sf, LpSolution& early) {
    const std::size_t n = lp.num_vars();
    const std::size_t m = lp.num_constraints();
    if (lp.lower.size() != n || lp.upper.size() != n)
        throw Error(Errc::NumericalFailure, "bounds size mismatch");
    for (const auto& con : lp.constraints)
        if (con.coeffs.size() != n) throw Error(Errc::NumericalFailure, "constraint length mismatch");

    const double sense_sign = lp.sense == Sense::Max ? -1.0 : 1.0;

    sf.vars.resize(n);
    sf.cols = 0;
    std::vector<std::size_t> upper_row_vars; // both-sided variables needing an extra row
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lp.lower[j], hi = lp.upper[j];
        if (std::isnan(lo) || std::isnan(hi)) throw Error(Errc::NumericalFailure, "NaN bound");
        if (lo > hi) {
            early.status = LpStatus::Infeasible;
            early.certificate.assign(m, 0.0);
            return false;
        }
        VarMap& vm = sf.vars[j];
        if (lo == hi) {
            vm.kind = VarMap::Fixed;
            vm.offset = lo;
        } else if (lo == -kInf && hi == kInf) {
            vm.kind = VarMap::Split;
            vm.col = sf.cols++;
            vm.col2 = sf.cols++;
        } else if (hi == kInf) {
            vm.kind = VarMap::Shifted;
            vm.offset = lo;
            vm.col = sf.cols++;
        } else if (lo == -kInf) {
            vm.kind = VarMap::Mirrored;
            vm.offset = hi;
            vm.col = sf.cols++;
        } else {
            vm.kind = VarMap::Shifted;
            vm.offset = lo;
            vm.col = sf.cols++;
            upper_row_vars.push_back(j);
        }
    }
    const std::size_t slack_base = sf.cols; // one slack column per inequality row, appended below

    sf.c.assign(sf.cols, 0.0);
    sf.shift = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double cj = sense_sign * lp.objective[j];
        const VarMap& vm = sf.vars[j];
        switch (vm.kind) {
        case VarMap::Fixed: sf.shift += cj * vm.offset; break;
        case VarMap::Shifted:
            sf.c[vm.col] += cj;
            sf.shift += cj * vm.offset;
            break;
        case VarMap::Mirrored:
            sf.c[vm.col] -= cj;
            sf.shift += cj * vm.offset;
            break;
        case VarMap::Split:
            sf.c[vm.col] += cj;
            sf.c[vm.col2] -= cj;
            break;
        }
    }

    sf.row_of.assign(m, -1);
    sf.row_sign.assign(m, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        const LpConstraint& con = lp.constraints[i];
        bool all_zero = true;
        for (double a : con.coeffs)
            if (a != 0.0) {
                all_zero = false;
                break;
            }
        if (all_zero) {
            // the only presolve step: 0 (rel) rhs is either vacuous or a
            // contradiction on its own
            const bool bad = (con.rel == Relation::LessEq && con.rhs < 0.0) ||
                             (con.rel == Relation::GreaterEq && con.rhs > 0.0) ||
                             (con.rel == Relation::Equal && con.rhs != 0.0);
            if (bad) {
                early.status = LpStatus::Infeasible;
                early.certificate.assign(m, 0.0);
                early.certificate[i] = con.rel == Relation::LessEq ? -1.0 : 1.0;
                return false;
            }
            continue;
        }
        std::vector<double> row(sf.cols, 0.0);
        double rhs = con.rhs;
        for (std::size_t j = 0; j < n; ++j) {
            const double a = con.coeffs[j];
            if (a == 0.0) continue;
            const VarMap& vm = sf.vars[j];
            switch (vm.kind) {
            case VarMap::Fixed: rhs -= a * vm.offset; break;
            case VarMap::Shifted:
                row[vm.col] += a;
                rhs -= a * vm.offset;
                break;
            case VarMap::Mirrored:
                row[vm.col] -= a;
                rhs -= a * vm.offset;
                break;
            case VarMap::Split:
                row[vm.col] += a;
                row[vm.col2] -= a;
                break;
            }
        }
        sf.row_of[i] = static_cast<int>(sf.A.size());
        sf.A.push_back(std::move(row));
        sf.b.push_back(rhs);
    }

    // upper-bound rows for doubly bounded variables: z_j + s = u - l
    for (std::size_t j : upper_row_vars) {
        std::vector<double> row(sf.cols, 0.0);
        row[sf.vars[j].col] = 1.0;
        sf.A.push_back(std::move(row));
        sf.b.push_back(lp.upper[j] - lp.lower[j]);
        sf.bound_row_var.push_back(j);
    }
    sf.rows = sf.A.size();

    // slacks, then row flips to make b >= 0
    std::size_t n_slack = 0;
    std::vector<int> slack_of(sf.rows, -1);
    std::vector<double> slack_sign(sf.rows, 0.0);
    auto rel_of_row = [&](std::size_t r) {
        for (std::size_t i = 0; i < m; ++i)
            if (sf.row_of[i] == static_cast<int>(r)) return lp.constraints[i].rel;
        return Relation::LessEq; // bound rows act as <=
    };
    for (std::size_t r = 0; r < sf.rows; ++r) {
        const Relation rel = rel_of_row(r);
        if (rel != Relation::Equal) {
            slack_of[r] = static_cast<int>(slack_base + n_slack);
            slack_sign[r] = rel == Relation::LessEq ? 1.0 : -1.0;
            ++n_slack;
        }
    }
    for (auto& row : sf.A) row.resize(slack_base + n_slack, 0.0);
    sf.c.resize(slack_base + n_slack, 0.0);
    sf.cols = slack_base + n_slack;
    sf.unit_col.assign(sf.rows, -1);
    for (std::size_t r = 0; r < sf.rows; ++r) {
        double sign = 1.0;
        if (sf.b[r] < 0.0) {
            sign = -1.0;
            for (double& a : sf.A[r]) a = -a;
            sf.b[r] = -sf.b[r];
        }
        if (slack_of[r] >= 0) {
            const double coef = sign * slack_sign[r];
            sf.A[r][static_cast<std::size_t>(slack_of[r])] = coef;
            if (coef > 0.0) sf.unit_col[r] = slack_of[r];
        }
        for (std::size_t i = 0; i < m; ++i)
            if (sf.row_of[i] == static_cast<int>(r)) sf.row_sign[i] = sign;
    }
    return true;
}

// Tableau simplex core over the standard form. Artificial columns live at
// indices >= sf.cols and are never eligible to enter.
struct Simplex {
    const StdForm& sf;
    std::size_t total_cols;
    std::vector<std::vector<double>> T; // rows x (total_cols + 1), last entry rhs
    std::vector<double> obj;            // reduced costs + objective value at the end
    std::vector<int> basis;
    std::vector<int> artificial_of; // per row, artificial column or -1

    explicit Simplex(const StdForm& f) : sf(f) {
        std::size_t n_art = 0;
        artificial_of.assign(sf.rows, -1);
        for (std::size_t r = 0; r < sf.rows; ++r)
            if (sf.unit_col[r] < 0) artificial_of[r] = static_cast<int>(sf.cols + n_art++);
        total_cols = sf.cols + n_art;
        T.assign(sf.rows, std::vector<double>(total_cols + 1, 0.0));
        basis.assign(sf.rows, -1);
        for (std::size_t r = 0; r < sf.rows; ++r) {
            for (std::size_t j = 0; j < sf.cols; ++j) T[r][j] = sf.A[r][j];
            if (artificial_of[r] >= 0) T[r][static_cast<std::size_t>(artificial_of[r])] = 1.0;
            T[r][total_cols] = sf.b[r];
            basis[r] = artificial_of[r] >= 0 ? artificial_of[r] : sf.unit_col[r];
        }
    }

    bool is_artificial(int col) const { return col >= static_cast<int>(sf.cols); }

    // rebuilds the reduced-cost row for the given column costs
    void price(const std::vector<double>& cost) {
        obj.assign(total_cols + 1, 0.0);
        for (std::size_t j = 0; j < cost.size(); ++j) obj[j] = cost[j];
        for (std::size_t r = 0; r < sf.rows; ++r) {
            const double cb = cost[static_cast<std::size_t>(basis[r])];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= total_cols; ++j) obj[j] -= cb * T[r][j];
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        const double p = T[row][col];
        for (double& v : T[row]) v /= p;
        for (std::size_t r = 0; r < sf.rows; ++r) {
            if (r == row) continue;
            const double f = T[r][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= total_cols; ++j) T[r][j] -= f * T[row][j];
        }
        const double f = obj[col];
        if (f != 0.0)
            for (std::size_t j = 0; j <= total_cols; ++j) obj[j] -= f * T[row][j];
        basis[row] = static_cast<int>(col);
    }

    // Bland's rule iteration loop. Returns the entering column on an
    // unbounded detection, or -1 on optimality.
    int iterate(double rc_tol) {
        const std::size_t cap = 200 + 50 * (sf.rows + total_cols);
        for (std::size_t it = 0; it < cap; ++it) {
            int enter = -1;
            for (std::size_t j = 0; j < sf.cols; ++j) { // artificials never enter
                if (obj[j] < -rc_tol) {
                    enter = static_cast<int>(j);
                    break;
                }
            }
            if (enter < 0) return -1;
            int leave = -1;
            double best = kInf;
            for (std::size_t r = 0; r < sf.rows; ++r) {
                const double a = T[r][static_cast<std::size_t>(enter)];
                if (a <= kPivotTol) continue;
                const double ratio = T[r][total_cols] / a;
                if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 &&
                                             (leave < 0 || basis[r] < basis[static_cast<std::size_t>(leave)]))) {
                    best = ratio;
                    leave = static_cast<int>(r);
                }
            }
            if (leave < 0) return enter;
            pivot(static_cast<std::size_t>(leave), static_cast<std::size_t>(enter));
        }
        throw Error(Errc::NumericalFailure, "simplex iteration cap exceeded");
    }
};

} // namespace lpdetail

/// Two-phase dense simplex with Bland's anti-cycling rule. Returns a
/// certified primal/dual pair on Optimal, or a Farkas-type certificate on
/// Infeasible/Unbounded. Throws Error(NumericalFailure) when pivots break
/// down; callers with exact data may fall back to the rational oracle.
inline LpSolution solve(const LinearProgram& lp, double eps = kLpTol) {
    using namespace lpdetail;

    LpSolution sol;
    StdForm sf;
    if (!convert(lp, sf, sol)) return sol; // trivially infeasible

    const std::size_t n = lp.num_vars();
    const std::size_t m = lp.num_constraints();
    const double sense_sign = lp.sense == Sense::Max ? -1.0 : 1.0;

    double bmax = 0.0, cmax = 0.0;
    for (double v : sf.b) bmax = std::max(bmax, std::abs(v));
    for (double v : sf.c) cmax = std::max(cmax, std::abs(v));
    const double rc_tol = 1e-9 * (1.0 + cmax);
    const double feas_tol = eps * (1.0 + bmax);

    Simplex sx(sf);

    // ---- phase 1: minimize the sum of artificials
    bool have_artificials = false;
    {
        std::vector<double> phase1_cost(sx.total_cols, 0.0);
        for (std::size_t j = sf.cols; j < sx.total_cols; ++j) {
            phase1_cost[j] = 1.0;
            have_artificials = true;
        }
        if (have_artificials) {
            sx.price(phase1_cost);
            if (sx.iterate(1e-9 * (1.0 + bmax)) >= 0)
                throw Error(Errc::NumericalFailure, "phase 1 reported unbounded");
            double infeas = 0.0;
            for (std::size_t r = 0; r < sf.rows; ++r)
                if (sx.is_artificial(sx.basis[r])) infeas += std::max(0.0, sx.T[r][sx.total_cols]);
            if (infeas > feas_tol) {
                sol.status = LpStatus::Infeasible;
                // Farkas multipliers from the phase-1 duals: recover y row by
                // row from each row's original unit column.
                std::vector<double> y(sf.rows, 0.0);
                for (std::size_t r = 0; r < sf.rows; ++r) {
                    if (sx.artificial_of[r] >= 0)
                        y[r] = 1.0 - sx.obj[static_cast<std::size_t>(sx.artificial_of[r])];
                    else
                        y[r] = -sx.obj[static_cast<std::size_t>(sf.unit_col[r])];
                }
                sol.certificate.assign(m, 0.0);
                for (std::size_t i = 0; i < m; ++i)
                    if (sf.row_of[i] >= 0)
                        sol.certificate[i] = sf.row_sign[i] * y[static_cast<std::size_t>(sf.row_of[i])];
                return sol;
            }
            // drive leftover artificials out of the basis where possible;
            // rows where none of the real columns can pivot are dependent
            // and keep a zero-valued artificial.
            for (std::size_t r = 0; r < sf.rows; ++r) {
                if (!sx.is_artificial(sx.basis[r])) continue;
                for (std::size_t j = 0; j < sf.cols; ++j) {
                    if (std::abs(sx.T[r][j]) > kPivotTol) {
                        sx.pivot(r, j);
                        break;
                    }
                }
            }
        }
    }

    // ---- phase 2
    {
        std::vector<double> cost(sx.total_cols, 0.0);
        for (std::size_t j = 0; j < sf.cols; ++j) cost[j] = sf.c[j];
        sx.price(cost);
        const int enter = sx.iterate(rc_tol);
        if (enter >= 0) {
            // unbounded: assemble the improving ray and map it back
            std::vector<double> dz(sf.cols, 0.0);
            dz[static_cast<std::size_t>(enter)] = 1.0;
            for (std::size_t r = 0; r < sf.rows; ++r)
                if (sx.basis[r] >= 0 && sx.basis[r] < static_cast<int>(sf.cols))
                    dz[static_cast<std::size_t>(sx.basis[r])] = -sx.T[r][static_cast<std::size_t>(enter)];
            sol.status = LpStatus::Unbounded;
            sol.certificate.assign(n, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                const VarMap& vm = sf.vars[j];
                switch (vm.kind) {
                case VarMap::Fixed: break;
                case VarMap::Shifted: sol.certificate[j] = dz[vm.col]; break;
                case VarMap::Mirrored: sol.certificate[j] = -dz[vm.col]; break;
                case VarMap::Split: sol.certificate[j] = dz[vm.col] - dz[vm.col2]; break;
                }
            }
            return sol;
        }
    }

    // ---- certify: recompute the basic values and duals from the original
    // standard-form data so tableau drift cannot leak into the solution.
    std::vector<double> z(sf.cols, 0.0);
    std::vector<double> y(sf.rows, 0.0);
    if (sf.rows > 0) {
        std::vector<int> art_row(sx.total_cols, -1); // artificial column -> its unit row
        for (std::size_t r = 0; r < sf.rows; ++r)
            if (sx.artificial_of[r] >= 0) art_row[static_cast<std::size_t>(sx.artificial_of[r])] = static_cast<int>(r);
        std::vector<std::vector<double>> B(sf.rows, std::vector<double>(sf.rows, 0.0));
        std::vector<std::vector<double>> Bt(sf.rows, std::vector<double>(sf.rows, 0.0));
        std::vector<double> cb(sf.rows, 0.0);
        for (std::size_t r = 0; r < sf.rows; ++r) {
            for (std::size_t k = 0; k < sf.rows; ++k) {
                const int col = sx.basis[k];
                const double a = sx.is_artificial(col)
                                     ? (art_row[static_cast<std::size_t>(col)] == static_cast<int>(r) ? 1.0 : 0.0)
                                     : sf.A[r][static_cast<std::size_t>(col)];
                B[r][k] = a;
                Bt[k][r] = a;
            }
            cb[r] = sx.is_artificial(sx.basis[r]) ? 0.0 : sf.c[static_cast<std::size_t>(sx.basis[r])];
        }
        std::vector<double> xb;
        if (!dense_solve(B, sf.b, xb) || !dense_solve(Bt, cb, y))
            throw Error(Errc::NumericalFailure, "terminal basis is numerically singular");
        for (std::size_t r = 0; r < sf.rows; ++r)
            if (!sx.is_artificial(sx.basis[r])) z[static_cast<std::size_t>(sx.basis[r])] = xb[r];
    }

    // map the primal point back
    sol.primal.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const VarMap& vm = sf.vars[j];
        switch (vm.kind) {
        case VarMap::Fixed: sol.primal[j] = vm.offset; break;
        case VarMap::Shifted: sol.primal[j] = vm.offset + z[vm.col]; break;
        case VarMap::Mirrored: sol.primal[j] = vm.offset - z[vm.col]; break;
        case VarMap::Split: sol.primal[j] = z[vm.col] - z[vm.col2]; break;
        }
    }
    sol.dual.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (sf.row_of[i] >= 0)
            sol.dual[i] = sense_sign * sf.row_sign[i] * y[static_cast<std::size_t>(sf.row_of[i])];

    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * sol.primal[j];
    sol.objective = obj;
    double dual_obj = sf.shift;
    for (std::size_t r = 0; r < sf.rows; ++r) dual_obj += y[r] * sf.b[r];
    sol.dual_objective = sense_sign * dual_obj;

    // residuals against the original problem
    double pinf = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) ax += lp.constraints[i].coeffs[j] * sol.primal[j];
        const double s = ax - lp.constraints[i].rhs;
        switch (lp.constraints[i].rel) {
        case Relation::LessEq: pinf = std::max(pinf, s); break;
        case Relation::GreaterEq: pinf = std::max(pinf, -s); break;
        case Relation::Equal: pinf = std::max(pinf, std::abs(s)); break;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (lp.lower[j] > -kInf) pinf = std::max(pinf, lp.lower[j] - sol.primal[j]);
        if (lp.upper[j] < kInf) pinf = std::max(pinf, sol.primal[j] - lp.upper[j]);
    }
    double dinf = 0.0, comp = 0.0;
    for (std::size_t j = 0; j < sf.cols; ++j) {
        double rc = sf.c[j];
        for (std::size_t r = 0; r < sf.rows; ++r) rc -= y[r] * sf.A[r][j];
        dinf = std::max(dinf, -rc);
        comp = std::max(comp, std::abs(rc * z[j]));
    }
    sol.max_primal_infeasibility = std::max(0.0, pinf);
    sol.max_dual_infeasibility = std::max(0.0, dinf);
    sol.complementarity_gap = comp;

    const double scale = 1.0 + std::max({bmax, cmax, std::abs(sol.objective)});
    if (sol.max_primal_infeasibility > eps * scale || sol.max_dual_infeasibility > eps * scale ||
        sol.complementarity_gap > eps * scale)
        throw Error(Errc::NumericalFailure,
                    "optimal basis failed certification (residuals " +
                        std::to_string(sol.max_primal_infeasibility) + ", " +
                        std::to_string(sol.max_dual_infeasibility) + ", " +
                        std::to_string(sol.complementarity_gap) + ")");
    return sol;
}

} // namespace qshedge
