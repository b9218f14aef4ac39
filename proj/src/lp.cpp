#include "esched/lp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace esched {

namespace {
constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kRatioTieTol = 1e-12;
constexpr int kRefactorEvery = 64;
}  // namespace

int LinearProgram::add_var(double lo, double hi, double cost) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    return static_cast<int>(objective.size()) - 1;
}

void LinearProgram::add_row(std::vector<double> coeffs, Rel rel, double rhs) {
    coeffs.resize(objective.size(), 0.0);
    rows.push_back({std::move(coeffs), rel, rhs});
}

namespace {

enum class VarState { Basic, AtLower, AtUpper };

class Simplex {
  public:
    explicit Simplex(const LinearProgram& lp) : lp_(lp) {
        m_ = static_cast<int>(lp.rows.size());
        nstruct_ = lp.num_vars();
        for (int j = 0; j < nstruct_; ++j) {
            if (!std::isfinite(lp.lower[j]))
                throw std::invalid_argument("solve_lp: lower bounds must be finite");
            if (lp.lower[j] > lp.upper[j])
                throw std::invalid_argument("solve_lp: lower bound exceeds upper bound");
        }
        for (const LpRow& r : lp.rows)
            if (static_cast<int>(r.coeffs.size()) != nstruct_)
                throw std::invalid_argument("solve_lp: row dimension mismatch");

        // Columns: structural, then one slack per inequality, then one
        // artificial per row.
        for (int j = 0; j < nstruct_; ++j) {
            std::vector<double> col(m_);
            for (int i = 0; i < m_; ++i) col[i] = lp.rows[i].coeffs[j];
            cols_.push_back(std::move(col));
            lo_.push_back(lp.lower[j]);
            hi_.push_back(lp.upper[j]);
        }
        for (int i = 0; i < m_; ++i) {
            if (lp.rows[i].rel == Rel::EQ) continue;
            std::vector<double> col(m_, 0.0);
            col[i] = (lp.rows[i].rel == Rel::LE) ? 1.0 : -1.0;
            cols_.push_back(std::move(col));
            lo_.push_back(0.0);
            hi_.push_back(kLpInf);
        }
        nreal_ = static_cast<int>(cols_.size());

        // Nonbasic start: everything at its lower bound.
        state_.assign(nreal_, VarState::AtLower);

        std::vector<double> resid(m_);
        for (int i = 0; i < m_; ++i) {
            double ax = 0.0;
            for (int j = 0; j < nreal_; ++j) ax += cols_[j][i] * lo_[j];
            resid[i] = lp.rows[i].rhs - ax;
        }
        for (int i = 0; i < m_; ++i) {
            std::vector<double> col(m_, 0.0);
            col[i] = resid[i] >= 0.0 ? 1.0 : -1.0;
            cols_.push_back(std::move(col));
            lo_.push_back(0.0);
            hi_.push_back(kLpInf);
            state_.push_back(VarState::Basic);
        }
        ntotal_ = static_cast<int>(cols_.size());

        basis_.resize(m_);
        xb_.resize(m_);
        binv_.assign(m_, std::vector<double>(m_, 0.0));
        for (int i = 0; i < m_; ++i) {
            basis_[i] = nreal_ + i;
            xb_[i] = std::fabs(resid[i]);
            binv_[i][i] = cols_[nreal_ + i][i];  // +-1, self-inverse
        }
    }

    LpOutcome run() {
        // Phase 1: drive the artificial variables to zero.
        cost_.assign(ntotal_, 0.0);
        for (int j = nreal_; j < ntotal_; ++j) cost_[j] = 1.0;
        LpStatus st = iterate();
        if (st != LpStatus::Optimal) return {LpStatus::Infeasible, {}, 0.0, {}, {}};
        double art_sum = 0.0;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= nreal_) art_sum += std::fabs(xb_[i]);
        if (art_sum > 1e-7) return {LpStatus::Infeasible, {}, 0.0, {}, {}};
        // Pin artificials at zero for phase 2.
        for (int j = nreal_; j < ntotal_; ++j) {
            lo_[j] = 0.0;
            hi_[j] = 0.0;
        }

        cost_.assign(ntotal_, 0.0);
        for (int j = 0; j < nstruct_; ++j) cost_[j] = lp_.objective[j];
        st = iterate();
        if (st != LpStatus::Optimal) return {st, {}, 0.0, {}, {}};

        refactor();

        LpOutcome out;
        out.status = LpStatus::Optimal;
        out.values.resize(nstruct_);
        for (int j = 0; j < nstruct_; ++j) out.values[j] = value_of(j);
        out.objective = 0.0;
        for (int j = 0; j < nstruct_; ++j) out.objective += lp_.objective[j] * out.values[j];

        std::vector<double> y = multiplier_row();
        out.duals = y;
        out.reduced_costs.resize(nstruct_);
        for (int j = 0; j < nstruct_; ++j) {
            double d = cost_[j];
            for (int i = 0; i < m_; ++i) d -= y[i] * cols_[j][i];
            out.reduced_costs[j] = d;
        }
        return out;
    }

  private:
    double value_of(int j) const {
        if (state_[j] == VarState::AtLower) return lo_[j];
        if (state_[j] == VarState::AtUpper) return hi_[j];
        for (int i = 0; i < m_; ++i)
            if (basis_[i] == j) return xb_[i];
        return lo_[j];
    }

    std::vector<double> multiplier_row() const {
        std::vector<double> y(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double cb = cost_[basis_[i]];
            if (cb == 0.0) continue;
            for (int k = 0; k < m_; ++k) y[k] += cb * binv_[i][k];
        }
        return y;
    }

    LpStatus iterate() {
        const long max_iter = 20000L + 200L * (ntotal_ + m_);
        long pivots_since_refactor = 0;
        for (long iter = 0; iter < max_iter; ++iter) {
            std::vector<double> y = multiplier_row();

            int enter = -1;
            int dir = 0;
            for (int j = 0; j < ntotal_; ++j) {
                if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
                double d = cost_[j];
                for (int i = 0; i < m_; ++i) d -= y[i] * cols_[j][i];
                if (state_[j] == VarState::AtLower && d < -kCostTol) {
                    enter = j;
                    dir = 1;
                    break;
                }
                if (state_[j] == VarState::AtUpper && d > kCostTol) {
                    enter = j;
                    dir = -1;
                    break;
                }
            }
            if (enter < 0) return LpStatus::Optimal;

            std::vector<double> alpha(m_, 0.0);
            for (int i = 0; i < m_; ++i) {
                double s = 0.0;
                for (int k = 0; k < m_; ++k) s += binv_[i][k] * cols_[enter][k];
                alpha[i] = s;
            }

            // Ratio test: smallest step among blocking variables; ties go to
            // the blocking variable with the smallest index.
            double best_t = std::isfinite(hi_[enter]) ? hi_[enter] - lo_[enter] : kLpInf;
            int block = std::isfinite(hi_[enter]) ? enter : -1;
            int leave_row = -1;
            for (int i = 0; i < m_; ++i) {
                double a = dir * alpha[i];  // basic value moves by -a * t
                double t;
                bool hits_lower;
                if (a > kPivotTol) {
                    t = (xb_[i] - lo_[basis_[i]]) / a;
                    hits_lower = true;
                } else if (a < -kPivotTol) {
                    if (!std::isfinite(hi_[basis_[i]])) continue;
                    t = (hi_[basis_[i]] - xb_[i]) / (-a);
                    hits_lower = false;
                } else {
                    continue;
                }
                if (t < 0.0) t = 0.0;
                if (t < best_t - kRatioTieTol ||
                    (t <= best_t + kRatioTieTol && (block < 0 || basis_[i] < block))) {
                    best_t = t;
                    block = basis_[i];
                    leave_row = i;
                    leave_hits_lower_ = hits_lower;
                }
            }
            if (block < 0) return LpStatus::Unbounded;

            if (best_t > 0.0) {
                for (int i = 0; i < m_; ++i) xb_[i] -= dir * alpha[i] * best_t;
            }

            if (block == enter && leave_row < 0) {
                // Bound flip, no basis change.
                state_[enter] =
                    (state_[enter] == VarState::AtLower) ? VarState::AtUpper : VarState::AtLower;
                continue;
            }

            int lv = basis_[leave_row];
            state_[lv] = leave_hits_lower_ ? VarState::AtLower : VarState::AtUpper;
            basis_[leave_row] = enter;
            state_[enter] = VarState::Basic;
            double start = (dir > 0) ? lo_[enter] : hi_[enter];
            xb_[leave_row] = start + dir * best_t;

            double piv = alpha[leave_row];
            std::vector<double>& prow = binv_[leave_row];
            for (int k = 0; k < m_; ++k) prow[k] /= piv;
            for (int i = 0; i < m_; ++i) {
                if (i == leave_row || alpha[i] == 0.0) continue;
                double f = alpha[i];
                for (int k = 0; k < m_; ++k) binv_[i][k] -= f * prow[k];
            }

            if (++pivots_since_refactor >= kRefactorEvery) {
                refactor();
                pivots_since_refactor = 0;
            }
        }
        throw std::runtime_error("solve_lp: iteration limit exceeded");
    }

    // Rebuild the basis inverse and basic values from scratch.
    void refactor() {
        std::vector<std::vector<double>> work(m_, std::vector<double>(2 * m_, 0.0));
        for (int i = 0; i < m_; ++i) {
            for (int r = 0; r < m_; ++r) work[r][i] = cols_[basis_[i]][r];
            work[i][m_ + i] = 1.0;
        }
        for (int col = 0; col < m_; ++col) {
            int piv = col;
            for (int r = col + 1; r < m_; ++r)
                if (std::fabs(work[r][col]) > std::fabs(work[piv][col])) piv = r;
            if (std::fabs(work[piv][col]) < 1e-14)
                throw std::runtime_error("solve_lp: singular basis during refactorization");
            std::swap(work[piv], work[col]);
            double d = work[col][col];
            for (int k = col; k < 2 * m_; ++k) work[col][k] /= d;
            for (int r = 0; r < m_; ++r) {
                if (r == col || work[r][col] == 0.0) continue;
                double f = work[r][col];
                for (int k = col; k < 2 * m_; ++k) work[r][k] -= f * work[col][k];
            }
        }
        for (int i = 0; i < m_; ++i)
            for (int k = 0; k < m_; ++k) binv_[i][k] = work[i][m_ + k];

        // x_B = Binv * (b - sum of nonbasic columns at their bounds)
        std::vector<double> rhs(m_);
        for (int i = 0; i < m_; ++i) rhs[i] = lp_.rows[i].rhs;
        for (int j = 0; j < ntotal_; ++j) {
            if (state_[j] == VarState::Basic) continue;
            double v = (state_[j] == VarState::AtLower) ? lo_[j] : hi_[j];
            if (v == 0.0) continue;
            for (int i = 0; i < m_; ++i) rhs[i] -= cols_[j][i] * v;
        }
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            for (int k = 0; k < m_; ++k) s += binv_[i][k] * rhs[k];
            xb_[i] = s;
        }
    }

    const LinearProgram& lp_;
    int m_ = 0;
    int nstruct_ = 0;
    int nreal_ = 0;   // structural + slack
    int ntotal_ = 0;  // structural + slack + artificial
    std::vector<std::vector<double>> cols_;
    std::vector<double> lo_, hi_, cost_;
    std::vector<VarState> state_;
    std::vector<int> basis_;
    std::vector<double> xb_;
    std::vector<std::vector<double>> binv_;
    bool leave_hits_lower_ = true;
};

}  // namespace

// Equilibration: columns are normalized by their bound span, rows by their
// largest scaled coefficient, so instances mixing very different units
// (cycles against seconds) keep meaningful reduced costs. Solutions, duals,
// and reduced costs are mapped back to the original units.
LpOutcome solve_lp(const LinearProgram& lp) {
    const int nv = lp.num_vars();
    const int mr = static_cast<int>(lp.rows.size());

    std::vector<double> col_scale(nv, 1.0);
    for (int j = 0; j < nv; ++j) {
        double span = std::fabs(lp.lower[j]);
        if (std::isfinite(lp.upper[j])) span = std::max(span, std::fabs(lp.upper[j]));
        if (span > 0.0) col_scale[j] = std::min(1e12, std::max(1e-9, span));
    }

    LinearProgram scaled;
    for (int j = 0; j < nv; ++j)
        scaled.add_var(lp.lower[j] / col_scale[j],
                       std::isfinite(lp.upper[j]) ? lp.upper[j] / col_scale[j] : kLpInf,
                       lp.objective[j] * col_scale[j]);
    std::vector<double> row_scale(mr, 1.0);
    for (int i = 0; i < mr; ++i) {
        if (static_cast<int>(lp.rows[i].coeffs.size()) != nv)
            throw std::invalid_argument("solve_lp: row dimension mismatch");
        std::vector<double> coeffs(nv);
        double biggest = 0.0;
        for (int j = 0; j < nv; ++j) {
            coeffs[j] = lp.rows[i].coeffs[j] * col_scale[j];
            biggest = std::max(biggest, std::fabs(coeffs[j]));
        }
        if (biggest > 0.0) row_scale[i] = std::min(1e12, std::max(1e-9, biggest));
        for (double& c : coeffs) c /= row_scale[i];
        scaled.add_row(std::move(coeffs), lp.rows[i].rel, lp.rows[i].rhs / row_scale[i]);
    }

    Simplex s(scaled);
    LpOutcome out = s.run();
    if (out.status != LpStatus::Optimal) return out;

    for (int j = 0; j < nv; ++j) out.values[j] *= col_scale[j];
    out.objective = 0.0;
    for (int j = 0; j < nv; ++j) out.objective += lp.objective[j] * out.values[j];
    for (int i = 0; i < mr; ++i) out.duals[i] /= row_scale[i];
    for (int j = 0; j < nv; ++j) out.reduced_costs[j] /= col_scale[j];
    return out;
}

}  // namespace esched
