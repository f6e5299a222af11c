#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "causalfp/errors.hpp"

namespace causalfp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One low-rank term: weight * u * u'.
struct LowRankFactor {
    MatrixXd u;  // n x k
    double weight = 0.0;
};

/// Symmetric positive definite matrix of the form
///
///   Sigma = diag(d) + sum_i  w_i * U_i * U_i'
///
/// with solves and log-determinants done through the Sherman-Morrison-
/// Woodbury and Sylvester identities: only the small k_i x k_i systems are
/// ever factored, never an n x n matrix. Factors are absorbed in the order
/// given (first factor innermost), so the inverse takes the telescoped form
///
///   Sigma^-1 = D^-1 - sum_i V_i M_i^-1 V_i'
///
/// where V_i = A_{i-1}^-1 U_i, M_i = I/w_i + U_i' A_{i-1}^-1 U_i and A_i is
/// the partial sum up to factor i.
class StructuredCovariance {
public:
    StructuredCovariance(VectorXd diag, std::vector<LowRankFactor> factors)
        : diag_(std::move(diag)), factors_(std::move(factors)) {
        const int n = static_cast<int>(diag_.size());
        if (n < 1) throw ValidationError("StructuredCovariance: empty diagonal");
        for (int i = 0; i < n; ++i)
            if (!(diag_[i] > 0.0))
                throw NotPositiveDefiniteError("StructuredCovariance: diagonal entry " +
                                               std::to_string(i) + " is not strictly positive");
        for (const auto& f : factors_)
            if (f.u.size() > 0 && f.u.rows() != n)
                throw ValidationError("StructuredCovariance: factor has " + std::to_string(f.u.rows()) +
                                      " rows, expected " + std::to_string(n));
        inv_diag_ = diag_.cwiseInverse();
        precompute();
    }

    int dim() const { return static_cast<int>(diag_.size()); }
    const VectorXd& diagonal_part() const { return diag_; }
    const std::vector<LowRankFactor>& factors() const { return factors_; }

    /// Sigma^-1 v without materializing anything n x n.
    VectorXd solve(const VectorXd& v) const {
        if (v.size() != diag_.size())
            throw ValidationError("StructuredCovariance::solve: vector length mismatch");
        VectorXd x = inv_diag_.cwiseProduct(v);
        for (const auto& lv : levels_) x.noalias() -= lv.v * lv.m_ldlt.solve(lv.v.transpose() * v);
        return x;
    }

    /// Columnwise solve.
    MatrixXd solve_matrix(const MatrixXd& rhs) const {
        if (rhs.rows() != diag_.size())
            throw ValidationError("StructuredCovariance::solve: row count mismatch");
        MatrixXd x = inv_diag_.asDiagonal() * rhs;
        for (const auto& lv : levels_) x.noalias() -= lv.v * lv.m_ldlt.solve(lv.v.transpose() * rhs);
        return x;
    }

    /// log |Sigma| through the Sylvester identity, one small determinant per factor.
    double log_det() const { return log_det_; }

    /// v' Sigma^-1 v.
    double quad_form(const VectorXd& v) const { return v.dot(solve(v)); }

    double trace() const {
        double t = diag_.sum();
        for (const auto& f : factors_)
            if (f.weight != 0.0 && f.u.size() > 0) t += f.weight * f.u.squaredNorm();
        return t;
    }

    /// Dense n x n assembly, for small-n analysis and test support only.
    MatrixXd materialize() const {
        if (dim() > 10000)
            throw ValidationError("StructuredCovariance::materialize: dimension " +
                                  std::to_string(dim()) + " exceeds the 10^4 guard");
        MatrixXd m = diag_.asDiagonal();
        for (const auto& f : factors_)
            if (f.weight != 0.0 && f.u.size() > 0) m.noalias() += f.weight * f.u * f.u.transpose();
        return m;
    }

    /// k * Sigma: scales the diagonal and every factor weight.
    StructuredCovariance scaled(double k) const {
        if (!(k > 0.0)) throw ValidationError("StructuredCovariance::scaled: factor must be > 0");
        std::vector<LowRankFactor> fs = factors_;
        for (auto& f : fs) f.weight *= k;
        return StructuredCovariance(diag_ * k, std::move(fs));
    }

private:
    struct Level {
        MatrixXd v;                     // A_{i-1}^-1 U_i
        Eigen::LDLT<MatrixXd> m_ldlt;   // I/w + U' A_{i-1}^-1 U
    };

    void precompute() {
        log_det_ = diag_.array().log().sum();
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            const auto& f = factors_[i];
            if (f.weight == 0.0 || f.u.size() == 0) continue;
            const int k = static_cast<int>(f.u.cols());

            // Apply the inverse built so far to the new factor columns.
            MatrixXd v = inv_diag_.asDiagonal() * f.u;
            for (const auto& lv : levels_) v.noalias() -= lv.v * lv.m_ldlt.solve(lv.v.transpose() * f.u);

            const MatrixXd utv = f.u.transpose() * v;
            MatrixXd m = utv;
            m.diagonal().array() += 1.0 / f.weight;
            Eigen::LDLT<MatrixXd> m_ldlt(m);
            if (m_ldlt.info() != Eigen::Success || m_ldlt.rcond() < 1e-13)
                throw SingularBlockError("StructuredCovariance: inner system for factor " +
                                         std::to_string(i) + " (size " + std::to_string(k) +
                                         ") is numerically singular");

            // Sylvester step: log |I + w U' A^-1 U| from its own pivots.
            MatrixXd cap = f.weight * utv;
            cap.diagonal().array() += 1.0;
            Eigen::LDLT<MatrixXd> cap_ldlt(cap);
            if (cap_ldlt.info() != Eigen::Success)
                throw NotPositiveDefiniteError("StructuredCovariance: determinant update for factor " +
                                               std::to_string(i) + " failed");
            double ld = 0.0;
            for (int j = 0; j < k; ++j) {
                const double pivot = cap_ldlt.vectorD()[j];
                if (!(pivot > 0.0))
                    throw NotPositiveDefiniteError(
                        "StructuredCovariance: non-positive pivot in determinant update for factor " +
                        std::to_string(i));
                ld += std::log(pivot);
            }
            log_det_ += ld;

            levels_.push_back(Level{std::move(v), std::move(m_ldlt)});
        }
    }

    VectorXd diag_;
    VectorXd inv_diag_;
    std::vector<LowRankFactor> factors_;
    std::vector<Level> levels_;
    double log_det_ = 0.0;
};

}  // namespace causalfp
