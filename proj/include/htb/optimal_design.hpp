#pragma once

// Exploration designs for the linear policies.
//
// * G-optimal design: maximizes log det S(p), S(p) = sum_a p_a phi_a phi_a^T.
//   By Kiefer-Wolfowitz the optimum has max_a phi_a^T S(p)^{-1} phi_a = d.
// * Centered design: maximizes log det V(p), the covariance of phi under p.
//   Solved as a G-optimal design of the lifted features (1, phi_a), using
//   det H'(p) = det V(p).

#include "htb/core_types.hpp"

#include <Eigen/Cholesky>

namespace htb {

enum class CovarianceKind { Raw, Centered };

struct CovarianceOperator {
    Eigen::MatrixXd matrix;
    CovarianceKind kind = CovarianceKind::Raw;
    /// mu(p) for the centered kind, zero for the raw kind.
    Eigen::VectorXd mean;
};

/// Raw: sum_a p_a phi_a phi_a^T. Centered: sum_a p_a (phi_a - mu)(phi_a - mu)^T.
CovarianceOperator covariance(const SimplexDistribution& p, const FeatureSet& features, CovarianceKind kind);
CovarianceOperator covariance(std::span<const double> p, const Eigen::MatrixXd& rows, CovarianceKind kind);

/// Cholesky factor of a positive definite covariance. Construction throws
/// NearSingular when the smallest eigenvalue is at most 1e-12 * trace.
class SpdSolver {
public:
    explicit SpdSolver(const CovarianceOperator& op);

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
    double log_det() const;
    double condition_estimate() const { return condition_; }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double condition_ = 1.0;
};

/// x with op.matrix * x = rhs.
Eigen::VectorXd solve_spd(const CovarianceOperator& op, const Eigen::VectorXd& rhs);

/// log det of the operator; -infinity when singular.
double log_det(const CovarianceOperator& op);

struct DesignResult {
    SimplexDistribution distribution;
    /// max_a phi_a^T S^{-1} phi_a (G-optimal) or max_a |phi_a - mu|^2_{V^{-1}}
    /// (centered).
    double max_leverage = 0.0;
    std::size_t iterations = 0;
};

inline constexpr double kDefaultDesignTol = 1e-3;

/// Per-arm leverages at p for the given covariance kind.
Vector leverages(const SimplexDistribution& p, const FeatureSet& features, CovarianceKind kind);

DesignResult g_optimal_design(const FeatureSet& features, double tol = kDefaultDesignTol);

/// Throws AffinelyDegenerate when the arms lie in a lower-dimensional affine
/// subspace.
DesignResult centered_optimal_design(const FeatureSet& features, double tol = kDefaultDesignTol);

/// Iteration cap of the design solvers for K arms in dimension d.
std::size_t design_iteration_cap(std::size_t d, std::size_t k);

}  // namespace htb
