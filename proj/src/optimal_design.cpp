#include "htb/optimal_design.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace htb {

CovarianceOperator covariance(std::span<const double> p, const Eigen::MatrixXd& rows, CovarianceKind kind) {
    if (p.size() != static_cast<std::size_t>(rows.rows())) {
        throw Error(ErrorCode::DimensionMismatch, "covariance: distribution and feature set sizes differ");
    }
    const Eigen::Index d = rows.cols();
    CovarianceOperator op{Eigen::MatrixXd::Zero(d, d), kind, Eigen::VectorXd::Zero(d)};
    if (kind == CovarianceKind::Centered) {
        for (Eigen::Index a = 0; a < rows.rows(); ++a) op.mean += p[static_cast<std::size_t>(a)] * rows.row(a).transpose();
    }
    for (Eigen::Index a = 0; a < rows.rows(); ++a) {
        const double w = p[static_cast<std::size_t>(a)];
        if (w == 0.0) continue;
        const Eigen::VectorXd x = rows.row(a).transpose() - op.mean;
        op.matrix.selfadjointView<Eigen::Lower>().rankUpdate(x, w);
    }
    op.matrix = op.matrix.selfadjointView<Eigen::Lower>();
    return op;
}

CovarianceOperator covariance(const SimplexDistribution& p, const FeatureSet& features, CovarianceKind kind) {
    return covariance(p.weights(), features.matrix(), kind);
}

SpdSolver::SpdSolver(const CovarianceOperator& op) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op.matrix, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const double trace = op.matrix.trace();
    condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(lo > 1e-12 * trace)) {
        throw Error(ErrorCode::NearSingular,
                    "covariance is near singular (condition estimate " + std::to_string(condition_) + ")");
    }
    llt_.compute(op.matrix);
    if (llt_.info() != Eigen::Success) throw Error(ErrorCode::NearSingular, "Cholesky factorization failed");
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

Eigen::MatrixXd SpdSolver::solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }

double SpdSolver::log_det() const {
    return 2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::VectorXd solve_spd(const CovarianceOperator& op, const Eigen::VectorXd& rhs) {
    if (rhs.size() != op.matrix.rows()) throw Error(ErrorCode::DimensionMismatch, "solve_spd: rhs size");
    return SpdSolver(op).solve(rhs);
}

double log_det(const CovarianceOperator& op) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op.matrix, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double v = eig.eigenvalues()(i);
        if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
        s += std::log(v);
    }
    return s;
}

Vector leverages(const SimplexDistribution& p, const FeatureSet& features, CovarianceKind kind) {
    const auto op = covariance(p, features, kind);
    const SpdSolver solver(op);
    const Eigen::MatrixXd centered = features.matrix().rowwise() - op.mean.transpose();
    const Eigen::MatrixXd solved = solver.solve(Eigen::MatrixXd(centered.transpose()));
    Vector lev(features.num_arms());
    for (std::size_t a = 0; a < lev.size(); ++a) {
        lev[a] = centered.row(static_cast<Eigen::Index>(a)).dot(solved.col(static_cast<Eigen::Index>(a)));
    }
    return lev;
}

std::size_t design_iteration_cap(std::size_t d, std::size_t k) {
    const double cap = 50.0 * static_cast<double>(d) * std::log(static_cast<double>(std::max<std::size_t>(k, 2)));
    return static_cast<std::size_t>(std::ceil(cap));
}

namespace {

struct CoreResult {
    Vector p;
    double max_leverage;
    std::size_t iterations;
};

// Frank-Wolfe with away steps on log det S(p) (the Wolfe / Todd-Yildirim
// variant). Toward steps move mass onto the arm of largest leverage, away
// steps take mass from the supported arm of smallest leverage; both use the
// exact line search of the rank-one update.
CoreResult g_optimal_core(const Eigen::MatrixXd& rows, double tol) {
    const std::size_t k = static_cast<std::size_t>(rows.rows());
    const double d = static_cast<double>(rows.cols());
    const std::size_t cap = design_iteration_cap(static_cast<std::size_t>(rows.cols()), k);
    Vector p(k, 1.0 / static_cast<double>(k));
    Vector lev(k);

    for (std::size_t it = 0;; ++it) {
        const auto op = covariance(p, rows, CovarianceKind::Raw);
        const SpdSolver solver(op);
        const Eigen::MatrixXd solved = solver.solve(Eigen::MatrixXd(rows.transpose()));
        std::size_t up = 0, down = k;
        for (std::size_t a = 0; a < k; ++a) {
            lev[a] = rows.row(static_cast<Eigen::Index>(a)).dot(solved.col(static_cast<Eigen::Index>(a)));
            if (lev[a] > lev[up]) up = a;
            if (p[a] > 0.0 && (down == k || lev[a] < lev[down])) down = a;
        }
        if (lev[up] <= d * (1.0 + tol)) return {p, lev[up], it};
        if (it >= cap) {
            throw Error(ErrorCode::NoConvergence, "design solver hit its iteration cap (max leverage " +
                                                      std::to_string(lev[up]) + ", d = " + std::to_string(d) + ")");
        }

        const double gain_up = lev[up] / d - 1.0;
        const double gain_down = 1.0 - lev[down] / d;
        if (gain_up >= gain_down || p[down] >= 1.0) {
            const double step = (lev[up] - d) / (d * (lev[up] - 1.0));
            for (double& x : p) x *= 1.0 - step;
            p[up] += step;
        } else {
            const double max_step = p[down] / (1.0 - p[down]);
            double step = max_step;
            if (lev[down] > 1.0) step = std::min(max_step, (d - lev[down]) / (d * (lev[down] - 1.0)));
            for (double& x : p) x *= 1.0 + step;
            p[down] -= step;
            if (step == max_step || p[down] < 0.0) p[down] = 0.0;
        }
    }
}

// Drop negligible weights and rescale.
Vector prune(Vector p) {
    double s = 0.0;
    for (double& x : p) {
        if (x < 1e-9) x = 0.0;
        s += x;
    }
    for (double& x : p) x /= s;
    return p;
}

}  // namespace

DesignResult g_optimal_design(const FeatureSet& features, double tol) {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "design tolerance must be positive");
    auto core = g_optimal_core(features.matrix(), tol);
    SimplexDistribution p(prune(std::move(core.p)));
    const auto lev = leverages(p, features, CovarianceKind::Raw);
    return {p, *std::max_element(lev.begin(), lev.end()), core.iterations};
}

DesignResult centered_optimal_design(const FeatureSet& features, double tol) {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "design tolerance must be positive");
    const std::size_t d = features.ambient_dim();
    const std::size_t arank = affine_rank(features.matrix());
    if (arank < d) {
        throw Error(ErrorCode::AffinelyDegenerate,
                    "arms span an affine subspace of dimension " + std::to_string(arank) + " < d = " + std::to_string(d));
    }
    Eigen::MatrixXd lifted(features.matrix().rows(), features.matrix().cols() + 1);
    lifted.col(0).setOnes();
    lifted.rightCols(features.matrix().cols()) = features.matrix();
    // (1, phi)^T H'^{-1} (1, phi) = 1 + |phi - mu|^2_{V^{-1}}, so the lifted
    // tolerance that certifies d(1 + tol) for the centered leverage is
    // tol * d / (d + 1).
    const double dd = static_cast<double>(d);
    auto core = g_optimal_core(lifted, tol * dd / (dd + 1.0));
    SimplexDistribution p(prune(std::move(core.p)));
    const auto lev = leverages(p, features, CovarianceKind::Centered);
    return {p, *std::max_element(lev.begin(), lev.end()), core.iterations};
}

}  // namespace htb
