#pragma once

// Exhaustive expectation of the clipped-away part of an estimator,
// E |l~_a| 1{|l~_a| > s_a}, over the played arm and a finitely supported loss.
// Kernels are rebuilt from an explicit matrix inverse so the oracle shares no
// code path with the library's estimators.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace htb::oracle {

enum class Kind { Mab, Linear, Centered };

struct Atoms {
    std::vector<double> values;
    std::vector<double> probs;
};

inline Eigen::MatrixXd kernel(Kind kind, const std::vector<double>& p, const Eigen::MatrixXd& phi) {
    const auto k = static_cast<Eigen::Index>(p.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
    if (kind == Kind::Mab) {
        for (Eigen::Index a = 0; a < k; ++a) m(a, a) = 1.0 / p[static_cast<std::size_t>(a)];
        return m;
    }
    const auto d = phi.cols();
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    if (kind == Kind::Centered) {
        for (Eigen::Index a = 0; a < k; ++a) mu += p[static_cast<std::size_t>(a)] * phi.row(a).transpose();
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index a = 0; a < k; ++a) {
        const Eigen::VectorXd x = phi.row(a).transpose() - mu;
        cov += p[static_cast<std::size_t>(a)] * x * x.transpose();
    }
    const Eigen::MatrixXd inv = cov.inverse();
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index c = 0; c < k; ++c) {
            m(a, c) = (phi.row(a).transpose() - mu).dot(inv * (phi.row(c).transpose() - mu));
        }
    }
    return m;
}

/// Expected clipped-away magnitude per arm. atoms[c] is the loss law of arm c.
inline std::vector<double> clipped_mass(Kind kind, const std::vector<double>& p, const Eigen::MatrixXd& phi,
                                        const std::vector<Atoms>& atoms, const std::vector<double>& s) {
    const Eigen::MatrixXd m = kernel(kind, p, phi);
    std::vector<double> out(p.size(), 0.0);
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t c = 0; c < p.size(); ++c) {
            for (std::size_t j = 0; j < atoms[c].values.size(); ++j) {
                const double est = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) * atoms[c].values[j];
                if (std::abs(est) > s[a]) out[a] += p[c] * atoms[c].probs[j] * std::abs(est);
            }
        }
    }
    return out;
}

}  // namespace htb::oracle
