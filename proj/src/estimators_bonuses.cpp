#include "htb/estimators_bonuses.hpp"

#include "htb/optimal_design.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace htb {

namespace {

void check_inputs(std::size_t chosen_arm, double loss, const SimplexDistribution& p, std::span<const double> s) {
    if (s.size() != p.size()) throw Error(ErrorCode::DimensionMismatch, "threshold vector size");
    if (chosen_arm >= p.size()) throw Error(ErrorCode::InvalidArgument, "chosen arm out of range");
    if (!std::isfinite(loss)) throw Error(ErrorCode::NonFinite, "observed loss is not finite");
    for (double x : s) {
        if (!(x > 0.0)) throw Error(ErrorCode::InvalidArgument, "clip thresholds must be positive");
    }
}

void clip(EstimateBundle& e) {
    const std::size_t k = e.raw_estimate.size();
    e.clipped_estimate.assign(k, 0.0);
    e.clipped_count = 0;
    for (std::size_t a = 0; a < k; ++a) {
        if (std::abs(e.raw_estimate[a]) <= e.clip_thresholds[a]) {
            e.clipped_estimate[a] = e.raw_estimate[a];
        } else {
            ++e.clipped_count;
        }
    }
}

}  // namespace

bool clip_contained(const EstimateBundle& e) {
    for (std::size_t a = 0; a < e.clipped_estimate.size(); ++a) {
        if (!(std::abs(e.clipped_estimate[a]) <= e.clip_thresholds[a])) return false;
    }
    return true;
}

bool bonus_within_threshold(const EstimateBundle& e, double rel_tol) {
    for (std::size_t a = 0; a < e.bonus.size(); ++a) {
        if (!(e.bonus[a] >= 0.0) || !(e.bonus[a] <= e.clip_thresholds[a] * (1.0 + rel_tol))) return false;
    }
    return true;
}

EstimateBundle mab_estimate(std::size_t chosen_arm, double loss, const SimplexDistribution& p,
                            std::span<const double> s, const HeavyTailSpec& spec) {
    check_inputs(chosen_arm, loss, p, s);
    if (p[chosen_arm] <= 1e-300) throw Error(ErrorCode::ZeroProbability, "played arm has zero probability");
    const std::size_t k = p.size();
    const double eps = spec.epsilon();
    EstimateBundle e;
    e.clip_thresholds.assign(s.begin(), s.end());
    e.raw_estimate.assign(k, 0.0);
    e.raw_estimate[chosen_arm] = loss / p[chosen_arm];
    e.bonus.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
        // p_a = 0 would give an infinite bonus; the arm is never played then.
        e.bonus[a] = p[a] > 0.0 ? spec.sigma() * std::pow(p[a] * s[a], 1.0 - eps) : 0.0;
    }
    clip(e);
    return e;
}

EstimateBundle linear_estimate(std::size_t chosen_arm, double loss, const SimplexDistribution& p,
                               const FeatureSet& features, std::span<const double> s, const HeavyTailSpec& spec) {
    check_inputs(chosen_arm, loss, p, s);
    if (features.num_arms() != p.size()) throw Error(ErrorCode::DimensionMismatch, "features and p differ in K");
    const std::size_t k = p.size();
    const double eps = spec.epsilon();
    const SpdSolver solver(covariance(p, features, CovarianceKind::Raw));
    const Eigen::MatrixXd& phi = features.matrix();
    const Eigen::MatrixXd solved = solver.solve(Eigen::MatrixXd(phi.transpose()));

    EstimateBundle e;
    e.clip_thresholds.assign(s.begin(), s.end());
    e.raw_estimate.resize(k);
    e.bonus.resize(k);
    const Eigen::VectorXd x = solved.col(static_cast<Eigen::Index>(chosen_arm));
    for (std::size_t a = 0; a < k; ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        e.raw_estimate[a] = phi.row(ai).dot(x) * loss;
        const double lev = phi.row(ai).dot(solved.col(ai));
        e.bonus[a] = spec.sigma() * std::pow(s[a], 1.0 - eps) * abs_pow(lev, eps / 2.0);
    }
    clip(e);
    return e;
}

EstimateBundle vr_linear_estimate(std::size_t chosen_arm, double loss, const SimplexDistribution& p,
                                  const FeatureSet& features, std::span<const double> s, const HeavyTailSpec& spec) {
    check_inputs(chosen_arm, loss, p, s);
    if (features.num_arms() != p.size()) throw Error(ErrorCode::DimensionMismatch, "features and p differ in K");
    const std::size_t k = p.size();
    const double eps = spec.epsilon();
    const Eigen::MatrixXd gram = estimator_kernel(EstimatorKind::VarianceReduced, p, features);

    EstimateBundle e;
    e.clip_thresholds.assign(s.begin(), s.end());
    e.raw_estimate.resize(k);
    e.bonus.resize(k);
    const auto c = static_cast<Eigen::Index>(chosen_arm);
    for (std::size_t a = 0; a < k; ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        e.raw_estimate[a] = gram(ai, c) * loss;
        double sum = 0.0;
        for (std::size_t b = 0; b < k; ++b) {
            if (p[b] > 0.0) sum += p[b] * abs_pow(gram(ai, static_cast<Eigen::Index>(b)), eps);
        }
        e.bonus[a] = spec.sigma() * sum * std::pow(s[a], 1.0 - eps);
    }
    clip(e);
    return e;
}

Eigen::MatrixXd estimator_kernel(EstimatorKind kind, const SimplexDistribution& p, const FeatureSet& features) {
    const auto k = static_cast<Eigen::Index>(p.size());
    switch (kind) {
        case EstimatorKind::Mab: {
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
            for (Eigen::Index a = 0; a < k; ++a) {
                const double w = p[static_cast<std::size_t>(a)];
                if (w > 0.0) m(a, a) = 1.0 / w;
            }
            return m;
        }
        case EstimatorKind::Linear: {
            const SpdSolver solver(covariance(p, features, CovarianceKind::Raw));
            const Eigen::MatrixXd& phi = features.matrix();
            return phi * solver.solve(Eigen::MatrixXd(phi.transpose()));
        }
        case EstimatorKind::VarianceReduced: {
            const auto op = covariance(p, features, CovarianceKind::Centered);
            const SpdSolver solver(op);
            const Eigen::MatrixXd centered = features.matrix().rowwise() - op.mean.transpose();
            return centered * solver.solve(Eigen::MatrixXd(centered.transpose()));
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown estimator kind");
}

namespace {

constexpr std::size_t kChunk = 1u << 15;

// Per-arm sums of the loss and the squared loss over one chunk of draws.
struct ChunkStats {
    Vector sum;
    Vector sum_sq;
};

ChunkStats run_chunk(const SimplexDistribution& p, std::span<const double> means, double half_width,
                     std::size_t n, std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    Rng rng(seq);
    ChunkStats st{Vector(p.size(), 0.0), Vector(p.size(), 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t arm = sample_arm(p, uniform01(rng));
        const double loss = means[arm] + half_width * (2.0 * uniform01(rng) - 1.0);
        st.sum[arm] += loss;
        st.sum_sq[arm] += loss * loss;
    }
    return st;
}

}  // namespace

UnbiasedCheck check_unbiased_differences(EstimatorKind kind, const SimplexDistribution& p, const FeatureSet& features,
                                         std::span<const double> true_means, double half_width,
                                         std::size_t n_samples, std::uint64_t seed, Execution exec) {
    const std::size_t k = p.size();
    if (true_means.size() != k) throw Error(ErrorCode::DimensionMismatch, "true_means size");
    if (kind != EstimatorKind::Mab && features.num_arms() != k) {
        throw Error(ErrorCode::DimensionMismatch, "features and p differ in K");
    }
    if (n_samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two samples");
    if (!(half_width >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative noise half-width");
    const Eigen::MatrixXd m = estimator_kernel(kind, p, features);

    const std::size_t chunks = (n_samples + kChunk - 1) / kChunk;
    std::vector<ChunkStats> parts(chunks);
    auto chunk_size = [&](std::size_t c) { return std::min(kChunk, n_samples - c * kChunk); };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
            const auto cu = static_cast<std::size_t>(c);
            parts[cu] = run_chunk(p, true_means, half_width, chunk_size(cu), seed, cu);
        }
    } else {
        for (std::size_t c = 0; c < chunks; ++c) parts[c] = run_chunk(p, true_means, half_width, chunk_size(c), seed, c);
    }
    Vector s1(k, 0.0), s2(k, 0.0);
    for (const auto& part : parts) {
        for (std::size_t a = 0; a < k; ++a) {
            s1[a] += part.sum[a];
            s2[a] += part.sum_sq[a];
        }
    }

    const double n = static_cast<double>(n_samples);
    UnbiasedCheck out;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            double mean = 0.0, second = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                const double diff = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) -
                                    m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(c));
                mean += diff * s1[c];
                second += diff * diff * s2[c];
            }
            mean /= n;
            second /= n;
            const double var = std::max(0.0, second - mean * mean) * n / (n - 1.0);
            PairDeviation pd{a, b, std::abs(mean - (true_means[a] - true_means[b])), std::sqrt(var / n)};
            if (pd.deviation >= out.max_deviation) {
                out.max_deviation = pd.deviation;
                out.stderr_at_max = pd.standard_error;
            }
            if (pd.standard_error > 0.0) {
                out.max_z = std::max(out.max_z, pd.deviation / pd.standard_error);
            } else if (pd.deviation > 0.0) {
                out.max_z = std::numeric_limits<double>::infinity();
            }
            out.pairs.push_back(pd);
        }
    }
    return out;
}

VarianceBound variance_bound_check(const SimplexDistribution& p, const FeatureSet& features, double epsilon) {
    if (!(epsilon > 1.0 && epsilon <= 2.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (1, 2]");
    const Eigen::MatrixXd gram = estimator_kernel(EstimatorKind::VarianceReduced, p, features);
    const std::size_t k = p.size();
    VarianceBound vb;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            vb.lhs += p[a] * p[b] * abs_pow(gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)), epsilon);
        }
    }
    const double d = static_cast<double>(features.ambient_dim());
    vb.rhs = 4.0 * std::pow(d, epsilon / 2.0) * std::pow(1.0 - p.max(), 2.0 - epsilon);
    return vb;
}

}  // namespace htb
