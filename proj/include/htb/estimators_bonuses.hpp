#pragma once

// Loss estimators for bandit feedback and the bonuses that cover their
// clipping bias.
//
//   MAB:        l~_a = l 1{a_t = a} / p_a,           b_a = sigma p_a^{1-eps} s_a^{1-eps}
//   linear:     l~_a = phi_a^T S^{-1} phi_{a_t} l,   b_a = sigma s_a^{1-eps} (phi_a^T S^{-1} phi_a)^{eps/2}
//   centered:   l~_a = pbar_a^T V^{-1} pbar_{a_t} l, b_a = sigma s_a^{1-eps} sum_b p_b |pbar_a^T V^{-1} pbar_b|^eps
//
// with pbar_a = phi_a - mu(p). Clipping keeps l~_a when |l~_a| <= s_a and
// zeroes it otherwise.

#include "htb/core_types.hpp"

#include <cstdint>

namespace htb {

struct EstimateBundle {
    Vector raw_estimate;
    Vector clipped_estimate;
    Vector bonus;
    Vector clip_thresholds;
    std::size_t clipped_count = 0;
};

/// Relative slack for the b <= s check; the two sides coincide exactly on
/// the boundary of each algorithm's coupling.
inline constexpr double kBonusRelTol = 1e-9;

bool clip_contained(const EstimateBundle& e);
bool bonus_within_threshold(const EstimateBundle& e, double rel_tol = kBonusRelTol);

EstimateBundle mab_estimate(std::size_t chosen_arm, double loss, const SimplexDistribution& p,
                            std::span<const double> s, const HeavyTailSpec& spec);

EstimateBundle linear_estimate(std::size_t chosen_arm, double loss, const SimplexDistribution& p,
                               const FeatureSet& features, std::span<const double> s, const HeavyTailSpec& spec);

EstimateBundle vr_linear_estimate(std::size_t chosen_arm, double loss, const SimplexDistribution& p,
                                  const FeatureSet& features, std::span<const double> s, const HeavyTailSpec& spec);

enum class EstimatorKind { Mab, Linear, VarianceReduced };

/// K x K matrix M with l~_a = M(a, c) l when arm c is played.
Eigen::MatrixXd estimator_kernel(EstimatorKind kind, const SimplexDistribution& p, const FeatureSet& features);

enum class Execution { Serial, Parallel };

struct PairDeviation {
    std::size_t a = 0;
    std::size_t b = 0;
    double deviation = 0.0;
    double standard_error = 0.0;
};

struct UnbiasedCheck {
    std::vector<PairDeviation> pairs;
    double max_deviation = 0.0;
    /// Standard error of the pair attaining max_deviation.
    double stderr_at_max = 0.0;
    /// max over pairs of deviation / stderr (0 when a pair has zero spread
    /// and zero deviation).
    double max_z = 0.0;
};

/// Monte Carlo check of E[l~_a - l~_b] = m_a - m_b. Losses are m_{a_t} + U
/// with U uniform on [-half_width, half_width]. For the linear estimators m
/// must be linear in the features (affine for the centered one). Samples are
/// drawn in fixed-size chunks with per-chunk seeds, so the serial and
/// parallel paths agree bit for bit.
UnbiasedCheck check_unbiased_differences(EstimatorKind kind, const SimplexDistribution& p, const FeatureSet& features,
                                         std::span<const double> true_means, double half_width,
                                         std::size_t n_samples, std::uint64_t seed,
                                         Execution exec = Execution::Parallel);

struct VarianceBound {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// lhs = sum_{a,b} p_a p_b |pbar_a^T V^{-1} pbar_b|^eps,
/// rhs = 4 d^{eps/2} (1 - max_a p_a)^{2-eps}.
VarianceBound variance_bound_check(const SimplexDistribution& p, const FeatureSet& features, double epsilon);

}  // namespace htb
