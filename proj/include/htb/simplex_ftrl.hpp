#pragma once

// Per-round FTRL programs over the probability simplex:
//
//   q = argmin_q <L, q> + beta * psi(q)                      (Shannon / Tsallis)
//   q = argmin_q <L, q> + beta * psi_a(q) + beta_bar * psi_b(q)   (hybrid)
//
// with psi_alpha(q) = -(1/alpha) sum_a (q_a^alpha - q_a) and the Shannon
// psi(q) = sum_a q_a log q_a. Shannon has a closed form. The Tsallis programs
// are solved through their scalar dual: every coordinate is a decreasing
// function of one shared multiplier, found by safeguarded Newton/bisection.

#include "htb/core_types.hpp"

#include <optional>
#include <span>

namespace htb {

enum class RegularizerKind { Shannon, Tsallis, HybridTsallis };

struct RegularizerSpec {
    RegularizerKind kind = RegularizerKind::Shannon;
    double alpha = 0.5;
    double alpha_bar = 0.0;
    double beta_bar = 0.0;

    static RegularizerSpec shannon();
    static RegularizerSpec tsallis(double alpha);
    static RegularizerSpec hybrid(double alpha, double alpha_bar, double beta_bar);

    /// Throws InvalidArgument unless 0 < alpha < 1 (Tsallis) or
    /// 0 < alpha_bar <= alpha < 1 and beta_bar >= 0 (hybrid).
    void validate() const;
};

struct FtrlSolution {
    SimplexDistribution q;
    /// Multiplier lambda of the constraint sum q = 1 in
    /// <L,q> + reg(q) - lambda (sum q - 1).
    double dual_value = 0.0;
    /// Internal shift c with the coordinate equations in the form
    /// beta q^(alpha-1) (+ beta_bar q^(alpha_bar-1)) = L_a + c. Usable as a warm start.
    double shift = 0.0;
    std::size_t iterations = 0;
    /// |sum q - 1| before the final rescale.
    double residual = 0.0;
};

inline constexpr std::size_t kFtrlMaxIterations = 200;

FtrlSolution solve_shannon(std::span<const double> cum_loss, double beta);

FtrlSolution solve_tsallis(std::span<const double> cum_loss, double beta, double alpha,
                           std::optional<double> warm_shift = std::nullopt);

FtrlSolution solve_hybrid(std::span<const double> cum_loss, double beta, double alpha, double beta_bar,
                          double alpha_bar, std::optional<double> warm_shift = std::nullopt);

/// Dispatches on the regularizer kind.
FtrlSolution solve_ftrl(const RegularizerSpec& reg, std::span<const double> cum_loss, double beta,
                        std::optional<double> warm_shift = std::nullopt);

/// -psi_alpha(q) = (1/alpha)(sum_a q_a^alpha - 1) >= 0.
double tsallis_entropy_value(const SimplexDistribution& q, double alpha);

/// psi_alpha(q) for an arbitrary point of the simplex (used by oracles).
double tsallis_regularizer(std::span<const double> q, double alpha);
double shannon_regularizer(std::span<const double> q);

/// Full objective <L,q> + beta psi(q) (+ beta_bar psi_bar(q)).
double ftrl_objective(const RegularizerSpec& reg, std::span<const double> cum_loss, double beta,
                      std::span<const double> q);

/// Gradient of ftrl_objective with respect to q. Infinite at zero coordinates
/// for Tsallis regularizers.
Vector ftrl_gradient(const RegularizerSpec& reg, std::span<const double> cum_loss, double beta,
                     std::span<const double> q);

}  // namespace htb
