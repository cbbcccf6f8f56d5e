#pragma once

// Loss generators. Every environment exposes the per-round mean vector m_t
// (for exact pseudo-regret) and draws losses m_{t,a} + c X with X from a
// heavy-tailed noise law and c calibrated so that E|loss|^eps <= sigma.

#include "htb/core_types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

namespace htb {

enum class NoiseKind { SymmetricPareto, StudentT, Bounded };

const char* to_string(NoiseKind kind);

/// SymmetricPareto: X = +-U^{-1/a}, |X| >= 1, shape a.
/// StudentT: t distribution with nu = shape degrees of freedom.
/// Bounded: uniform on [-w, w] with w = shape (w = 0 is noiseless).
struct NoiseModel {
    NoiseKind kind = NoiseKind::SymmetricPareto;
    double shape = 3.0;

    void validate(double epsilon) const;
    bool degenerate() const { return kind == NoiseKind::Bounded && shape == 0.0; }
    /// One draw of X (before scaling).
    double sample(Rng& rng) const;
};

/// E|X|^e: closed form for the Pareto law, quadrature for the others.
double noise_abs_moment(const NoiseModel& noise, double e);

/// Closed-form moments used to cross-check the quadrature.
double student_t_abs_moment_closed_form(double nu, double e);
double bounded_abs_moment_closed_form(double half_width, double e);

/// Upper bound on E|mean + scale X|^e: max(1, 2^{e-1}) (|mean|^e + scale^e E|X|^e).
/// Degenerate noise gives |mean|^e exactly.
double moment_bound(double mean, const NoiseModel& noise, double scale, double e);

struct Calibration {
    double scale = 1.0;
    /// moment_bound(mean, noise, scale, eps) <= sigma.
    double certificate = 0.0;
};

/// Largest c with 2^{eps-1}(|mean|^eps + c^eps E|X|^eps) <= sigma. Throws
/// Infeasible when |mean|^eps >= sigma / 2^{eps-1}.
Calibration calibrate_moment(double mean, const NoiseModel& noise, const HeavyTailSpec& spec);

/// Additive mean shift injected at round t on one arm.
struct CorruptionEvent {
    std::size_t t = 0;
    std::size_t arm = 0;
    double shift = 0.0;
};

/// CSV with columns t, arm, shift (header optional, rounds 1-based).
std::vector<CorruptionEvent> read_corruption_csv(const std::string& path);
/// +shift on `arm` from round 1 on until the budget is spent (the last event
/// may be partial).
std::vector<CorruptionEvent> front_loaded_corruption(std::size_t arm, double shift, double budget);

/// Per-round mean rows for a scripted adversary, one row per round.
using MeanScript = std::vector<Vector>;

/// Means of K arms over T rounds: arm 0 at `base`, the others at base + gap,
/// and one designated worst arm (cycling through 1..K-1 every `block` rounds)
/// at base + 2 gap, with gap = kappa T^{-(eps-1)/eps}.
MeanScript alternating_script(std::size_t k, std::size_t horizon, double base, double kappa, std::size_t block,
                              double epsilon);
/// CSV with one row of K means per round.
MeanScript read_script_csv(const std::string& path);

/// Non-oblivious adversary: means for round t given the arms played so far.
using AdversaryCallback = std::function<Vector(std::size_t t, std::span<const std::size_t> history)>;

enum class RegimeKind { StochasticMab, StochasticLinear, AdversarialScript, Callback };

const char* to_string(RegimeKind kind);

struct NotApplicable {};

class Environment {
public:
    static Environment stochastic_mab(Vector means, NoiseModel noise, HeavyTailSpec spec, std::size_t horizon);
    static Environment stochastic_linear(FeatureSet features, Eigen::VectorXd theta, NoiseModel noise,
                                         HeavyTailSpec spec, std::size_t horizon);
    static Environment scripted(MeanScript script, NoiseModel noise, HeavyTailSpec spec);
    static Environment callback(std::size_t k, AdversaryCallback cb, double max_abs_mean, NoiseModel noise,
                                HeavyTailSpec spec, std::size_t horizon);

    /// Adds corruption on top of a stochastic regime. Throws Config when the
    /// schedule spends more than `budget` or points outside the horizon.
    Environment& corrupt(std::vector<CorruptionEvent> events, double budget);

    /// Fixes the noise scale instead of calibrating it.
    Environment& set_scale(double scale);

    RegimeKind regime() const { return regime_; }
    bool corrupted() const { return corrupted_; }
    std::size_t num_arms() const { return k_; }
    std::size_t horizon() const { return horizon_; }
    const FeatureSet* features() const { return features_ ? &*features_ : nullptr; }
    const NoiseModel& noise() const { return noise_; }
    const HeavyTailSpec& spec() const { return spec_; }
    double scale() const { return scale_; }
    double corruption_budget() const { return budget_; }

    /// E[loss_{t,a}] for all arms, corruption included. For callback regimes
    /// this uses the history recorded through record_action().
    Vector expected_losses(std::size_t t) const;
    double sample_loss(std::size_t t, std::size_t arm, Rng& rng) const;
    void record_action(std::size_t arm);

    /// Sum over rounds of max_a |shift_{t,a}| up to and including round t.
    double corruption_spent(std::size_t t) const;

    /// Per-arm moment certificate: max over rounds of moment_bound(m_{t,a}).
    Vector certificates() const;
    bool certified() const;
    /// Throws Infeasible unless every certificate is at most sigma.
    void require_certified() const;

    /// Gaps of the uncorrupted means, the unique optimal arm and C; throws
    /// NonUniqueOptimum on ties. Scripted and callback regimes are not
    /// self-bounding.
    std::variant<GapProfile, NotApplicable> self_bounding_certificate() const;

    /// Largest |mean| the environment can produce, shifts included.
    double max_abs_mean() const;

private:
    Environment() = default;
    Vector base_means(std::size_t t) const;
    void calibrate();

    RegimeKind regime_ = RegimeKind::StochasticMab;
    std::size_t k_ = 0;
    std::size_t horizon_ = 0;
    NoiseModel noise_;
    HeavyTailSpec spec_{2.0, 1.0};
    double scale_ = 1.0;
    bool explicit_scale_ = false;

    Vector means_;
    std::optional<FeatureSet> features_;
    MeanScript script_;
    AdversaryCallback callback_;
    double callback_bound_ = 0.0;
    std::vector<std::size_t> history_;

    bool corrupted_ = false;
    double budget_ = 0.0;
    // Shifts indexed by round (1-based), one K-vector per corrupted round.
    std::vector<std::pair<std::size_t, Vector>> shifts_;
    Vector spent_prefix_;
};

struct MomentCheck {
    std::size_t arm = 0;
    double order = 0.0;
    double estimate = 0.0;
    double standard_error = 0.0;
    double bound = 0.0;
};

/// Monte Carlo E|loss_a|^{order} at round t for every arm, n draws per arm,
/// in fixed-size chunks with per-chunk seeds (serial and parallel agree).
std::vector<MomentCheck> monte_carlo_moments(const Environment& env, std::size_t t, double order, std::size_t n,
                                             std::uint64_t seed, bool parallel = true);

}  // namespace htb
