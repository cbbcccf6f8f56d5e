#pragma once

// Regret experiments: policy x environment over seeded repetitions, exact
// pseudo-regret from the environment means, invariant monitoring.

#include "htb/core_types.hpp"
#include "htb/environments.hpp"
#include "htb/estimators_bonuses.hpp"
#include "htb/policies.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace htb {

/// Horizon-scaled alternating adversary (see alternating_script).
struct AlternatingGenerator {
    std::size_t arms = 2;
    double base = 0.0;
    double kappa = 1.0;
    std::size_t block = 1;
};

/// +shift on one arm from round 1 until the budget is spent.
struct FrontLoadedCorruption {
    std::size_t arm = 0;
    double shift = 0.0;
};

/// Everything needed to build an Environment for a given horizon.
struct EnvironmentSpec {
    RegimeKind regime = RegimeKind::StochasticMab;
    Vector means;
    /// Linear regimes; for the others only handed to the policy.
    std::optional<FeatureSet> features;
    Vector theta;
    MeanScript script;
    std::optional<AlternatingGenerator> generator;

    std::vector<CorruptionEvent> corruption;
    std::optional<FrontLoadedCorruption> front_loaded;
    /// Corrupted iff set.
    std::optional<double> budget;

    NoiseModel noise;
    std::optional<double> scale;

    std::size_t num_arms() const;
    Environment build(const HeavyTailSpec& spec, std::size_t horizon) const;
};

struct Monitors {
    bool invariants = true;
    bool entropy = true;
};

struct ExperimentConfig {
    std::string name = "run";
    PolicyConfig policy;
    EnvironmentSpec environment;
    HeavyTailSpec spec{2.0, 1.0};
    std::size_t horizon = 1;
    std::size_t repetitions = 1;
    std::uint64_t seed = 0;
    /// Sorted, at most horizon. Empty means {horizon}.
    std::vector<std::size_t> checkpoints;
    Monitors monitors;

    /// Throws Config on R = 0, unsorted or out-of-range checkpoints.
    void validate() const;
    std::vector<std::size_t> effective_checkpoints() const;
    /// Same experiment at horizon T: checkpoints above T dropped, T appended.
    ExperimentConfig with_horizon(std::size_t horizon) const;
};

struct InvariantSummary {
    std::size_t simplex_normalized = 0;
    std::size_t gamma_at_most_half = 0;
    std::size_t bonus_within_threshold = 0;
    std::size_t clip_contained = 0;
    std::size_t beta_monotone = 0;
    /// Soft; excluded from hard_total().
    std::size_t entropy_stable = 0;

    void add(const InvariantFlags& flags, const Monitors& monitors);
    void merge(const InvariantSummary& other);
    std::size_t hard_total() const;
};

struct RepetitionResult {
    /// Cumulative pseudo-regret at each checkpoint.
    Vector regret;
    std::size_t comparator = 0;
    InvariantSummary invariants;
    std::optional<std::string> error;
};

struct RegretCurve {
    std::vector<std::size_t> checkpoints;
    Vector mean_regret;
    Vector standard_error;
    /// R x checkpoints; rows of failed repetitions are empty.
    std::vector<Vector> per_seed;
    std::vector<std::size_t> comparators;
    InvariantSummary invariants;
    /// "repetition r: message" for every failed repetition.
    std::vector<std::string> failures;

    bool ok() const { return failures.empty() && invariants.hard_total() == 0; }
};

/// <p, m> - m_comparator, accumulated as sum_a p_a (m_a - m_comparator) so
/// that it is exactly nonnegative whenever the comparator has the smallest
/// mean.
double pseudo_regret_increment(const SimplexDistribution& p, std::span<const double> means, std::size_t comparator);

/// Called once per round with the record and the mean vector of that round.
using RoundObserver = std::function<void(const RoundRecord&, const Vector&)>;

/// One repetition on a copy of `prototype` with rng seeded by seed. Stops
/// after `rounds` rounds when given (checkpoints beyond are left out).
RepetitionResult run_repetition(const ExperimentConfig& config, const Environment& prototype, std::uint64_t seed,
                                const RoundObserver& observer = {}, std::optional<std::size_t> rounds = {});

/// Repetition r uses seed + r. Parallel and serial execution give identical
/// curves. Environment construction errors propagate; errors inside a
/// repetition are collected in failures.
RegretCurve run_experiment(const ExperimentConfig& config, Execution exec = Execution::Parallel);

struct ScalingRow {
    std::size_t horizon = 0;
    double mean_regret = 0.0;
    double standard_error = 0.0;
    /// mean_regret / T^{1/eps} and mean_regret / ln T.
    double ratio_power = 0.0;
    double ratio_log = 0.0;
    RegretCurve curve;
};

/// run_experiment at each horizon (increasing, at least three).
std::vector<ScalingRow> scaling_probe(const ExperimentConfig& config, std::span<const std::size_t> horizons,
                                      Execution exec = Execution::Parallel);

/// Applies HTB_THREADS (0 or unset = OpenMP default) and returns the thread
/// count in effect.
int configure_threads_from_env();

}  // namespace htb
