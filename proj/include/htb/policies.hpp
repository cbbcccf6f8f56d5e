#pragma once

// Bandit policies. Each round runs select() -> (harness samples an arm) ->
// observe().
//
// * Alg1Policy: Tsallis FTRL (alpha = 1/eps) on clipped, bonus-shifted
//   importance-weighted losses, mixed with uniform exploration. Anytime.
// * Alg2Policy: exponential weights on clipped, bonus-shifted least-squares
//   estimates, mixed with a G-optimal design. Needs the horizon.
// * Alg3Policy: hybrid Tsallis FTRL on the variance-reduced estimator, mixed
//   with the centered design, learning rate by heavy-tailed
//   stability-penalty matching. Anytime.
// * UniformPolicy, ExpWeightsPolicy: controls.

#include "htb/core_types.hpp"
#include "htb/estimators_bonuses.hpp"

#include <memory>
#include <optional>
#include <string>

namespace htb {

struct DerivedRoundParams {
    double q_star = 0.0;
    Vector q_tilde;
    std::size_t a_tilde = 0;
    double gamma = 0.0;
    Vector s;
    double z = 0.0;
    double w = 0.0;
};

/// sigma^{1/eps} max{8 eps K^{(eps-1)/eps} / (eps - 1), t^{1/eps}}.
double mab_beta_schedule(std::size_t t, std::size_t k, const HeavyTailSpec& spec);

/// s_a = (1 - alpha) q~_a^{alpha-1} beta / 8 and
/// gamma = sigma^{1/(eps-1)} K s_{a~}^{eps/(1-eps)} with alpha = 1/eps.
/// Throws InvariantViolation when gamma > 1/2 + 1e-12.
DerivedRoundParams mab_round_params(const SimplexDistribution& q, double beta, std::size_t k,
                                    const HeavyTailSpec& spec);

struct Alg2Constants {
    double beta = 0.0;
    double gamma = 0.0;
    double s = 0.0;
};

/// beta = (log K / (sigma d^{eps/2} T))^{-1/eps}, gamma = 4 sigma^{2/eps} d beta^{-2},
/// s = beta / 2. Throws HorizonTooShort when gamma > 1/2.
Alg2Constants alg2_constants(std::size_t k, std::size_t d, std::size_t horizon, const HeavyTailSpec& spec);

/// beta + (beta^{1-eps} z + beta^{-2} w) / h. Throws ZeroEntropy when h <= 1e-300.
double htspm_update(double beta, double z, double w, double h, const HeavyTailSpec& spec);
/// The increment alone, (beta^{1-eps} z + beta^{-2} w) / h.
double htspm_increment(double beta, double z, double w, double h, const HeavyTailSpec& spec);

/// gamma = 256 (1-alpha)^{-2} sigma^{2/eps} d beta^{-2} q*^{2(1-alpha)},
/// s = (1-alpha) beta q*^{alpha-1} / 8 for every arm,
/// w = sigma^{3/eps} (1-alpha)^{-2} d q*^{2(1-alpha)}. z needs p and is left 0.
DerivedRoundParams alg3_round_params(const SimplexDistribution& q, double beta, std::size_t d,
                                     const HeavyTailSpec& spec, double alpha);

/// z = (1-alpha)^{1-eps} sigma q*^{(eps-1)(1-alpha)} d^{eps/2} (1 - max p)^{2-eps}.
double alg3_z(double q_star, double p_max, std::size_t d, const HeavyTailSpec& spec, double alpha);

/// sqrt(1024) (1-alpha)^{-1} sigma^{1/eps} sqrt(d) (1/2)^{1-alpha}; keeps gamma <= 1/4.
double alg3_initial_beta(double alpha, std::size_t d, const HeavyTailSpec& spec);

/// 64 (1-alpha)^{-3} d^eps beta_1^{1-eps} max{sigma^{3/eps}, sigma}.
double alg3_beta_bar(double alpha, std::size_t d, double beta1, const HeavyTailSpec& spec);

/// max(1/2, 1 - 1/ln(max(K, 3))).
double default_alpha(std::size_t k);

/// Rows 0, e_1, ..., e_{K-1} in R^{K-1}: every loss vector is affine in them.
FeatureSet affine_basis(std::size_t k);

enum class PolicyKind { Alg1, Alg2, Alg3, Uniform, ExpWeights };

const char* to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::Alg1;
    /// Tsallis order for Alg3; default_alpha(K) when unset.
    std::optional<double> alpha;
    /// Multiplies the clip thresholds after gamma is computed. 1 in every
    /// real configuration; other values exist to exercise the monitors.
    double clip_scale = 1.0;
};

struct PolicyState {
    Vector cumulative_shifted_loss;
    double beta = 0.0;
    /// Low part of the learning rate; the exact value is beta + beta_lo
    /// (Alg3 only).
    double beta_lo = 0.0;
    double beta_bar = 0.0;
    std::size_t round = 0;
    std::optional<SimplexDistribution> last_q;
    std::optional<SimplexDistribution> last_p;
    double last_h = 0.0;
    std::optional<SimplexDistribution> design;
    double alpha = 0.0;
    double alpha_bar = 0.0;
    std::size_t horizon = 0;
};

class Policy {
public:
    virtual ~Policy() = default;

    /// Distribution p_t for the next round.
    virtual const SimplexDistribution& select() = 0;
    /// Feeds back the played arm, the uniform draw that chose it and its loss.
    virtual RoundRecord observe(std::size_t arm, double uniform_draw, double loss) = 0;

    const PolicyState& state() const { return state_; }
    std::size_t num_arms() const { return k_; }

protected:
    Policy(std::size_t k, HeavyTailSpec spec);

    RoundRecord base_record(std::size_t arm, double uniform_draw, double loss) const;
    static bool simplex_ok(const SimplexDistribution& p);

    std::size_t k_;
    HeavyTailSpec spec_;
    PolicyState state_;
    bool pending_ = false;
};

class Alg1Policy : public Policy {
public:
    Alg1Policy(std::size_t k, HeavyTailSpec spec, double clip_scale = 1.0);
    const SimplexDistribution& select() override;
    RoundRecord observe(std::size_t arm, double uniform_draw, double loss) override;

private:
    double clip_scale_;
    double prev_beta_ = 0.0;
    std::optional<double> warm_;
    DerivedRoundParams params_;
};

class Alg2Policy : public Policy {
public:
    Alg2Policy(FeatureSet features, HeavyTailSpec spec, std::size_t horizon, double clip_scale = 1.0);
    const SimplexDistribution& select() override;
    RoundRecord observe(std::size_t arm, double uniform_draw, double loss) override;

    const Alg2Constants& constants() const { return constants_; }

private:
    FeatureSet features_;
    Alg2Constants constants_;
    double clip_scale_;
};

class Alg3Policy : public Policy {
public:
    Alg3Policy(FeatureSet features, HeavyTailSpec spec, std::optional<double> alpha = std::nullopt,
               double clip_scale = 1.0);
    const SimplexDistribution& select() override;
    RoundRecord observe(std::size_t arm, double uniform_draw, double loss) override;

private:
    FeatureSet features_;
    double clip_scale_;
    double prev_h_ = 0.0;
    std::optional<double> warm_;
    DerivedRoundParams params_;
};

class UniformPolicy : public Policy {
public:
    UniformPolicy(std::size_t k, HeavyTailSpec spec);
    const SimplexDistribution& select() override;
    RoundRecord observe(std::size_t arm, double uniform_draw, double loss) override;
};

/// Exponential weights on unclipped importance-weighted losses with the
/// anytime rate eta_t = sqrt(ln K / (K t)).
class ExpWeightsPolicy : public Policy {
public:
    ExpWeightsPolicy(std::size_t k, HeavyTailSpec spec);
    const SimplexDistribution& select() override;
    RoundRecord observe(std::size_t arm, double uniform_draw, double loss) override;
};

/// Builds a policy for K arms. Alg2 and Alg3 use `features` when given;
/// otherwise Alg2 uses the standard basis and Alg3 the affine basis.
std::unique_ptr<Policy> make_policy(const PolicyConfig& config, std::size_t k, const FeatureSet* features,
                                    const HeavyTailSpec& spec, std::size_t horizon);

}  // namespace htb
